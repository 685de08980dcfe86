use crate::model::{content_hash, SentenceSpan};

/// Words whose trailing period never ends a sentence.
const ABBREVIATIONS: &[&str] = &["mr", "mrs", "dr", "st", "e.g", "i.e"];

fn is_terminal(c: char) -> bool {
    matches!(c, '.' | '!' | '?')
}

fn is_closing_quote(c: char) -> bool {
    matches!(c, '"' | '\u{201D}')
}

/// Splits `text` into sentences.
///
/// A sentence ends at a run of `.`, `!` or `?` that is followed either by the
/// end of the text or by whitespace and then an uppercase letter (optionally
/// behind an opening quote). Terminators inside a double-quoted passage only
/// end the sentence when the quote closes right after them and the break
/// condition holds after the closing quote. Periods ending one of the fixed
/// abbreviations never split.
///
/// Spans exclude surrounding whitespace.
pub fn segment_sentences(text: &str) -> Vec<SentenceSpan> {
    let chars: Vec<char> = text.chars().collect();
    let mut bounds: Vec<(usize, usize)> = Vec::new();
    let mut start = None;
    let mut in_quote = false;
    let mut i = 0;

    while i < chars.len() {
        let c = chars[i];
        if start.is_none() {
            if c.is_whitespace() {
                i += 1;
                continue;
            }
            start = Some(i);
        }
        match c {
            '"' => in_quote = !in_quote,
            '\u{201C}' => in_quote = true,
            '\u{201D}' => in_quote = false,
            _ => {}
        }
        if !is_terminal(c) {
            i += 1;
            continue;
        }

        let mut end = i + 1;
        while end < chars.len() && is_terminal(chars[end]) {
            end += 1;
        }
        if in_quote {
            if end < chars.len() && is_closing_quote(chars[end]) {
                end += 1;
                in_quote = false;
            } else {
                i = end;
                continue;
            }
        }

        if breaks_after(&chars, end) && !ends_abbreviation(&chars, start.unwrap_or(0), i, c) {
            bounds.push((start.take().unwrap_or(0), end));
            in_quote = false;
        }
        i = end;
    }
    if let Some(s) = start {
        let mut end = chars.len();
        while end > s && chars[end - 1].is_whitespace() {
            end -= 1;
        }
        if end > s {
            bounds.push((s, end));
        }
    }

    bounds
        .into_iter()
        .enumerate()
        .map(|(index, (char_start, char_end))| {
            let body: String = chars[char_start..char_end].iter().collect();
            SentenceSpan {
                index,
                char_start,
                char_end,
                text_hash: content_hash(&body),
            }
        })
        .collect()
}

fn breaks_after(chars: &[char], end: usize) -> bool {
    if end == chars.len() {
        return true;
    }
    let mut j = end;
    if !chars[j].is_whitespace() {
        return false;
    }
    while j < chars.len() && chars[j].is_whitespace() {
        j += 1;
    }
    if j == chars.len() {
        return true;
    }
    if matches!(chars[j], '"' | '\u{201C}') {
        j += 1;
    }
    chars.get(j).is_some_and(|c| c.is_uppercase())
}

fn ends_abbreviation(chars: &[char], sentence_start: usize, terminal: usize, c: char) -> bool {
    if c != '.' {
        return false;
    }
    let mut j = terminal;
    while j > sentence_start && !chars[j - 1].is_whitespace() && !matches!(chars[j - 1], '(' | '"' | '\u{201C}') {
        j -= 1;
    }
    let word: String = chars[j..terminal].iter().collect::<String>().to_lowercase();
    ABBREVIATIONS.contains(&word.as_str())
}
