use serde::{Deserialize, Serialize};

/// One run of a change set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", content = "text", rename_all = "snake_case")]
pub enum Run {
    Keep(String),
    Delete(String),
    Insert(String),
}

impl Run {
    pub fn text(&self) -> &str {
        match self {
            Run::Keep(t) | Run::Delete(t) | Run::Insert(t) => t,
        }
    }

    pub fn is_change(&self) -> bool {
        !matches!(self, Run::Keep(_))
    }

    fn same_variant(&self, other: &Run) -> bool {
        std::mem::discriminant(self) == std::mem::discriminant(other)
    }
}

/// Word-level tracked changes between two texts, in normal form: no two
/// adjacent runs share a variant, and within every changed region the
/// deletion precedes the insertion.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ChangeSet {
    pub runs: Vec<Run>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decision {
    Accept,
    Reject,
}

/// How a pending change set is settled: wholesale, or one decision per
/// Delete/Insert run in order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "camelCase")]
pub enum Resolution {
    AcceptAll,
    RejectAll,
    PerRun { decisions: Vec<Decision> },
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum ResolveError {
    #[error("{expected} change runs need a decision each, got {given}")]
    DecisionCount { expected: usize, given: usize },
}

impl ChangeSet {
    pub fn old_text(&self) -> String {
        self.runs
            .iter()
            .filter(|r| !matches!(r, Run::Insert(_)))
            .map(Run::text)
            .collect()
    }

    pub fn new_text(&self) -> String {
        self.runs
            .iter()
            .filter(|r| !matches!(r, Run::Delete(_)))
            .map(Run::text)
            .collect()
    }

    /// True when old and new text are identical.
    pub fn is_unchanged(&self) -> bool {
        !self.runs.iter().any(Run::is_change)
    }

    pub fn change_count(&self) -> usize {
        self.runs.iter().filter(|r| r.is_change()).count()
    }

    /// Number of deleted plus inserted tokens.
    pub fn token_cost(&self) -> usize {
        self.runs
            .iter()
            .filter(|r| r.is_change())
            .map(|r| tokenize(r.text()).len())
            .sum()
    }

    /// Character ranges of the old text touched by each changed region; an
    /// insertion with no deletion yields an empty range at its position.
    pub fn changed_ranges(&self) -> Vec<(usize, usize)> {
        let mut ranges: Vec<(usize, usize)> = Vec::new();
        let mut pos = 0;
        let mut open: Option<usize> = None;
        for run in &self.runs {
            let len = run.text().chars().count();
            match run {
                Run::Keep(_) => {
                    if let Some(start) = open.take() {
                        ranges.push((start, pos));
                    }
                    pos += len;
                }
                Run::Delete(_) => {
                    open.get_or_insert(pos);
                    pos += len;
                }
                Run::Insert(_) => {
                    open.get_or_insert(pos);
                }
            }
        }
        if let Some(start) = open {
            ranges.push((start, pos));
        }
        ranges
    }

    pub fn resolve(&self, resolution: &Resolution) -> Result<String, ResolveError> {
        match resolution {
            Resolution::AcceptAll => Ok(self.new_text()),
            Resolution::RejectAll => Ok(self.old_text()),
            Resolution::PerRun { decisions } => resolve(self, decisions),
        }
    }

    /// Inline tracked-changes rendering: deletions as `[-…-]`, insertions
    /// as `{+…+}`.
    pub fn render_marked(&self) -> String {
        let mut out = String::new();
        for run in &self.runs {
            match run {
                Run::Keep(t) => out.push_str(t),
                Run::Delete(t) => {
                    out.push_str("[-");
                    out.push_str(t);
                    out.push_str("-]");
                }
                Run::Insert(t) => {
                    out.push_str("{+");
                    out.push_str(t);
                    out.push_str("+}");
                }
            }
        }
        out
    }

    fn push(&mut self, run: Run) {
        if run.text().is_empty() {
            return;
        }
        if let Some(last) = self.runs.last_mut() {
            if last.same_variant(&run) {
                match last {
                    Run::Keep(t) | Run::Delete(t) | Run::Insert(t) => t.push_str(run.text()),
                }
                return;
            }
        }
        self.runs.push(run);
    }
}

/// Applies one decision per Delete/Insert run, in run order. Accepting a
/// deletion drops its text; accepting an insertion keeps it.
pub fn resolve(changes: &ChangeSet, decisions: &[Decision]) -> Result<String, ResolveError> {
    let expected = changes.change_count();
    if decisions.len() != expected {
        return Err(ResolveError::DecisionCount { expected, given: decisions.len() });
    }
    let mut decisions = decisions.iter();
    let mut out = String::new();
    for run in &changes.runs {
        match run {
            Run::Keep(t) => out.push_str(t),
            Run::Delete(t) => {
                if decisions.next() == Some(&Decision::Reject) {
                    out.push_str(t);
                }
            }
            Run::Insert(t) => {
                if decisions.next() == Some(&Decision::Accept) {
                    out.push_str(t);
                }
            }
        }
    }
    Ok(out)
}

/// Splits text into word tokens: each token is a run of non-whitespace with
/// the whitespace after it attached. Whitespace at the very start of the
/// text forms a token of its own.
pub fn tokenize(text: &str) -> Vec<&str> {
    let mut tokens = Vec::new();
    let mut start = 0;
    let mut prev_space = false;
    for (i, c) in text.char_indices() {
        if !c.is_whitespace() && prev_space && i > start {
            tokens.push(&text[start..i]);
            start = i;
        }
        prev_space = c.is_whitespace();
    }
    if start < text.len() {
        tokens.push(&text[start..]);
    }
    tokens
}

/// Word-level LCS diff. Ties prefer the earliest match in both texts, and
/// every changed region is emitted as its deletion followed by its insertion.
pub fn diff(old: &str, new: &str) -> ChangeSet {
    let a = tokenize(old);
    let b = tokenize(new);

    // A shared prefix is matched earliest by any alignment, so skip it.
    let prefix = a.iter().zip(&b).take_while(|(x, y)| x == y).count();

    let mut out = ChangeSet::default();
    out.push(Run::Keep(a[..prefix].concat()));
    let (mut deleted, mut inserted) = (String::new(), String::new());
    for step in align(&a[prefix..], &b[prefix..]) {
        match step {
            Step::Keep(t) => {
                out.push(Run::Delete(std::mem::take(&mut deleted)));
                out.push(Run::Insert(std::mem::take(&mut inserted)));
                out.push(Run::Keep(t.to_string()));
            }
            Step::Delete(t) => deleted.push_str(t),
            Step::Insert(t) => inserted.push_str(t),
        }
    }
    out.push(Run::Delete(deleted));
    out.push(Run::Insert(inserted));
    out
}

enum Step<'a> {
    Keep(&'a str),
    Delete(&'a str),
    Insert(&'a str),
}

fn align<'a>(a: &[&'a str], b: &[&'a str]) -> Vec<Step<'a>> {
    let (n, m) = (a.len(), b.len());
    // suffix[i][j] = LCS length of a[i..] and b[j..]
    let width = m + 1;
    let mut suffix = vec![0u32; (n + 1) * width];
    for i in (0..n).rev() {
        for j in (0..m).rev() {
            suffix[i * width + j] = if a[i] == b[j] {
                suffix[(i + 1) * width + j + 1] + 1
            } else {
                suffix[(i + 1) * width + j].max(suffix[i * width + j + 1])
            };
        }
    }
    let at = |i: usize, j: usize| suffix[i * width + j];

    let mut steps = Vec::with_capacity(n + m);
    let (mut i, mut j) = (0, 0);
    while i < n && j < m {
        if a[i] == b[j] && at(i, j) == at(i + 1, j + 1) + 1 {
            steps.push(Step::Keep(a[i]));
            i += 1;
            j += 1;
        } else if at(i + 1, j) >= at(i, j + 1) {
            steps.push(Step::Delete(a[i]));
            i += 1;
        } else {
            steps.push(Step::Insert(b[j]));
            j += 1;
        }
    }
    steps.extend(a[i..].iter().map(|t| Step::Delete(t)));
    steps.extend(b[j..].iter().map(|t| Step::Insert(t)));
    steps
}

#[cfg(test)]
mod tests {
    use super::*;

    fn keep(t: &str) -> Run {
        Run::Keep(t.into())
    }
    fn del(t: &str) -> Run {
        Run::Delete(t.into())
    }
    fn ins(t: &str) -> Run {
        Run::Insert(t.into())
    }

    #[test]
    fn tokens_carry_trailing_whitespace() {
        assert_eq!(tokenize("cat goes  to\nthe barn"), ["cat ", "goes  ", "to\n", "the ", "barn"]);
        assert_eq!(tokenize("  lead"), ["  ", "lead"]);
        assert_eq!(tokenize("   "), ["   "]);
        assert!(tokenize("").is_empty());
    }

    #[test]
    fn identical_texts_are_one_keep() {
        let c = diff("the same words", "the same words");
        assert_eq!(c.runs, [keep("the same words")]);
        assert!(c.is_unchanged());
    }

    #[test]
    fn empty_sides() {
        assert_eq!(diff("", "new words").runs, [ins("new words")]);
        assert_eq!(diff("old words", "").runs, [del("old words")]);
        assert!(diff("", "").runs.is_empty());
    }

    #[test]
    fn shared_article_is_kept() {
        // "the " is common to both, so a minimal alignment keeps it.
        let c = diff("cat goes to the barn", "cat wanders about the lake");
        assert_eq!(
            c.runs,
            [keep("cat "), del("goes to "), ins("wanders about "), keep("the "), del("barn"), ins("lake")]
        );
        assert_eq!(c.token_cost(), 6);
    }

    #[test]
    fn ties_prefer_the_earliest_match() {
        let c = diff("a b a ", "a ");
        assert_eq!(c.runs, [keep("a "), del("b a ")]);
        let c = diff("u s", "s t s");
        assert_eq!(c.runs, [del("u "), ins("s t "), keep("s")]);
        let c = diff("u s ", "s t s ");
        assert_eq!(c.runs, [del("u "), keep("s "), ins("t s ")]);
        // Leading "x " matches the first of the two in the new text.
        let c = diff("x y", "x x y");
        assert_eq!(c.runs, [keep("x "), ins("x "), keep("y")]);
    }

    #[test]
    fn per_run_resolution_composes() {
        let c = diff("cat goes to the barn", "cat wanders about the lake");
        use Decision::*;
        let text = resolve(&c, &[Reject, Accept, Reject, Accept]).unwrap();
        assert_eq!(text, "cat goes to wanders about the barnlake");
        assert_eq!(c.resolve(&Resolution::AcceptAll).unwrap(), "cat wanders about the lake");
        assert_eq!(c.resolve(&Resolution::RejectAll).unwrap(), "cat goes to the barn");
        assert_eq!(
            resolve(&c, &[Accept]),
            Err(ResolveError::DecisionCount { expected: 4, given: 1 })
        );
    }

    #[test]
    fn changed_ranges_are_in_old_offsets() {
        let c = diff("one two three", "one 2 three");
        assert_eq!(c.changed_ranges(), [(4, 8)]);
        let c = diff("a c", "a b c");
        assert_eq!(c.changed_ranges(), [(2, 2)]);
    }

    #[test]
    fn serializes_as_run_array() {
        let c = diff("a b", "a c");
        let json = serde_json::to_value(&c).unwrap();
        assert_eq!(
            json,
            serde_json::json!([
                {"op": "keep", "text": "a "},
                {"op": "delete", "text": "b"},
                {"op": "insert", "text": "c"}
            ])
        );
        let r: Resolution = serde_json::from_str(r#"{"mode":"perRun","decisions":["accept","reject"]}"#).unwrap();
        assert_eq!(r, Resolution::PerRun { decisions: vec![Decision::Accept, Decision::Reject] });
    }
}
