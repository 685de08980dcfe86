use sha2::{Digest, Sha256};

/// Length of `text` in Unicode scalar values.
pub fn char_len(text: &str) -> usize {
    text.chars().count()
}

/// Slices `text` by Unicode scalar offsets, clamping to the end of the text.
pub fn char_slice(text: &str, start: usize, end: usize) -> &str {
    let byte_at = |offset: usize| {
        text.char_indices()
            .nth(offset)
            .map(|(b, _)| b)
            .unwrap_or(text.len())
    };
    let (start, end) = (byte_at(start), byte_at(end.max(start)));
    &text[start..end]
}

/// Hex SHA-256 of `text`.
pub fn content_hash(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

/// Key used for name uniqueness and name resolution.
pub fn normalize_name(name: &str) -> String {
    name.trim().to_lowercase()
}
