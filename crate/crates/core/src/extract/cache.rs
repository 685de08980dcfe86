use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::payload::{ExtractedEntity, ExtractedLocation, RawAction};

/// Records of a whole-story pass and the hash of the text they came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CachedPass<T> {
    pub text_hash: String,
    pub records: Vec<T>,
}

/// Extraction results keyed by content hash, so unchanged sentences are
/// never sent to the provider again.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ExtractionCache {
    /// Sentence text hash → actions returned for that exact sentence.
    pub sentences: BTreeMap<String, Vec<RawAction>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub entities: Option<CachedPass<ExtractedEntity>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub locations: Option<CachedPass<ExtractedLocation>>,
}

impl ExtractionCache {
    pub fn actions_for(&self, text_hash: &str) -> Option<&[RawAction]> {
        self.sentences.get(text_hash).map(Vec::as_slice)
    }

    /// Keeps only the entries for the given sentence hashes.
    pub fn retain_sentences<'a>(&mut self, live: impl IntoIterator<Item = &'a str>) {
        let live: std::collections::HashSet<&str> = live.into_iter().collect();
        self.sentences.retain(|hash, _| live.contains(hash.as_str()));
    }
}
