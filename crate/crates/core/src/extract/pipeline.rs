use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use futures::future::{BoxFuture, FutureExt};
use futures::stream::{self, StreamExt};
use serde::{Deserialize, Serialize};

use super::assemble::{assemble, entities_from, locations_from};
use super::cache::{CachedPass, ExtractionCache};
use super::payload::{validate_payload, RawAction, Records, Validated};
use super::prompts::{build_entities_prompt, build_events_prompt, build_locations_prompt};
use super::segment::segment_sentences;
use crate::gateway::{Gateway, GatewayError};
use crate::model::{char_slice, content_hash, SentenceSpan, StoryModel};
use crate::prompt::{PromptSpec, Purpose};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Entities,
    Locations,
    Events,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Entities => "entity",
            Stage::Locations => "location",
            Stage::Events => "event",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SentenceProgress {
    pub sentence_index: usize,
    pub completed: usize,
    pub total: usize,
}

pub type ProgressFn = Arc<dyn Fn(SentenceProgress) + Send + Sync>;

#[derive(Clone, Default)]
pub struct ExtractionOptions {
    /// In-flight event requests; the gateway's limit when unset.
    pub max_parallel: Option<usize>,
    /// Called once per completed sentence request.
    pub progress: Option<ProgressFn>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ExtractionReport {
    pub requests: usize,
    pub extracted_sentences: Vec<usize>,
    pub reused_sentences: Vec<usize>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct Extraction {
    pub model: StoryModel,
    pub cache: ExtractionCache,
    pub report: ExtractionReport,
}

#[derive(Debug, thiserror::Error)]
pub enum ExtractError {
    #[error("{stage} extraction failed ({} of {total} sentences completed: {completed:?}): {source}", completed.len())]
    Failed {
        stage: Stage,
        completed: Vec<usize>,
        total: usize,
        #[source]
        source: GatewayError,
    },
}

impl ExtractError {
    pub fn gateway_error(&self) -> &GatewayError {
        match self {
            ExtractError::Failed { source, .. } => source,
        }
    }
}

async fn request(gateway: &Gateway, prompt: &PromptSpec) -> Result<Validated, GatewayError> {
    let raw = gateway.complete_structured(prompt).await?;
    validate_payload(&raw, prompt.purpose).map_err(GatewayError::SchemaMismatch)
}

/// Entity pass, location pass, then one event request per sentence.
pub async fn run_full_extraction(
    text: &str,
    gateway: &Gateway,
    options: &ExtractionOptions,
) -> Result<Extraction, ExtractError> {
    let sentences = segment_sentences(text);
    let total = sentences.len();
    let failed = |stage, source| ExtractError::Failed { stage, completed: Vec::new(), total, source };
    let mut report = ExtractionReport::default();
    let text_hash = content_hash(text);

    report.requests += 1;
    let entity_records = match request(gateway, &build_entities_prompt(text)).await {
        Ok(v) => {
            report.warnings.extend(v.warnings);
            match v.records {
                Records::Entities(records) => records,
                _ => unreachable!("entities purpose yields entity records"),
            }
        }
        Err(e) => return Err(failed(Stage::Entities, e)),
    };
    report.requests += 1;
    let location_records = match request(gateway, &build_locations_prompt(text)).await {
        Ok(v) => {
            report.warnings.extend(v.warnings);
            match v.records {
                Records::Locations(records) => records,
                _ => unreachable!("locations purpose yields location records"),
            }
        }
        Err(e) => return Err(failed(Stage::Locations, e)),
    };

    let entities = entities_from(&entity_records);
    let locations = locations_from(&location_records);
    let wanted: Vec<usize> = (0..total).collect();
    let extracted = extract_sentences(text, &sentences, &wanted, &entities, &locations, gateway, options, &mut report)
        .await?;

    let mut cache = ExtractionCache {
        entities: Some(CachedPass { text_hash: text_hash.clone(), records: entity_records }),
        locations: Some(CachedPass { text_hash, records: location_records }),
        ..ExtractionCache::default()
    };
    let per_sentence: Vec<Vec<RawAction>> = sentences
        .iter()
        .map(|s| extracted.get(&s.index).cloned().unwrap_or_default())
        .collect();
    for (span, actions) in sentences.iter().zip(&per_sentence) {
        cache.sentences.insert(span.text_hash.clone(), actions.clone());
    }
    report.extracted_sentences = wanted;

    let (model, warnings) = assemble(text, sentences, &per_sentence, entities, locations);
    report.warnings.extend(warnings);
    Ok(Extraction { model, cache, report })
}

/// Re-extracts only sentences whose content hash is not cached. Entity and
/// location sets are carried over from `old`.
pub async fn run_incremental_extraction(
    old: &StoryModel,
    cache: &ExtractionCache,
    new_text: &str,
    gateway: &Gateway,
    options: &ExtractionOptions,
) -> Result<Extraction, ExtractError> {
    let sentences = segment_sentences(new_text);
    let mut report = ExtractionReport::default();
    let wanted: Vec<usize> = sentences
        .iter()
        .filter(|s| cache.actions_for(&s.text_hash).is_none())
        .map(|s| s.index)
        .collect();
    report.reused_sentences = sentences
        .iter()
        .filter(|s| !wanted.contains(&s.index))
        .map(|s| s.index)
        .collect();

    let extracted = extract_sentences(
        new_text,
        &sentences,
        &wanted,
        &old.entities,
        &old.locations,
        gateway,
        options,
        &mut report,
    )
    .await?;

    let per_sentence: Vec<Vec<RawAction>> = sentences
        .iter()
        .map(|s| match extracted.get(&s.index) {
            Some(actions) => actions.clone(),
            None => cache.actions_for(&s.text_hash).unwrap_or_default().to_vec(),
        })
        .collect();
    let mut new_cache = cache.clone();
    for (span, actions) in sentences.iter().zip(&per_sentence) {
        new_cache.sentences.insert(span.text_hash.clone(), actions.clone());
    }
    new_cache.retain_sentences(sentences.iter().map(|s| s.text_hash.as_str()));
    report.extracted_sentences = wanted;

    let (mut model, warnings) = assemble(new_text, sentences, &per_sentence, old.entities.clone(), old.locations.clone());
    model.annotations = old.annotations.clone();
    report.warnings.extend(warnings);
    Ok(Extraction { model, cache: new_cache, report })
}

#[allow(clippy::too_many_arguments)]
async fn extract_sentences(
    text: &str,
    sentences: &[SentenceSpan],
    wanted: &[usize],
    entities: &[crate::model::Entity],
    locations: &[crate::model::Location],
    gateway: &Gateway,
    options: &ExtractionOptions,
    report: &mut ExtractionReport,
) -> Result<BTreeMap<usize, Vec<RawAction>>, ExtractError> {
    let entity_names: Vec<&str> = entities.iter().map(|e| e.name.as_str()).collect();
    let location_names: Vec<&str> = locations.iter().map(|l| l.name.as_str()).collect();
    let prompts: Vec<(usize, PromptSpec)> = wanted
        .iter()
        .filter_map(|&i| {
            let span = &sentences[i];
            let before = char_slice(text, 0, span.char_start).trim();
            let body = char_slice(text, span.char_start, span.char_end);
            build_events_prompt(before, body, &entity_names, &location_names).map(|p| (i, p))
        })
        .collect();
    debug_assert!(prompts.iter().all(|(_, p)| p.purpose == Purpose::Events));

    let total = prompts.len();
    let limit = options.max_parallel.unwrap_or(gateway.config().max_parallel).max(1);
    // Boxed so the future stays `Send` for any caller lifetime.
    let requests: Vec<BoxFuture<'_, (usize, Result<Validated, GatewayError>)>> = prompts
        .iter()
        .map(|(index, prompt)| async move { (*index, request(gateway, prompt).await) }.boxed())
        .collect();
    let mut in_flight = stream::iter(requests).buffer_unordered(limit);

    let mut done: BTreeMap<usize, Vec<RawAction>> = BTreeMap::new();
    let mut warnings: BTreeMap<usize, Vec<String>> = BTreeMap::new();
    while let Some((index, result)) = in_flight.next().await {
        report.requests += 1;
        match result {
            Ok(validated) => {
                let Records::Actions(actions) = validated.records else {
                    unreachable!("events purpose yields actions")
                };
                warnings.insert(
                    index,
                    validated.warnings.into_iter().map(|w| format!("sentence {index}: {w}")).collect(),
                );
                done.insert(index, actions);
                if let Some(progress) = &options.progress {
                    progress(SentenceProgress { sentence_index: index, completed: done.len(), total });
                }
            }
            Err(source) => {
                return Err(ExtractError::Failed {
                    stage: Stage::Events,
                    completed: done.keys().copied().collect(),
                    total,
                    source,
                });
            }
        }
    }
    report.warnings.extend(warnings.into_values().flatten());
    Ok(done)
}
