//! Story text → story model: segmentation, the extraction prompts, payload
//! validation, and the full and incremental extraction runs.

mod assemble;
mod cache;
mod payload;
mod pipeline;
mod prompts;
mod segment;

pub use cache::{CachedPass, ExtractionCache};
pub use payload::{
    validate_payload, ExtractedEntity, ExtractedLocation, RawAction, Records, Validated,
    PLACEHOLDER_EMOJI,
};
pub use pipeline::{
    run_full_extraction, run_incremental_extraction, ExtractError, Extraction, ExtractionOptions,
    ExtractionReport, ProgressFn, SentenceProgress, Stage,
};
pub use prompts::{build_entities_prompt, build_events_prompt, build_locations_prompt};
pub use segment::segment_sentences;

pub(crate) use assemble::assemble;
