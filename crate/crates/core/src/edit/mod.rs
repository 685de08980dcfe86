//! Edit intents from the visual views, compiled to rewrite prompts and
//! executed into tracked changes.

mod compile;
mod intent;
mod scope;

use serde::{Deserialize, Serialize};

pub use compile::{compile, scope_prompt, serialize_event_order, Compiled, CompileError, TEXT_TO_REWRITE};
pub use intent::{EditIntent, ModelPatch};
pub use scope::{EditScope, SnappedScope};

use crate::extract::{validate_payload, Records};
use crate::gateway::{Gateway, GatewayError};
use crate::model::StoryModel;
use crate::revision::{diff, ChangeSet};

#[derive(Debug, thiserror::Error)]
pub enum EditError {
    #[error(transparent)]
    Compile(#[from] CompileError),
    /// The provider call failed; nothing was changed.
    #[error("edit failed: {0}")]
    Failed(#[source] GatewayError),
}

impl EditError {
    pub fn is_user_error(&self) -> bool {
        matches!(self, EditError::Compile(_))
    }
}

/// The result of one edit: the proposed text and its diff against the
/// current text, plus what has to happen to the model once it is accepted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct EditOutcome {
    pub new_text: String,
    pub change_set: ChangeSet,
    /// The text changed, so the model needs re-extraction.
    pub model_stale: bool,
    /// Re-extract the whole story rather than only changed sentences.
    #[serde(default)]
    pub full_refresh: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub patch: Option<ModelPatch>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scope: Option<SnappedScope>,
}

/// Compiles and runs one intent with at most one provider call. Any failure
/// leaves the caller's state as it was; nothing is applied here.
pub async fn execute(
    intent: &EditIntent,
    scope: Option<&EditScope>,
    text: &str,
    model: &StoryModel,
    gateway: &Gateway,
) -> Result<EditOutcome, EditError> {
    let compiled = compile(intent, scope, text, model)?;
    let full_refresh = matches!(intent, EditIntent::ReorderEvents { .. });
    let Some(prompt) = compiled.prompt else {
        return Ok(EditOutcome {
            new_text: text.to_string(),
            change_set: diff(text, text),
            model_stale: false,
            full_refresh,
            patch: compiled.patch,
            scope: compiled.scope,
        });
    };

    let raw = gateway.complete_structured(&prompt).await.map_err(EditError::Failed)?;
    let validated = validate_payload(&raw, prompt.purpose)
        .map_err(|e| EditError::Failed(GatewayError::SchemaMismatch(e)))?;
    let Records::Edit { text: rewritten } = validated.records else {
        unreachable!("edit prompts yield edit records")
    };
    let new_text = match &compiled.scope {
        // Passages are whole sentences without surrounding whitespace.
        Some(scope) => scope.splice(text, rewritten.trim()),
        None => rewritten,
    };
    let change_set = diff(text, &new_text);
    Ok(EditOutcome {
        model_stale: new_text != text,
        new_text,
        change_set,
        full_refresh,
        patch: compiled.patch,
        scope: compiled.scope,
    })
}
