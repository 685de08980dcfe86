//! Prompt templates, compiled prompts and their response schemas.

mod schema;
pub(crate) mod template;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use schema::{SchemaError, Shape};
pub use template::{Origin, Template, TemplateError, TEMPLATES};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Purpose {
    Entities,
    Locations,
    Events,
    Edit,
}

impl Purpose {
    pub fn as_str(self) -> &'static str {
        match self {
            Purpose::Entities => "entities",
            Purpose::Locations => "locations",
            Purpose::Events => "events",
            Purpose::Edit => "edit",
        }
    }

    pub fn shape(self) -> Shape {
        match self {
            Purpose::Entities => Shape::entities(),
            Purpose::Locations => Shape::locations(),
            Purpose::Events => Shape::actions(),
            Purpose::Edit => Shape::edit(),
        }
    }
}

impl fmt::Display for Purpose {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A fully substituted prompt with the schema its response must follow.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PromptSpec {
    pub purpose: Purpose,
    pub text: String,
    pub response_schema: serde_json::Value,
}

impl PromptSpec {
    pub fn new(purpose: Purpose, text: String) -> Self {
        Self {
            purpose,
            text,
            response_schema: purpose.shape().json_schema(),
        }
    }

    /// Stable digest identifying this request in fixtures and logs.
    pub fn digest(&self) -> String {
        crate::model::content_hash(&format!("{}\n{}", self.purpose, self.text))
    }
}
