use serde_json::{json, Map, Value};

/// The structure a response payload must have. Objects are closed: every
/// field is required and no other field is allowed.
#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    String,
    Number,
    Array(Box<Shape>),
    Object(Vec<(&'static str, Shape)>),
}

#[derive(Debug, Clone, thiserror::Error, PartialEq, Eq)]
#[error("schema mismatch at `{path}`: {message}")]
pub struct SchemaError {
    pub path: String,
    pub message: String,
}

impl Shape {
    fn list_of(fields: Vec<(&'static str, Shape)>) -> Shape {
        Shape::Array(Box::new(Shape::Object(fields)))
    }

    pub fn entities() -> Shape {
        Shape::Object(vec![(
            "entities",
            Shape::list_of(vec![
                ("name", Shape::String),
                ("emoji", Shape::String),
                (
                    "properties",
                    Shape::list_of(vec![("name", Shape::String), ("value", Shape::Number)]),
                ),
            ]),
        )])
    }

    pub fn locations() -> Shape {
        Shape::Object(vec![(
            "locations",
            Shape::list_of(vec![("name", Shape::String), ("emoji", Shape::String)]),
        )])
    }

    pub fn actions() -> Shape {
        Shape::Object(vec![(
            "actions",
            Shape::list_of(vec![
                ("name", Shape::String),
                ("source", Shape::String),
                ("target", Shape::String),
                ("location", Shape::String),
            ]),
        )])
    }

    pub fn edit() -> Shape {
        Shape::Object(vec![("text", Shape::String)])
    }

    /// JSON Schema in the closed-object form structured-output providers accept.
    pub fn json_schema(&self) -> Value {
        match self {
            Shape::String => json!({ "type": "string" }),
            Shape::Number => json!({ "type": "number" }),
            Shape::Array(item) => json!({ "type": "array", "items": item.json_schema() }),
            Shape::Object(fields) => {
                let properties: Map<String, Value> = fields
                    .iter()
                    .map(|(name, shape)| (name.to_string(), shape.json_schema()))
                    .collect();
                let required: Vec<&str> = fields.iter().map(|(name, _)| *name).collect();
                json!({
                    "type": "object",
                    "properties": properties,
                    "required": required,
                    "additionalProperties": false,
                })
            }
        }
    }

    pub fn validate(&self, value: &Value) -> Result<(), SchemaError> {
        self.validate_at(value, "$")
    }

    fn validate_at(&self, value: &Value, path: &str) -> Result<(), SchemaError> {
        let mismatch = |message: String| SchemaError {
            path: path.trim_start_matches("$.").to_string(),
            message,
        };
        match (self, value) {
            (Shape::String, Value::String(_)) | (Shape::Number, Value::Number(_)) => Ok(()),
            (Shape::Array(item), Value::Array(values)) => values
                .iter()
                .enumerate()
                .try_for_each(|(i, v)| item.validate_at(v, &format!("{path}[{i}]"))),
            (Shape::Object(fields), Value::Object(map)) => {
                for key in map.keys() {
                    if !fields.iter().any(|(name, _)| name == key) {
                        return Err(SchemaError {
                            path: format!("{path}.{key}").trim_start_matches("$.").to_string(),
                            message: "unknown field".into(),
                        });
                    }
                }
                for (name, shape) in fields {
                    let field_path = format!("{path}.{name}");
                    match map.get(*name) {
                        Some(v) => shape.validate_at(v, &field_path)?,
                        None => {
                            return Err(SchemaError {
                                path: field_path.trim_start_matches("$.").to_string(),
                                message: "missing field".into(),
                            })
                        }
                    }
                }
                Ok(())
            }
            (expected, found) => Err(mismatch(format!(
                "expected {}, found {}",
                expected.kind(),
                kind_of(found)
            ))),
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            Shape::String => "string",
            Shape::Number => "number",
            Shape::Array(_) => "array",
            Shape::Object(_) => "object",
        }
    }
}

fn kind_of(value: &Value) -> &'static str {
    match value {
        Value::Null => "null",
        Value::Bool(_) => "boolean",
        Value::Number(_) => "number",
        Value::String(_) => "string",
        Value::Array(_) => "array",
        Value::Object(_) => "object",
    }
}
