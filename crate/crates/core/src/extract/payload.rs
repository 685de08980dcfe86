use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::model::{normalize_name, Trait, UNKNOWN_LOCATION};
use crate::prompt::{Purpose, SchemaError};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtractedEntity {
    pub name: String,
    pub emoji: String,
    pub traits: Vec<Trait>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtractedLocation {
    pub name: String,
    pub emoji: String,
}

/// An action exactly as the provider named it, before name resolution.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawAction {
    pub name: String,
    pub source: String,
    pub target: String,
    pub location: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Records {
    Entities(Vec<ExtractedEntity>),
    Locations(Vec<ExtractedLocation>),
    Actions(Vec<RawAction>),
    Edit { text: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Validated {
    pub records: Records,
    pub warnings: Vec<String>,
}

pub const PLACEHOLDER_EMOJI: &str = "❔";

/// Strictly validates a raw response against the schema for `purpose` and
/// converts it to typed records. Trait values are rounded and clamped into
/// 1..=10, names are trimmed, and unusable records are dropped; each such
/// repair is reported as a warning.
pub fn validate_payload(raw: &str, purpose: Purpose) -> Result<Validated, SchemaError> {
    let value: Value = serde_json::from_str(raw).map_err(|e| SchemaError {
        path: "$".into(),
        message: format!("payload is not JSON: {e}"),
    })?;
    purpose.shape().validate(&value)?;
    let mut warnings = Vec::new();
    let str_at = |v: &Value, key: &str| v[key].as_str().unwrap_or_default().trim().to_string();

    let records = match purpose {
        Purpose::Entities => {
            let mut out: Vec<ExtractedEntity> = Vec::new();
            for (i, item) in array(&value, "entities").iter().enumerate() {
                let name = str_at(item, "name");
                if name.is_empty() {
                    warnings.push(format!("entities[{i}]: empty name, dropped"));
                    continue;
                }
                if out.iter().any(|e| normalize_name(&e.name) == normalize_name(&name)) {
                    warnings.push(format!("entities[{i}]: duplicate name `{name}`, dropped"));
                    continue;
                }
                let mut emoji = str_at(item, "emoji");
                if emoji.is_empty() {
                    warnings.push(format!("entities[{i}]: empty emoji, placeholder used"));
                    emoji = PLACEHOLDER_EMOJI.into();
                }
                let mut traits = Vec::new();
                for (j, prop) in array(item, "properties").iter().enumerate() {
                    let trait_name = str_at(prop, "name");
                    if trait_name.is_empty() {
                        warnings.push(format!("entities[{i}].properties[{j}]: empty name, dropped"));
                        continue;
                    }
                    let raw_value = prop["value"].as_f64().unwrap_or(1.0);
                    let clamped = raw_value.round().clamp(1.0, 10.0);
                    if clamped != raw_value {
                        warnings.push(format!(
                            "entities[{i}].properties[{j}].value: {raw_value} clamped to {clamped}"
                        ));
                    }
                    traits.push(Trait {
                        name: trait_name,
                        value: clamped as u8,
                    });
                }
                out.push(ExtractedEntity { name, emoji, traits });
            }
            Records::Entities(out)
        }
        Purpose::Locations => {
            let mut out: Vec<ExtractedLocation> = Vec::new();
            for (i, item) in array(&value, "locations").iter().enumerate() {
                let name = str_at(item, "name");
                if name.is_empty() || normalize_name(&name) == UNKNOWN_LOCATION {
                    warnings.push(format!("locations[{i}]: unusable name `{name}`, dropped"));
                    continue;
                }
                if out.iter().any(|l| normalize_name(&l.name) == normalize_name(&name)) {
                    warnings.push(format!("locations[{i}]: duplicate name `{name}`, dropped"));
                    continue;
                }
                let mut emoji = str_at(item, "emoji");
                if emoji.is_empty() {
                    warnings.push(format!("locations[{i}]: empty emoji, placeholder used"));
                    emoji = PLACEHOLDER_EMOJI.into();
                }
                out.push(ExtractedLocation { name, emoji });
            }
            Records::Locations(out)
        }
        Purpose::Events => {
            let mut out = Vec::new();
            for (i, item) in array(&value, "actions").iter().enumerate() {
                let mut action = RawAction {
                    name: str_at(item, "name"),
                    source: str_at(item, "source"),
                    target: str_at(item, "target"),
                    location: str_at(item, "location"),
                };
                if action.name.is_empty() || action.source.is_empty() {
                    warnings.push(format!("actions[{i}]: missing name or source, dropped"));
                    continue;
                }
                if action.target.is_empty() {
                    warnings.push(format!("actions[{i}]: empty target, treated as self-action"));
                    action.target = action.source.clone();
                }
                out.push(action);
            }
            Records::Actions(out)
        }
        Purpose::Edit => Records::Edit {
            text: value["text"].as_str().unwrap_or_default().to_string(),
        },
    };
    Ok(Validated { records, warnings })
}

fn array<'v>(value: &'v Value, key: &str) -> &'v [Value] {
    value[key].as_array().map(Vec::as_slice).unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn well_formed_entities() {
        let raw = json!({ "entities": [
            { "name": " Alice ", "emoji": "👧", "properties": [{ "name": "curious", "value": 8 }] },
            { "name": "book", "emoji": "📖", "properties": [] }
        ]})
        .to_string();
        let out = validate_payload(&raw, Purpose::Entities).unwrap();
        assert!(out.warnings.is_empty());
        let Records::Entities(entities) = out.records else { panic!() };
        assert_eq!(entities[0].name, "Alice");
        assert_eq!(entities[0].traits, vec![Trait { name: "curious".into(), value: 8 }]);
        assert_eq!(entities[1].name, "book");
    }

    #[test]
    fn trait_values_are_clamped_with_warning() {
        let raw = json!({ "entities": [
            { "name": "Alice", "emoji": "👧", "properties": [
                { "name": "curious", "value": 12 }, { "name": "tired", "value": 0 }, { "name": "calm", "value": 4.6 }
            ] }
        ]})
        .to_string();
        let out = validate_payload(&raw, Purpose::Entities).unwrap();
        let Records::Entities(entities) = out.records else { panic!() };
        let values: Vec<u8> = entities[0].traits.iter().map(|t| t.value).collect();
        assert_eq!(values, [10, 1, 5]);
        assert_eq!(out.warnings.len(), 3);
        assert!(out.warnings[0].contains("12 clamped to 10"));
    }

    #[test]
    fn missing_target_is_a_schema_mismatch() {
        let raw = json!({ "actions": [{ "name": "runs", "source": "Alice", "location": "bank" }] }).to_string();
        let err = validate_payload(&raw, Purpose::Events).unwrap_err();
        assert_eq!(err.path, "actions[0].target");
    }

    #[test]
    fn action_names_are_trimmed() {
        let raw = json!({ "actions": [{ "name": "  peeps into ", "source": "Alice", "target": "book", "location": "unknown" }] })
            .to_string();
        let Records::Actions(actions) = validate_payload(&raw, Purpose::Events).unwrap().records else { panic!() };
        assert_eq!(actions[0].name, "peeps into");
    }

    #[test]
    fn unknown_fields_and_bad_json_are_rejected() {
        let err = validate_payload(r#"{"text":"x","extra":1}"#, Purpose::Edit).unwrap_err();
        assert_eq!(err.path, "extra");
        let err = validate_payload("not json", Purpose::Edit).unwrap_err();
        assert_eq!(err.path, "$");
    }

    #[test]
    fn reserved_and_duplicate_locations_are_dropped() {
        let raw = json!({ "locations": [
            { "name": "bank", "emoji": "🏞" }, { "name": "Bank", "emoji": "🏦" }, { "name": "unknown", "emoji": "?" }
        ]})
        .to_string();
        let out = validate_payload(&raw, Purpose::Locations).unwrap();
        let Records::Locations(locations) = out.records else { panic!() };
        assert_eq!(locations.len(), 1);
        assert_eq!(out.warnings.len(), 2);
    }
}
