use std::collections::HashSet;

/// Where a template's wording comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Origin {
    /// Published wording, reproduced byte for byte.
    Published,
    /// Written for this project where no published wording exists.
    Original,
}

#[derive(Debug, Clone, Copy)]
pub struct Template {
    pub name: &'static str,
    pub version: u32,
    pub origin: Origin,
    pub body: &'static str,
}

macro_rules! template {
    ($name:literal, $origin:ident) => {
        Template {
            name: $name,
            version: 1,
            origin: Origin::$origin,
            body: include_str!(concat!("../../templates/", $name, ".txt")),
        }
    };
}

pub const EXTRACT_ENTITIES: Template = template!("extract_entities", Published);
pub const EXTRACT_LOCATIONS: Template = template!("extract_locations", Published);
pub const EXTRACT_EVENTS: Template = template!("extract_events", Published);
pub const EDIT_REORDER_EVENTS: Template = template!("edit_reorder_events", Published);
pub const EDIT_ADD_ACTION: Template = template!("edit_add_action", Published);
pub const EDIT_CHANGE_ACTION: Template = template!("edit_change_action", Published);
pub const EDIT_REMOVE_ACTION: Template = template!("edit_remove_action", Published);
pub const EDIT_REMOVE_ENTITY: Template = template!("edit_remove_entity", Published);
pub const EDIT_MOVE_ENTITY: Template = template!("edit_move_entity", Published);
pub const EDIT_SET_TRAIT: Template = template!("edit_set_trait", Original);
pub const EDIT_REWRITE_FROM_VISUALS: Template = template!("edit_rewrite_from_visuals", Original);
pub const SCOPE_STORY: Template = template!("scope_story", Original);
pub const SCOPE_INSTRUCTION: Template = template!("scope_instruction", Original);

/// Every template shipped with the engine.
pub const TEMPLATES: &[Template] = &[
    EXTRACT_ENTITIES,
    EXTRACT_LOCATIONS,
    EXTRACT_EVENTS,
    EDIT_REORDER_EVENTS,
    EDIT_ADD_ACTION,
    EDIT_CHANGE_ACTION,
    EDIT_REMOVE_ACTION,
    EDIT_REMOVE_ENTITY,
    EDIT_MOVE_ENTITY,
    EDIT_SET_TRAIT,
    EDIT_REWRITE_FROM_VISUALS,
    SCOPE_STORY,
    SCOPE_INSTRUCTION,
];

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum TemplateError {
    #[error("template `{template}` has no binding for <{placeholder}>")]
    Unbound {
        template: &'static str,
        placeholder: String,
    },
    #[error("template `{template}` has no placeholder <{placeholder}>")]
    Unused {
        template: &'static str,
        placeholder: String,
    },
}

/// A placeholder is `<` + uppercase words separated by single spaces + `>`.
fn placeholder_at(body: &str, at: usize) -> Option<&str> {
    let rest = body[at..].strip_prefix('<')?;
    let close = rest.find('>')?;
    let name = &rest[..close];
    let valid = !name.is_empty()
        && !name.starts_with(' ')
        && !name.ends_with(' ')
        && !name.contains("  ")
        && name.chars().all(|c| c.is_ascii_uppercase() || c == ' ');
    valid.then_some(name)
}

impl Template {
    pub fn placeholders(&self) -> Vec<&'static str> {
        let mut out: Vec<&'static str> = Vec::new();
        for (at, _) in self.body.match_indices('<') {
            if let Some(name) = placeholder_at(self.body, at) {
                if !out.contains(&name) {
                    out.push(name);
                }
            }
        }
        out
    }

    /// Substitutes every placeholder in one pass over the template body, so
    /// substituted values are never rescanned. Every placeholder must be
    /// bound and every binding used.
    pub fn render(&self, bindings: &[(&str, &str)]) -> Result<String, TemplateError> {
        let mut out = String::with_capacity(self.body.len());
        let mut used = HashSet::new();
        let mut cursor = 0;
        for (at, _) in self.body.match_indices('<') {
            if at < cursor {
                continue;
            }
            let Some(name) = placeholder_at(self.body, at) else {
                continue;
            };
            let value = bindings
                .iter()
                .find(|(key, _)| *key == name)
                .map(|(_, value)| *value)
                .ok_or_else(|| TemplateError::Unbound {
                    template: self.name,
                    placeholder: name.to_string(),
                })?;
            used.insert(name);
            out.push_str(&self.body[cursor..at]);
            out.push_str(value);
            cursor = at + name.len() + 2;
        }
        out.push_str(&self.body[cursor..]);
        if let Some((key, _)) = bindings.iter().find(|(key, _)| !used.contains(key)) {
            return Err(TemplateError::Unused {
                template: self.name,
                placeholder: key.to_string(),
            });
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn placeholders_are_found() {
        assert_eq!(
            EXTRACT_EVENTS.placeholders(),
            ["TEXT BEFORE", "SENTENCE", "ENTITIES", "LOCATIONS"]
        );
        assert_eq!(
            EDIT_MOVE_ENTITY.placeholders(),
            ["STORY TEXT", "ENTITY NAME", "CURRENT LOCATION", "NEW LOCATION"]
        );
    }

    #[test]
    fn substituted_values_are_not_rescanned() {
        let out = EDIT_REMOVE_ENTITY
            .render(&[("STORY TEXT", "A <ENTITY NAME> appears."), ("ENTITY NAME", "cat")])
            .unwrap();
        assert_eq!(out, "A <ENTITY NAME> appears.\nRewrite the story so that there is no cat");
    }

    #[test]
    fn unbound_and_unused_bindings_fail() {
        assert!(matches!(
            EDIT_REMOVE_ENTITY.render(&[("STORY TEXT", "x")]),
            Err(TemplateError::Unbound { .. })
        ));
        assert!(matches!(
            EDIT_REMOVE_ENTITY.render(&[("STORY TEXT", "x"), ("ENTITY NAME", "y"), ("OTHER", "z")]),
            Err(TemplateError::Unused { .. })
        ));
    }

    #[test]
    fn every_template_renders_when_fully_bound() {
        for template in TEMPLATES {
            let names = template.placeholders();
            let bindings: Vec<(&str, &str)> = names.iter().map(|n| (*n, "v")).collect();
            let out = template.render(&bindings).unwrap();
            assert!(Template { body: Box::leak(out.into_boxed_str()), ..*template }
                .placeholders()
                .is_empty());
        }
    }

    #[test]
    fn bodies_have_no_trailing_whitespace() {
        for template in TEMPLATES {
            for line in template.body.lines() {
                assert_eq!(line, line.trim_end(), "{}", template.name);
            }
            assert!(!template.body.ends_with('\n'), "{}", template.name);
        }
    }
}
