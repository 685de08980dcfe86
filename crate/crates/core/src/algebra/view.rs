use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::kind::ElementKind;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Node {
    pub key: String,
    pub kind: ElementKind,
    pub ref_id: String,
    pub label: String,
    /// Empty for kinds without an emoji, such as events.
    pub emoji: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lane_key: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub anchor_key: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<usize>,
}

/// An edge hidden inside a grouped edge.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct EdgeMember {
    pub key: String,
    pub src_key: String,
    pub dst_key: String,
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub event_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Edge {
    pub key: String,
    pub src_key: String,
    pub dst_key: String,
    pub label: String,
    /// The action event behind the edge; absent for edges joining elements
    /// that merely share a non-event element.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub event_id: Option<String>,
    /// Narrated index of the event behind the edge.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<usize>,
    /// Underlying edges this one stands for; 1 unless grouped.
    #[serde(default = "one")]
    pub count: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub grouped: Vec<EdgeMember>,
}

fn one() -> usize {
    1
}

impl Edge {
    pub(crate) fn member(&self) -> EdgeMember {
        EdgeMember {
            key: self.key.clone(),
            src_key: self.src_key.clone(),
            dst_key: self.dst_key.clone(),
            label: self.label.clone(),
            event_id: self.event_id.clone(),
            order: self.order,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Anchor {
    pub key: String,
    pub kind: ElementKind,
    pub ref_id: String,
    pub label: String,
    pub emoji: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Lane {
    pub key: String,
    pub kind: ElementKind,
    pub ref_id: String,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Annotation {
    pub kind: ElementKind,
    pub ref_id: String,
    pub label: String,
}

/// A renderable construct: nodes with optional lane, anchor and order, the
/// edges between them, and per-node annotation lists. Coordinates are left
/// to the renderer.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ViewModel {
    pub nodes: Vec<Node>,
    pub edges: Vec<Edge>,
    pub anchors: Vec<Anchor>,
    pub lanes: Vec<Lane>,
    pub annotations: BTreeMap<String, Vec<Annotation>>,
}

impl ViewModel {
    pub fn node(&self, key: &str) -> Option<&Node> {
        self.nodes.iter().find(|n| n.key == key)
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty() && self.edges.is_empty() && self.anchors.is_empty() && self.lanes.is_empty()
    }

    /// Referential problems, empty when the view is consistent.
    pub fn check(&self) -> Vec<String> {
        let mut problems = Vec::new();
        let mut keys = std::collections::HashSet::new();
        for n in &self.nodes {
            if !keys.insert(n.key.as_str()) {
                problems.push(format!("duplicate node key {}", n.key));
            }
            if let Some(lane) = &n.lane_key {
                if !self.lanes.iter().any(|l| &l.key == lane) {
                    problems.push(format!("node {} names missing lane {lane}", n.key));
                }
            }
            if let Some(anchor) = &n.anchor_key {
                if !self.anchors.iter().any(|a| &a.key == anchor) {
                    problems.push(format!("node {} names missing anchor {anchor}", n.key));
                }
            }
        }
        for e in &self.edges {
            for end in [&e.src_key, &e.dst_key] {
                if !keys.contains(end.as_str()) {
                    problems.push(format!("edge {} names missing node {end}", e.key));
                }
            }
        }
        for key in self.annotations.keys() {
            if !keys.contains(key.as_str()) {
                problems.push(format!("annotations for missing node {key}"));
            }
        }
        problems
    }
}
