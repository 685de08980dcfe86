use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::expr::{parse_expr, ConstructExpr, ExprError, Operator};
use super::kind::ElementKind;
use super::view::{Anchor, Annotation, Edge, Lane, Node, ViewModel};
use crate::model::StoryModel;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AlgebraError {
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error("{0} elements are only available from manual annotations, and this model has none")]
    Unavailable(ElementKind),
}

/// One story element, with the events that link it to every other element.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Element {
    pub kind: ElementKind,
    pub ref_id: String,
    pub label: String,
    pub emoji: String,
    /// Position in sequence, for time and temporality.
    pub order: Option<usize>,
    pub events: BTreeSet<String>,
}

/// The elements of one kind, in a stable order: model order for entities
/// and locations, chronological for time, narrated for events and
/// temporality, annotation order for the annotation-backed kinds.
pub fn base_elements(model: &StoryModel, kind: ElementKind) -> Result<Vec<Element>, AlgebraError> {
    let single = |id: &str| BTreeSet::from([id.to_string()]);
    let elements = match kind {
        ElementKind::Character => model
            .entities
            .iter()
            .map(|e| Element {
                kind,
                ref_id: e.id.clone(),
                label: e.name.clone(),
                emoji: e.emoji.clone(),
                order: None,
                events: model.events.iter().filter(|ev| ev.involves(&e.id)).map(|ev| ev.id.clone()).collect(),
            })
            .collect(),
        ElementKind::Location => model
            .locations
            .iter()
            .map(|l| Element {
                kind,
                ref_id: l.id.clone(),
                label: l.name.clone(),
                emoji: l.emoji.clone(),
                order: None,
                events: model
                    .events
                    .iter()
                    .filter(|ev| ev.location.as_deref() == Some(l.id.as_str()))
                    .map(|ev| ev.id.clone())
                    .collect(),
            })
            .collect(),
        ElementKind::Event | ElementKind::Temporality => model
            .narrated_events()
            .into_iter()
            .map(|ev| Element {
                kind,
                ref_id: ev.id.clone(),
                label: ev.name.clone(),
                emoji: String::new(),
                order: (kind == ElementKind::Temporality).then_some(ev.narrated_index),
                events: single(&ev.id),
            })
            .collect(),
        ElementKind::Time => model
            .chronological_events()
            .into_iter()
            .enumerate()
            .map(|(i, ev)| Element {
                kind,
                ref_id: ev.id.clone(),
                label: ev.name.clone(),
                emoji: String::new(),
                order: Some(i),
                events: single(&ev.id),
            })
            .collect(),
        ElementKind::Actor => {
            let actors = &model.annotations.actors;
            if actors.is_empty() {
                return Err(AlgebraError::Unavailable(kind));
            }
            actors
                .iter()
                .map(|a| Element {
                    kind,
                    ref_id: a.id.clone(),
                    label: a.name.clone(),
                    emoji: String::new(),
                    order: None,
                    events: model
                        .events
                        .iter()
                        .filter(|ev| a.entity_ids.iter().any(|id| ev.involves(id)))
                        .map(|ev| ev.id.clone())
                        .collect(),
                })
                .collect()
        }
        ElementKind::Space => {
            let spaces = &model.annotations.spaces;
            if spaces.is_empty() {
                return Err(AlgebraError::Unavailable(kind));
            }
            spaces
                .iter()
                .map(|s| Element {
                    kind,
                    ref_id: s.id.clone(),
                    label: s.name.clone(),
                    emoji: String::new(),
                    order: None,
                    events: model
                        .events
                        .iter()
                        .filter(|ev| ev.location.as_ref().is_some_and(|l| s.location_ids.contains(l)))
                        .map(|ev| ev.id.clone())
                        .collect(),
                })
                .collect()
        }
        ElementKind::Focalization => {
            let views = &model.annotations.focalizations;
            if views.is_empty() {
                return Err(AlgebraError::Unavailable(kind));
            }
            views
                .iter()
                .map(|f| Element {
                    kind,
                    ref_id: f.id.clone(),
                    label: f.name.clone(),
                    emoji: String::new(),
                    order: None,
                    events: f.event_ids.iter().filter(|id| model.event(id).is_some()).cloned().collect(),
                })
                .collect()
        }
    };
    Ok(elements)
}

/// A view under construction. Every node keeps the set of events it stands
/// for; operators join through these sets, and replicas narrow them.
#[derive(Debug, Clone, Default)]
pub struct Construct {
    view: ViewModel,
    scopes: BTreeMap<String, BTreeSet<String>>,
}

impl Construct {
    pub fn from_elements(elements: &[Element]) -> Self {
        let mut construct = Construct::default();
        for el in elements {
            let key = format!("{}:{}", el.kind, el.ref_id);
            construct.scopes.insert(key.clone(), el.events.clone());
            construct.view.nodes.push(Node {
                key,
                kind: el.kind,
                ref_id: el.ref_id.clone(),
                label: el.label.clone(),
                emoji: el.emoji.clone(),
                lane_key: None,
                anchor_key: None,
                order: el.order,
            });
        }
        construct
    }

    pub fn view(&self) -> &ViewModel {
        &self.view
    }

    pub fn into_view(self) -> ViewModel {
        self.view
    }

    /// Events the node with `key` stands for.
    pub fn scope(&self, key: &str) -> Option<&BTreeSet<String>> {
        self.scopes.get(key)
    }

    fn replicate(&mut self, replicas: Vec<(Node, BTreeSet<String>)>, origin: HashMap<String, String>) {
        let mut by_origin: HashMap<&str, Vec<usize>> = HashMap::new();
        for (i, (node, _)) in replicas.iter().enumerate() {
            by_origin.entry(origin[&node.key].as_str()).or_default().push(i);
        }
        let pick = |old: &str, event: Option<&str>| -> Option<String> {
            by_origin.get(old)?.iter().find_map(|&i| {
                let (node, scope) = &replicas[i];
                match event {
                    Some(e) if !scope.contains(e) => None,
                    _ => Some(node.key.clone()),
                }
            })
        };

        let mut edges = Vec::new();
        for edge in std::mem::take(&mut self.view.edges) {
            let event = edge.event_id.as_deref();
            if let (Some(src), Some(dst)) = (pick(&edge.src_key, event), pick(&edge.dst_key, event)) {
                edges.push(Edge { src_key: src, dst_key: dst, ..edge });
            }
        }

        let old_annotations = std::mem::take(&mut self.view.annotations);
        for (node, _) in &replicas {
            if let Some(list) = old_annotations.get(&origin[&node.key]) {
                self.view.annotations.insert(node.key.clone(), list.clone());
            }
        }

        self.scopes.clear();
        self.view.nodes.clear();
        for (node, scope) in replicas {
            self.scopes.insert(node.key.clone(), scope);
            self.view.nodes.push(node);
        }
        self.view.edges = edges;
    }

    fn unique_edge_key(&self, base: String) -> String {
        if !self.view.edges.iter().any(|e| e.key == base) {
            return base;
        }
        (2..)
            .map(|n| format!("{base}~{n}"))
            .find(|k| !self.view.edges.iter().any(|e| &e.key == k))
            .expect("unbounded")
    }
}

struct Narration(HashMap<String, usize>);

impl Narration {
    fn of(model: &StoryModel) -> Self {
        Narration(model.events.iter().map(|e| (e.id.clone(), e.narrated_index)).collect())
    }

    /// Earliest narrated index shared by two event sets.
    fn first_shared(&self, a: &BTreeSet<String>, b: &BTreeSet<String>) -> Option<usize> {
        a.intersection(b).filter_map(|id| self.0.get(id).copied()).min()
    }
}

fn lane_key(el: &Element) -> String {
    format!("lane:{}:{}", el.kind, el.ref_id)
}

fn anchor_key(el: &Element) -> String {
    format!("anchor:{}:{}", el.kind, el.ref_id)
}

/// Adds one edge per event whose source and target are both represented.
/// With a non-event operand, nodes sharing an element are chained in
/// narrated order instead.
pub fn apply_connect(
    mut construct: Construct,
    kind: ElementKind,
    model: &StoryModel,
) -> Result<Construct, AlgebraError> {
    let ys = base_elements(model, kind)?;
    if kind.is_event_like() {
        for y in &ys {
            let Some(event) = model.event(&y.ref_id) else { continue };
            let src = endpoint(&construct, model, &event.id, &event.source);
            let dst = endpoint(&construct, model, &event.id, &event.target);
            if let (Some(src), Some(dst)) = (src, dst) {
                let key = construct.unique_edge_key(format!("edge:{}", event.id));
                construct.view.edges.push(Edge {
                    key,
                    src_key: src,
                    dst_key: dst,
                    label: event.name.clone(),
                    event_id: Some(event.id.clone()),
                    order: Some(event.narrated_index),
                    count: 1,
                    grouped: Vec::new(),
                });
            }
        }
        return Ok(construct);
    }

    let narration = Narration::of(model);
    for y in &ys {
        let mut linked: Vec<(usize, usize, String)> = construct
            .view
            .nodes
            .iter()
            .enumerate()
            .filter_map(|(i, n)| {
                let first = narration.first_shared(&construct.scopes[&n.key], &y.events)?;
                Some((first, i, n.key.clone()))
            })
            .collect();
        linked.sort();
        for (n, pair) in linked.windows(2).enumerate() {
            let key = construct.unique_edge_key(format!("edge:{}:{}:{n}", y.kind, y.ref_id));
            construct.view.edges.push(Edge {
                key,
                src_key: pair[0].2.clone(),
                dst_key: pair[1].2.clone(),
                label: y.label.clone(),
                event_id: None,
                order: Some(pair[1].0),
                count: 1,
                grouped: Vec::new(),
            });
        }
    }
    Ok(construct)
}

/// The first node that stands for `entity` within event `event_id`: the
/// entity's own node, an event node in the entity's lane, or a node for an
/// actor role the entity plays.
fn endpoint(construct: &Construct, model: &StoryModel, event_id: &str, entity: &str) -> Option<String> {
    let plays = |actor: &str| {
        model
            .annotations
            .actors
            .iter()
            .any(|a| a.id == actor && a.entity_ids.iter().any(|id| id == entity))
    };
    let lane_binds = |lane: &str| {
        if let Some(id) = lane.strip_prefix("lane:character:") {
            id == entity
        } else if let Some(id) = lane.strip_prefix("lane:actor:") {
            plays(id)
        } else {
            false
        }
    };
    let is_entity = |n: &Node| match n.kind {
        ElementKind::Character => n.ref_id == entity,
        ElementKind::Actor => plays(&n.ref_id),
        _ => false,
    };
    let in_scope = construct.view.nodes.iter().find(|n| {
        construct.scopes[&n.key].contains(event_id)
            && (is_entity(n) || n.lane_key.as_deref().is_some_and(lane_binds))
    });
    // An entity anchored only where its other events happen (say, this one
    // has no known location) is still present: use its first replica.
    in_scope
        .or_else(|| construct.view.nodes.iter().find(|n| is_entity(n)))
        .map(|n| n.key.clone())
}

/// Replicates every node once per element of `kind` it is linked to.
/// Categorical operands give each replica a lane; time and temporality give
/// it an order. Nodes linked to nothing are dropped.
pub fn apply_unfold(
    mut construct: Construct,
    kind: ElementKind,
    model: &StoryModel,
) -> Result<Construct, AlgebraError> {
    let ys = base_elements(model, kind)?;
    let mut replicas = Vec::new();
    let mut origin = HashMap::new();
    for node in &construct.view.nodes {
        let scope = &construct.scopes[&node.key];
        for y in &ys {
            let shared: BTreeSet<String> = scope.intersection(&y.events).cloned().collect();
            if shared.is_empty() {
                continue;
            }
            let mut replica = node.clone();
            if kind.is_ordinal() {
                replica.key = format!("{}@{}:{}", node.key, y.kind, y.ref_id);
                replica.order = y.order;
            } else {
                let lane = lane_key(y);
                replica.key = format!("{}@{lane}", node.key);
                replica.lane_key = Some(lane);
            }
            origin.insert(replica.key.clone(), node.key.clone());
            replicas.push((replica, shared));
        }
    }
    if !kind.is_ordinal() {
        for y in &ys {
            let key = lane_key(y);
            if !construct.view.lanes.iter().any(|l| l.key == key) {
                construct.view.lanes.push(Lane {
                    key,
                    kind: y.kind,
                    ref_id: y.ref_id.clone(),
                    label: y.label.clone(),
                });
            }
        }
    }
    construct.replicate(replicas, origin);
    Ok(construct)
}

/// Anchors every node to the locations (or spaces) it is linked to, one
/// replica per anchor. Nodes linked to none stay, unanchored.
pub fn apply_position(
    mut construct: Construct,
    kind: ElementKind,
    model: &StoryModel,
) -> Result<Construct, AlgebraError> {
    if !matches!(kind, ElementKind::Location | ElementKind::Space) {
        return Err(ExprError::InvalidPosition(kind).into());
    }
    let ys = base_elements(model, kind)?;
    for y in &ys {
        let key = anchor_key(y);
        if !construct.view.anchors.iter().any(|a| a.key == key) {
            construct.view.anchors.push(Anchor {
                key,
                kind: y.kind,
                ref_id: y.ref_id.clone(),
                label: y.label.clone(),
                emoji: y.emoji.clone(),
            });
        }
    }
    let mut replicas = Vec::new();
    let mut origin = HashMap::new();
    for node in &construct.view.nodes {
        let scope = &construct.scopes[&node.key];
        let mut placed = false;
        for y in &ys {
            let shared: BTreeSet<String> = scope.intersection(&y.events).cloned().collect();
            if shared.is_empty() {
                continue;
            }
            placed = true;
            let anchor = anchor_key(y);
            let mut replica = node.clone();
            replica.key = format!("{}#{anchor}", node.key);
            replica.anchor_key = Some(anchor);
            origin.insert(replica.key.clone(), node.key.clone());
            replicas.push((replica, shared));
        }
        if !placed {
            origin.insert(node.key.clone(), node.key.clone());
            replicas.push((node.clone(), scope.clone()));
        }
    }
    construct.replicate(replicas, origin);
    Ok(construct)
}

/// Annotates every node with the elements of `kind` it is linked to, in
/// narrated order of their first shared event. Nodes and edges are kept.
pub fn apply_associate(
    mut construct: Construct,
    kind: ElementKind,
    model: &StoryModel,
) -> Result<Construct, AlgebraError> {
    let ys = base_elements(model, kind)?;
    let narration = Narration::of(model);
    for node in &construct.view.nodes {
        let scope = &construct.scopes[&node.key];
        let mut linked: Vec<(usize, usize, &Element)> = ys
            .iter()
            .enumerate()
            .filter_map(|(i, y)| Some((narration.first_shared(scope, &y.events)?, i, y)))
            .collect();
        linked.sort_by_key(|(first, i, _)| (*first, *i));
        let list = construct.view.annotations.entry(node.key.clone()).or_default();
        list.extend(linked.into_iter().map(|(_, _, y)| Annotation {
            kind: y.kind,
            ref_id: y.ref_id.clone(),
            label: y.label.clone(),
        }));
    }
    Ok(construct)
}

pub fn evaluate(expr: &ConstructExpr, model: &StoryModel) -> Result<ViewModel, AlgebraError> {
    expr.validate()?;
    let mut construct = Construct::from_elements(&base_elements(model, expr.base())?);
    for (op, kind) in expr.steps() {
        construct = match op {
            Operator::Position => apply_position(construct, kind, model)?,
            Operator::Associate => apply_associate(construct, kind, model)?,
            Operator::Connect => apply_connect(construct, kind, model)?,
            Operator::Unfold => apply_unfold(construct, kind, model)?,
        };
    }
    Ok(construct.into_view())
}

/// Parses and evaluates in one step.
pub fn evaluate_str(source: &str, model: &StoryModel) -> Result<ViewModel, AlgebraError> {
    evaluate(&parse_expr(source)?, model)
}

/// The three views the workspace ships with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Builtin {
    EntitiesActions,
    LocationsEntities,
    Timeline,
}

impl Builtin {
    pub const ALL: [Builtin; 3] = [Builtin::EntitiesActions, Builtin::LocationsEntities, Builtin::Timeline];

    pub fn as_str(self) -> &'static str {
        match self {
            Builtin::EntitiesActions => "entities_actions",
            Builtin::LocationsEntities => "locations_entities",
            Builtin::Timeline => "timeline",
        }
    }

    pub fn expression(self) -> &'static str {
        match self {
            Builtin::EntitiesActions => "characters |> connect(events)",
            Builtin::LocationsEntities => "characters |> position(locations)",
            Builtin::Timeline => "time |> unfold(characters) |> connect(events)",
        }
    }
}

impl fmt::Display for Builtin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown view `{0}` (expected entities_actions, locations_entities or timeline)")]
pub struct UnknownBuiltin(pub String);

impl FromStr for Builtin {
    type Err = UnknownBuiltin;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Builtin::ALL
            .into_iter()
            .find(|b| b.as_str() == s)
            .ok_or_else(|| UnknownBuiltin(s.to_string()))
    }
}

pub fn builtin_view(builtin: Builtin, model: &StoryModel) -> ViewModel {
    // Built-in views only use kinds every model can supply.
    evaluate_str(builtin.expression(), model).expect("built-in expressions are valid")
}
