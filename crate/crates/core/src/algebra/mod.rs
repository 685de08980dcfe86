//! Story elements, the four operators over them, and evaluation of operator
//! chains into renderable views.
//!
//! Every operator joins through action events: two elements are linked when
//! the events they stand for intersect. A character stands for the events
//! it takes part in, a location for the events set there, an event (or a
//! point in time or narration) for itself, and the annotation-backed kinds
//! for the events of the entities, locations or event lists they group.

mod eval;
mod expr;
mod group;
mod kind;
mod view;

pub use eval::{
    apply_associate, apply_connect, apply_position, apply_unfold, base_elements, builtin_view, evaluate,
    evaluate_str, AlgebraError, Builtin, Construct, Element, UnknownBuiltin,
};
pub use expr::{parse_expr, pretty_print, ConstructExpr, ExprError, Operator};
pub use group::group_parallel_edges;
pub use kind::{ElementKind, Layer, UnknownKind};
pub use view::{Anchor, Annotation, Edge, EdgeMember, Lane, Node, ViewModel};
