//! Engine for visual story-writing: a relational story model extracted from
//! text, an operator algebra that turns it into renderable constructs, and
//! an edit compiler that turns manipulations of those constructs back into
//! text edits with tracked changes and a branching history.

pub mod algebra;
pub mod edit;
pub mod extract;
#[doc(hidden)]
pub mod fixtures;
pub mod gateway;
pub mod model;
pub mod project;
pub mod prompt;
pub mod revision;
