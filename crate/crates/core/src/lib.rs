//! Explore relational data as a typed graph and see join results as
//! enriched tables.
//!
//! The pipeline:
//!
//! 1. [`translate`] reverse-engineers a relational dump (a JSON manifest plus
//!    one CSV per relation) into a typed graph database: a [`SchemaGraph`] of
//!    node and edge types and an [`InstanceGraph`] of nodes and edges.
//! 2. [`pattern`] builds query patterns with four primitive operators
//!    (Initiate, Select, Add, Shift) and records them as a replayable history.
//! 3. [`algebra`] evaluates a pattern with selection, join and projection
//!    over graph relations.
//! 4. [`etable`] turns a match into an enriched table whose cells hold sets
//!    of entity references instead of duplicated join rows.
//! 5. [`session`] maps user-level actions (open, filter, pivot, single,
//!    see-all, sort, hide, revert) onto operators.
//! 6. [`sql`] emits the equivalent SQL and translates structured join
//!    queries back into patterns.

pub mod algebra;
pub mod error;
pub mod etable;
pub mod fixtures;
pub mod pattern;
pub mod session;
pub mod sql;
pub mod tgdb;
pub mod translate;
pub mod value;

pub use algebra::{match_pattern, GraphRelation};
pub use error::{Error, Result};
pub use etable::{materialize, ETable, Page};
pub use pattern::{
    apply_add, apply_select, apply_shift, initiate, replay, Comparator, OccurrenceId, Operator, OperatorRecord,
    QueryPattern, SelectMode, SelectionCondition, SelectionPredicate,
};
pub use session::{Session, UserAction};
pub use sql::{emit_sql, pattern_from_join_query, JoinQuerySpec};
pub use tgdb::{InstanceGraph, NodeIx, SchemaGraph};
pub use value::{Value, ValueKind};
