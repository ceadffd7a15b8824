//! Reverse engineering of a relational dump into a typed graph database.
//!
//! Relations are classified as entities, many-to-many relationships or
//! multivalued attributes from their keys alone; entities become node types,
//! foreign keys and link relations become reverse-paired edge types, and
//! multivalued (and opt-in categorical) attributes become single-attribute
//! node types of their own.

mod classify;
mod instance;
mod manifest;
mod schema;

pub use classify::{classify_relations, RelationCategory, RelationClass};
pub use instance::{
    build_instance_graph, build_instance_graph_with, load_tables, table_stats, translate, translate_dir,
    CategoricalCandidate, RawTable, Tables, TranslateOptions, Translation, TranslationReport,
};
pub use manifest::{
    CategoricalAttribute, ColumnDef, ForeignKey, RelationDef, RelationManifest, DEFAULT_CATEGORICAL_THRESHOLD,
};
pub(crate) use schema::dedup_name;
pub use schema::{build_schema_graph, build_schema_graph_with_stats, choose_label_attribute, ColumnStats, TableStats};
