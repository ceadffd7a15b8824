use std::collections::{BTreeMap, HashSet};

use serde::Serialize;

use super::classify::{classify_relations, RelationCategory};
use super::manifest::{RelationDef, RelationManifest};
use crate::error::{Error, Result};
use crate::tgdb::{
    AttributeDef, EdgeOrigin, EdgeProvenance, EdgeType, NodeOrigin, NodeProvenance, NodeType, SchemaGraph,
};
use crate::value::ValueKind;

/// Per-column statistics gathered from the ingested rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ColumnStats {
    pub kind: ValueKind,
    pub rows: usize,
    pub distinct: usize,
    pub nulls: usize,
}

impl ColumnStats {
    fn distinct_ratio(&self) -> f64 {
        if self.rows == 0 {
            0.0
        } else {
            self.distinct as f64 / self.rows as f64
        }
    }

    fn null_ratio(&self) -> f64 {
        if self.rows == 0 {
            0.0
        } else {
            self.nulls as f64 / self.rows as f64
        }
    }
}

/// Relation name to attribute name to stats.
pub type TableStats = BTreeMap<String, BTreeMap<String, ColumnStats>>;

/// Picks the attribute that names a row.
///
/// An override wins outright. Otherwise text attributes outside the key are
/// scored by distinct ratio plus non-null ratio; without any text attribute the
/// first non-key, non-foreign-key attribute is used, then any non-key
/// attribute, then the first key attribute. Ties go to declaration order.
pub fn choose_label_attribute(
    relation: &RelationDef,
    stats: Option<&BTreeMap<String, ColumnStats>>,
    override_attr: Option<&str>,
) -> String {
    if let Some(attr) = override_attr {
        return attr.to_string();
    }
    let candidates: Vec<_> = relation
        .attributes
        .iter()
        .filter(|a| !relation.in_primary_key(&a.name) && !relation.is_foreign_key(&a.name))
        .collect();

    let score = |name: &str| {
        stats.and_then(|s| s.get(name)).map(|s| s.distinct_ratio() + (1.0 - s.null_ratio())).unwrap_or(0.0)
    };
    let mut best: Option<(&str, f64)> = None;
    for a in candidates.iter().filter(|a| a.kind == ValueKind::Text) {
        let s = score(&a.name);
        if best.is_none_or(|(_, b)| s > b) {
            best = Some((&a.name, s));
        }
    }
    if let Some((name, _)) = best {
        return name.to_string();
    }
    candidates
        .first()
        .map(|a| a.name.clone())
        .or_else(|| relation.attributes.iter().find(|a| !relation.in_primary_key(&a.name)).map(|a| a.name.clone()))
        .unwrap_or_else(|| relation.primary_key[0].clone())
}

/// Builds the schema graph without column statistics; label attributes are
/// then chosen by kind and declaration order alone.
pub fn build_schema_graph(manifest: &RelationManifest) -> Result<SchemaGraph> {
    build_schema_graph_with_stats(manifest, &TableStats::new())
}

pub fn build_schema_graph_with_stats(manifest: &RelationManifest, stats: &TableStats) -> Result<SchemaGraph> {
    let classes = classify_relations(manifest)?;
    let category = |name: &str| {
        classes.iter().find(|c| c.relation == name).map(|c| c.category).expect("every relation is classified")
    };

    for (relation, attr) in &manifest.overrides {
        let r = manifest
            .relation(relation)
            .ok_or_else(|| Error::Override(format!("override names unknown relation `{relation}`")))?;
        if r.attribute(attr).is_none() {
            return Err(Error::Override(format!("`{relation}` has no attribute `{attr}`")));
        }
    }

    let mut builder = SchemaBuilder::new(manifest);

    for r in manifest.relations.iter().filter(|r| category(&r.name) == RelationCategory::Entity) {
        let label = choose_label_attribute(r, stats.get(&r.name), manifest.overrides.get(&r.name).map(String::as_str));
        let id = builder.unique_type_name(&r.name);
        builder.node_types.push(NodeType {
            id: id.clone(),
            name: id,
            attributes: r.attributes.iter().map(|a| AttributeDef::new(&a.name, a.kind)).collect(),
            label_attribute: label,
            origin: NodeOrigin::EntityTable,
            provenance: Some(NodeProvenance { relation: r.name.clone(), key_attribute: r.primary_key.join("|") }),
        });
    }

    // foreign keys between entity relations
    for r in manifest.relations.iter().filter(|r| category(&r.name) == RelationCategory::Entity) {
        for fk in &r.foreign_keys {
            if category(&fk.references) != RelationCategory::Entity {
                continue;
            }
            let provenance = EdgeProvenance::ForeignKey {
                relation: r.name.clone(),
                attribute: fk.attribute.clone(),
                referenced: fk.references.clone(),
            };
            builder.edge_pair(
                format!("fk:{}.{}", r.name, fk.attribute),
                builder.entity_type(&r.name),
                builder.entity_type(&fk.references),
                EdgeOrigin::FkOneToMany,
                provenance.clone(),
                provenance,
            );
        }
    }

    for r in manifest.relations.iter().filter(|r| category(&r.name) == RelationCategory::RelationshipMn) {
        let (a, b) = (&r.primary_key[0], &r.primary_key[1]);
        let ta = &r.foreign_key(a).expect("classified").references;
        let tb = &r.foreign_key(b).expect("classified").references;
        builder.edge_pair(
            format!("mn:{}", r.name),
            builder.entity_type(ta),
            builder.entity_type(tb),
            EdgeOrigin::MnRelationship,
            bridge(&r.name, a, b),
            bridge(&r.name, b, a),
        );
    }

    for r in manifest.relations.iter().filter(|r| category(&r.name) == RelationCategory::MultivaluedAttribute) {
        let owner_attr = r.primary_key.iter().find(|k| r.is_foreign_key(k)).expect("classified");
        let value_attr = r.primary_key.iter().find(|k| !r.is_foreign_key(k)).expect("classified");
        let kind = r.attribute(value_attr).expect("checked").kind;
        let owner = builder.entity_type(&r.foreign_key(owner_attr).expect("classified").references);
        let base_name = match r.name.split_once('_') {
            Some((_, rest)) if !rest.is_empty() => capitalize(rest),
            _ => capitalize(value_attr),
        };
        let id = builder.unique_type_name(&base_name);
        builder.node_types.push(value_node_type(&id, value_attr, kind, NodeOrigin::MultivaluedAttribute, &r.name));
        builder.edge_pair(
            format!("mv:{}", r.name),
            owner,
            id,
            EdgeOrigin::MultivaluedAttribute,
            bridge(&r.name, owner_attr, value_attr),
            bridge(&r.name, value_attr, owner_attr),
        );
    }

    for c in &manifest.categorical_attributes {
        if category(&c.relation) != RelationCategory::Entity {
            return Err(Error::Manifest(format!(
                "categorical attribute `{}.{}` must belong to an entity relation",
                c.relation, c.attribute
            )));
        }
        let r = manifest.relation(&c.relation).expect("checked");
        let kind = r.attribute(&c.attribute).expect("checked").kind;
        let id = builder.unique_type_name(&capitalize(&c.attribute));
        builder.node_types.push(value_node_type(
            &id,
            &c.attribute,
            kind,
            NodeOrigin::CategoricalAttribute,
            &c.relation,
        ));
        let provenance = EdgeProvenance::Categorical { relation: c.relation.clone(), attribute: c.attribute.clone() };
        builder.edge_pair(
            format!("cat:{}.{}", c.relation, c.attribute),
            builder.entity_type(&c.relation),
            id,
            EdgeOrigin::CategoricalAttribute,
            provenance.clone(),
            provenance,
        );
    }

    SchemaGraph::new(builder.node_types, builder.edge_types)
}

fn bridge(relation: &str, source: &str, target: &str) -> EdgeProvenance {
    EdgeProvenance::Bridge {
        relation: relation.to_string(),
        source_attribute: source.to_string(),
        target_attribute: target.to_string(),
    }
}

fn value_node_type(id: &str, attr: &str, kind: ValueKind, origin: NodeOrigin, relation: &str) -> NodeType {
    NodeType {
        id: id.to_string(),
        name: id.to_string(),
        attributes: vec![AttributeDef::new(attr, kind)],
        label_attribute: attr.to_string(),
        origin,
        provenance: Some(NodeProvenance { relation: relation.to_string(), key_attribute: attr.to_string() }),
    }
}

fn capitalize(s: &str) -> String {
    let mut chars = s.chars();
    match chars.next() {
        Some(first) => first.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

struct SchemaBuilder<'a> {
    manifest: &'a RelationManifest,
    node_types: Vec<NodeType>,
    edge_types: Vec<EdgeType>,
    edge_names: HashSet<(String, String)>,
}

impl<'a> SchemaBuilder<'a> {
    fn new(manifest: &'a RelationManifest) -> Self {
        Self { manifest, node_types: Vec::new(), edge_types: Vec::new(), edge_names: HashSet::new() }
    }

    fn unique_type_name(&self, base: &str) -> String {
        let taken = |n: &str| self.node_types.iter().any(|t| t.name == n);
        dedup_name(base, taken)
    }

    fn entity_type(&self, relation: &str) -> String {
        self.node_types
            .iter()
            .find(|t| {
                t.origin == NodeOrigin::EntityTable && t.provenance.as_ref().is_some_and(|p| p.relation == relation)
            })
            .map(|t| t.id.clone())
            .expect("entity relations become node types first")
    }

    fn type_name(&self, id: &str) -> String {
        self.node_types.iter().find(|t| t.id == id).map(|t| t.name.clone()).unwrap_or_default()
    }

    fn edge_name(&mut self, id: &str, source: &str, target: &str) -> String {
        let base = self.manifest.edge_labels.get(id).cloned().unwrap_or_else(|| self.type_name(target));
        let name = dedup_name(&base, |n| self.edge_names.contains(&(source.to_string(), n.to_string())));
        self.edge_names.insert((source.to_string(), name.clone()));
        name
    }

    /// Adds an edge type and its reverse. Self loops get a reverse too, as a
    /// separately named type, so both directions stay addressable.
    fn edge_pair(
        &mut self,
        id: String,
        source: String,
        target: String,
        origin: EdgeOrigin,
        forward: EdgeProvenance,
        backward: EdgeProvenance,
    ) {
        let rev_id = format!("{id}:rev");
        let name = self.edge_name(&id, &source, &target);
        let rev_name = self.edge_name(&rev_id, &target, &source);
        self.edge_types.push(EdgeType {
            id: id.clone(),
            name,
            source_type: source.clone(),
            target_type: target.clone(),
            reverse_of: Some(rev_id.clone()),
            origin,
            provenance: Some(forward),
        });
        self.edge_types.push(EdgeType {
            id: rev_id,
            name: rev_name,
            source_type: target,
            target_type: source,
            reverse_of: Some(id),
            origin,
            provenance: Some(backward),
        });
    }
}

/// `base`, or `base (2)`, `base (3)`, ... until `taken` says no.
pub(crate) fn dedup_name(base: &str, taken: impl Fn(&str) -> bool) -> String {
    if !taken(base) {
        return base.to_string();
    }
    (2..).map(|i| format!("{base} ({i})")).find(|n| !taken(n)).expect("unbounded")
}
