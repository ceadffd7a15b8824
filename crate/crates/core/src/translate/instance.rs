use std::collections::{BTreeMap, HashMap, HashSet};
use std::path::Path;

use serde::Serialize;

use super::classify::{classify_relations, RelationClass};
use super::manifest::RelationManifest;
use super::schema::{build_schema_graph_with_stats, ColumnStats, TableStats};
use crate::error::{Error, Result};
use crate::tgdb::{Edge, EdgeProvenance, EdgeType, InstanceGraph, Node, NodeOrigin, NodeType, SchemaGraph, Violation};
use crate::value::{Value, ValueKind};

/// Raw CSV contents of one relation.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RawTable {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl RawTable {
    /// Reads comma-separated text with a header row and RFC 4180 quoting.
    pub fn from_csv(text: &str) -> Result<Self> {
        Self::from_reader(text.as_bytes())
    }

    pub fn from_reader(reader: impl std::io::Read) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
        let headers = rdr.headers().map_err(|e| Error::Io(e.to_string()))?.iter().map(str::to_string).collect();
        let rows = rdr
            .records()
            .map(|r| r.map(|rec| rec.iter().map(str::to_string).collect()))
            .collect::<std::result::Result<Vec<Vec<String>>, _>>()
            .map_err(|e| Error::Io(e.to_string()))?;
        Ok(Self { headers, rows })
    }

    fn column(&self, name: &str) -> Option<usize> {
        self.headers.iter().position(|h| h == name)
    }
}

/// Relation name to raw rows.
pub type Tables = BTreeMap<String, RawTable>;

/// Loads `<relation>.csv` for every relation of the manifest.
pub fn load_tables(manifest: &RelationManifest, dir: impl AsRef<Path>) -> Result<Tables> {
    let dir = dir.as_ref();
    manifest
        .relations
        .iter()
        .map(|r| {
            let path = dir.join(format!("{}.csv", r.name));
            let file = std::fs::File::open(&path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
            Ok((r.name.clone(), RawTable::from_reader(file)?))
        })
        .collect()
}

/// Column statistics for every declared attribute.
pub fn table_stats(manifest: &RelationManifest, tables: &Tables) -> TableStats {
    let mut out = TableStats::new();
    for r in &manifest.relations {
        let Some(table) = tables.get(&r.name) else { continue };
        let mut per = BTreeMap::new();
        for a in &r.attributes {
            let Some(col) = table.column(&a.name) else { continue };
            let mut distinct = HashSet::new();
            let mut nulls = 0;
            for row in &table.rows {
                let raw = row.get(col).map(String::as_str).unwrap_or("");
                if raw.is_empty() {
                    nulls += 1;
                } else {
                    distinct.insert(raw);
                }
            }
            per.insert(
                a.name.clone(),
                ColumnStats { kind: a.kind, rows: table.rows.len(), distinct: distinct.len(), nulls },
            );
        }
        out.insert(r.name.clone(), per);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CategoricalCandidate {
    pub relation: String,
    pub attribute: String,
    pub distinct: usize,
}

/// Everything noteworthy about one translation run.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct TranslationReport {
    pub classes: Vec<RelationClass>,
    pub dangling_references: Vec<String>,
    pub coercion_errors: Vec<String>,
    pub duplicate_keys: Vec<String>,
    /// Entity attributes under the cardinality threshold that are not yet
    /// configured as categorical.
    pub categorical_candidates: Vec<CategoricalCandidate>,
    pub node_count: usize,
    pub edge_count: usize,
    pub violations: Vec<Violation>,
}

impl TranslationReport {
    pub fn is_clean(&self) -> bool {
        self.dangling_references.is_empty()
            && self.coercion_errors.is_empty()
            && self.duplicate_keys.is_empty()
            && self.violations.is_empty()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TranslateOptions {
    /// Turn dangling references, coercion failures and duplicate keys into
    /// errors instead of report entries.
    pub strict: bool,
}

#[derive(Debug, Clone)]
pub struct Translation {
    pub graph: InstanceGraph,
    pub report: TranslationReport,
}

/// Full pipeline: classify, gather stats, build the schema graph, build the
/// instance graph, validate.
pub fn translate(manifest: &RelationManifest, tables: &Tables, options: TranslateOptions) -> Result<Translation> {
    let classes = classify_relations(manifest)?;
    let stats = table_stats(manifest, tables);
    let schema = build_schema_graph_with_stats(manifest, &stats)?;
    let (graph, mut report) = build_instance_graph_with(schema, tables, options)?;
    report.classes = classes;
    report.categorical_candidates = categorical_candidates(manifest, &stats);
    Ok(Translation { graph, report })
}

pub fn translate_dir(
    manifest: &RelationManifest,
    dir: impl AsRef<Path>,
    options: TranslateOptions,
) -> Result<Translation> {
    translate(manifest, &load_tables(manifest, dir)?, options)
}

fn categorical_candidates(manifest: &RelationManifest, stats: &TableStats) -> Vec<CategoricalCandidate> {
    let Ok(classes) = classify_relations(manifest) else { return Vec::new() };
    let mut out = Vec::new();
    for c in classes.iter().filter(|c| c.category == super::classify::RelationCategory::Entity) {
        let r = manifest.relation(&c.relation).expect("classified relations exist");
        for a in &r.attributes {
            if r.in_primary_key(&a.name) || r.is_foreign_key(&a.name) {
                continue;
            }
            let configured =
                manifest.categorical_attributes.iter().any(|x| x.relation == r.name && x.attribute == a.name);
            let Some(s) = stats.get(&r.name).and_then(|m| m.get(&a.name)) else { continue };
            if !configured && s.distinct > 0 && s.distinct < manifest.categorical_cardinality_threshold {
                out.push(CategoricalCandidate {
                    relation: r.name.clone(),
                    attribute: a.name.clone(),
                    distinct: s.distinct,
                });
            }
        }
    }
    out
}

/// Builds the instance graph with default (lenient) options.
pub fn build_instance_graph(schema: SchemaGraph, tables: &Tables) -> Result<(InstanceGraph, TranslationReport)> {
    build_instance_graph_with(schema, tables, TranslateOptions::default())
}

/// Populates `schema` from raw tables, using each type's provenance to find
/// its rows. One node per entity row and per distinct multivalued or
/// categorical value; edges from foreign keys, link rows and values, each
/// mirrored by its reverse type.
pub fn build_instance_graph_with(
    schema: SchemaGraph,
    tables: &Tables,
    options: TranslateOptions,
) -> Result<(InstanceGraph, TranslationReport)> {
    let mut b = InstanceBuilder {
        schema: &schema,
        tables,
        options,
        report: TranslationReport::default(),
        nodes: BTreeMap::new(),
        keys: HashMap::new(),
        edges: Vec::new(),
        edge_keys: HashSet::new(),
    };

    for t in schema.node_types().iter().filter(|t| t.origin == NodeOrigin::EntityTable) {
        b.load_entities(t)?;
    }
    let mut done: HashSet<&str> = HashSet::new();
    for et in schema.edge_types() {
        if done.contains(et.id.as_str()) {
            continue;
        }
        done.insert(&et.id);
        if let Some(rev) = &et.reverse_of {
            done.insert(rev);
        }
        b.load_edges(et)?;
    }

    let InstanceBuilder { nodes, edges, mut report, .. } = b;
    let graph = InstanceGraph::new(schema.clone(), nodes.into_values().collect(), edges)?;
    report.node_count = graph.nodes().len();
    report.edge_count = graph.edges().len();
    report.violations = graph.validate();
    Ok((graph, report))
}

struct InstanceBuilder<'a> {
    schema: &'a SchemaGraph,
    tables: &'a Tables,
    options: TranslateOptions,
    report: TranslationReport,
    nodes: BTreeMap<String, Node>,
    /// Per entity node type: rendered key to node id.
    keys: HashMap<String, HashMap<String, String>>,
    edges: Vec<Edge>,
    edge_keys: HashSet<(String, String, String)>,
}

impl<'a> InstanceBuilder<'a> {
    fn problem(&mut self, err: Error) -> Result<()> {
        if self.options.strict {
            return Err(err);
        }
        match err {
            Error::DanglingReference(m) => self.report.dangling_references.push(m),
            Error::Coercion(m) => self.report.coercion_errors.push(m),
            other => self.report.duplicate_keys.push(other.to_string()),
        }
        Ok(())
    }

    fn table(&self, relation: &str) -> Result<&'a RawTable> {
        let tables: &'a Tables = self.tables;
        tables.get(relation).ok_or_else(|| Error::Manifest(format!("no rows supplied for relation `{relation}`")))
    }

    fn column(&self, relation: &str, attr: &str) -> Result<usize> {
        self.table(relation)?
            .column(attr)
            .ok_or_else(|| Error::Manifest(format!("`{relation}.csv` has no column `{attr}`")))
    }

    fn load_entities(&mut self, t: &NodeType) -> Result<()> {
        let prov =
            t.provenance.as_ref().ok_or_else(|| Error::Manifest(format!("node type `{}` has no provenance", t.id)))?;
        let relation = prov.relation.as_str();
        let key_attrs: Vec<&str> = prov.key_attribute.split('|').collect();
        let cols: Vec<(usize, &str, ValueKind)> = t
            .attributes
            .iter()
            .map(|a| Ok((self.column(relation, &a.name)?, a.name.as_str(), a.value_kind)))
            .collect::<Result<_>>()?;
        let table = self.table(relation)?;
        self.keys.entry(t.id.clone()).or_default();

        for (row_no, row) in table.rows.iter().enumerate() {
            let mut values = BTreeMap::new();
            let mut problems = Vec::new();
            for &(col, name, kind) in &cols {
                let raw = row.get(col).map(String::as_str).unwrap_or("");
                let v = Value::parse(kind, raw).unwrap_or_else(|_| {
                    problems.push(Error::Coercion(format!(
                        "{relation} row {}: `{name}` = {raw:?} is not {kind}",
                        row_no + 1
                    )));
                    Value::Null
                });
                values.insert(name.to_string(), v);
            }
            for p in problems {
                self.problem(p)?;
            }
            let key_parts: Vec<&Value> = key_attrs.iter().map(|k| values.get(*k).unwrap_or(&Value::Null)).collect();
            if key_parts.iter().any(|v| v.is_null()) {
                self.problem(Error::Coercion(format!("{relation} row {}: missing primary key", row_no + 1)))?;
                continue;
            }
            let key = key_parts.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("|");
            let id = format!("{}:{key}", t.id);
            if self.nodes.contains_key(&id) {
                self.problem(Error::Manifest(format!("{relation} row {}: duplicate key {key}", row_no + 1)))?;
                continue;
            }
            self.keys.get_mut(&t.id).expect("inserted above").insert(key, id.clone());
            self.nodes.insert(id.clone(), Node { id, node_type: t.id.clone(), values });
        }
        Ok(())
    }

    /// Resolves a raw foreign-key cell to the entity node it names.
    fn entity_ref(&self, node_type: &str, raw: &str) -> Result<Option<String>> {
        let t = self.schema.require_node_type(node_type)?;
        let key_attr = t.provenance.as_ref().map(|p| p.key_attribute.as_str()).unwrap_or("");
        let kind = t.attribute(key_attr).map(|a| a.value_kind).unwrap_or(ValueKind::Text);
        let key = match Value::parse(kind, raw) {
            Ok(Value::Null) => return Ok(None),
            Ok(v) => v.to_string(),
            Err(_) => raw.to_string(),
        };
        Ok(self.keys.get(node_type).and_then(|m| m.get(&key)).cloned())
    }

    fn value_node(&mut self, node_type: &str, raw: &str) -> Result<Option<String>> {
        let t = self.schema.require_node_type(node_type)?;
        let attr = &t.attributes[0];
        let v = match Value::parse(attr.value_kind, raw) {
            Ok(Value::Null) => return Ok(None),
            Ok(v) => v,
            Err(e) => {
                self.problem(e)?;
                return Ok(None);
            }
        };
        let id = format!("{}:{v}", t.id);
        self.nodes.entry(id.clone()).or_insert_with(|| Node {
            id: id.clone(),
            node_type: t.id.clone(),
            values: BTreeMap::from([(attr.name.clone(), v)]),
        });
        Ok(Some(id))
    }

    fn add_pair(&mut self, et: &EdgeType, source: String, target: String) {
        let mut push = |ty: &str, s: &str, t: &str| {
            if self.edge_keys.insert((ty.to_string(), s.to_string(), t.to_string())) {
                self.edges.push(Edge {
                    id: format!("{ty}:{s}->{t}"),
                    edge_type: ty.to_string(),
                    source: s.to_string(),
                    target: t.to_string(),
                    values: BTreeMap::new(),
                });
            }
        };
        push(&et.id, &source, &target);
        if let Some(rev) = &et.reverse_of {
            push(rev, &target, &source);
        }
    }

    /// Creates the instances of `et` (and its reverse). `et` is the forward
    /// member of its pair.
    fn load_edges(&mut self, et: &EdgeType) -> Result<()> {
        let Some(prov) = et.provenance.clone() else { return Ok(()) };
        match prov {
            EdgeProvenance::ForeignKey { relation, attribute, .. } => {
                let holder = self.entity_type_of(&relation)?;
                let forward = et.source_type == holder;
                let (holder_type, referenced_type) = if forward {
                    (et.source_type.clone(), et.target_type.clone())
                } else {
                    (et.target_type.clone(), et.source_type.clone())
                };
                let col = self.column(&relation, &attribute)?;
                let ids = self.row_ids(&holder_type, &relation)?;
                let table = self.table(&relation)?;
                let cells: Vec<(Option<String>, String)> = table
                    .rows
                    .iter()
                    .zip(ids)
                    .map(|(row, id)| (id, row.get(col).cloned().unwrap_or_default()))
                    .collect();
                for (holder_id, raw) in cells {
                    let Some(holder_id) = holder_id else { continue };
                    if raw.is_empty() {
                        continue;
                    }
                    match self.entity_ref(&referenced_type, &raw)? {
                        Some(target) => {
                            if forward {
                                self.add_pair(et, holder_id, target)
                            } else {
                                self.add_pair(et, target, holder_id)
                            }
                        }
                        None => self.problem(Error::DanglingReference(format!(
                            "{relation}.{attribute} = {raw:?} on `{holder_id}` matches no `{referenced_type}`"
                        )))?,
                    }
                }
            }
            EdgeProvenance::Bridge { relation, source_attribute, target_attribute } => {
                let sc = self.column(&relation, &source_attribute)?;
                let tc = self.column(&relation, &target_attribute)?;
                let rows: Vec<(String, String)> = self
                    .table(&relation)?
                    .rows
                    .iter()
                    .map(|r| (r.get(sc).cloned().unwrap_or_default(), r.get(tc).cloned().unwrap_or_default()))
                    .collect();
                for (row_no, (s_raw, t_raw)) in rows.into_iter().enumerate() {
                    let s = self.endpoint(&et.source_type, &s_raw)?;
                    let t = self.endpoint(&et.target_type, &t_raw)?;
                    match (s, t) {
                        (Some(s), Some(t)) => self.add_pair(et, s, t),
                        _ => self.problem(Error::DanglingReference(format!(
                            "{relation} row {}: ({s_raw:?}, {t_raw:?}) does not resolve to `{}` and `{}`",
                            row_no + 1,
                            et.source_type,
                            et.target_type
                        )))?,
                    }
                }
            }
            EdgeProvenance::Categorical { relation, attribute } => {
                let holder = self.entity_type_of(&relation)?;
                let col = self.column(&relation, &attribute)?;
                let ids = self.row_ids(&holder, &relation)?;
                let cells: Vec<(Option<String>, String)> = self
                    .table(&relation)?
                    .rows
                    .iter()
                    .zip(ids)
                    .map(|(row, id)| (id, row.get(col).cloned().unwrap_or_default()))
                    .collect();
                let (owner_is_source, value_type) = if et.source_type == holder {
                    (true, et.target_type.clone())
                } else {
                    (false, et.source_type.clone())
                };
                for (id, raw) in cells {
                    let Some(id) = id else { continue };
                    if let Some(v) = self.value_node(&value_type, &raw)? {
                        if owner_is_source {
                            self.add_pair(et, id, v)
                        } else {
                            self.add_pair(et, v, id)
                        }
                    }
                }
            }
        }
        Ok(())
    }

    fn endpoint(&mut self, node_type: &str, raw: &str) -> Result<Option<String>> {
        let t = self.schema.require_node_type(node_type)?;
        if t.origin == NodeOrigin::EntityTable {
            self.entity_ref(node_type, raw)
        } else {
            self.value_node(node_type, raw)
        }
    }

    fn entity_type_of(&self, relation: &str) -> Result<String> {
        self.schema
            .node_types()
            .iter()
            .find(|t| {
                t.origin == NodeOrigin::EntityTable && t.provenance.as_ref().is_some_and(|p| p.relation == relation)
            })
            .map(|t| t.id.clone())
            .ok_or_else(|| Error::Manifest(format!("no entity node type for relation `{relation}`")))
    }

    /// Node id of each row of an entity relation (None for skipped rows).
    fn row_ids(&self, node_type: &str, relation: &str) -> Result<Vec<Option<String>>> {
        let t = self.schema.require_node_type(node_type)?;
        let key_attrs: Vec<&str> =
            t.provenance.as_ref().map(|p| p.key_attribute.split('|').collect()).unwrap_or_default();
        let cols: Vec<(usize, ValueKind)> = key_attrs
            .iter()
            .map(|k| {
                let kind = t.attribute(k).map(|a| a.value_kind).unwrap_or(ValueKind::Text);
                Ok((self.column(relation, k)?, kind))
            })
            .collect::<Result<_>>()?;
        let keys = self.keys.get(node_type);
        Ok(self
            .table(relation)?
            .rows
            .iter()
            .map(|row| {
                let parts: Option<Vec<String>> = cols
                    .iter()
                    .map(|&(c, kind)| match Value::parse(kind, row.get(c).map(String::as_str).unwrap_or("")) {
                        Ok(Value::Null) | Err(_) => None,
                        Ok(v) => Some(v.to_string()),
                    })
                    .collect();
                parts.and_then(|p| keys.and_then(|k| k.get(&p.join("|"))).cloned())
            })
            .collect())
    }
}
