//! Enriched tables: one row per matched primary node, with three column kinds.
//!
//! * Base attribute columns carry the primary node's own values.
//! * Participating columns, one per non-primary occurrence, carry the nodes
//!   of that occurrence that co-occur with the row in the match.
//! * Neighbor columns, one per schema edge type leaving the primary type,
//!   carry the row's direct neighbors whatever the pattern says.
//!
//! Set-valued cells hold entity references plus their count, so a paper with
//! seven authors is one row with a seven-element cell rather than seven rows.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::algebra::match_pattern;
use crate::error::{Error, Result};
use crate::pattern::{OccurrenceId, QueryPattern};
use crate::tgdb::{InstanceGraph, NodeIx};
use crate::value::{Value, ValueKind};

pub const DEFAULT_PAGE_SIZE: usize = 50;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EntityRef {
    pub node: String,
    pub label: String,
}

impl EntityRef {
    pub fn of(graph: &InstanceGraph, ix: NodeIx) -> Self {
        Self { node: graph.node_at(ix).id.clone(), label: graph.label_at(ix) }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ColumnKind {
    BaseAttribute { attribute: String, value_kind: ValueKind },
    Participating { occurrence: OccurrenceId, node_type: String },
    Neighbor { edge_type: String, node_type: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnSpec {
    pub id: String,
    pub header: String,
    #[serde(flatten)]
    pub kind: ColumnKind,
    pub visible: bool,
}

impl ColumnSpec {
    pub fn is_set_valued(&self) -> bool {
        !matches!(self.kind, ColumnKind::BaseAttribute { .. })
    }
}

pub fn attribute_column_id(attribute: &str) -> String {
    format!("attr:{attribute}")
}

pub fn participating_column_id(occurrence: OccurrenceId) -> String {
    format!("occ:{occurrence}")
}

pub fn neighbor_column_id(edge_type: &str) -> String {
    format!("nbr:{edge_type}")
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RefSet {
    pub refs: Vec<EntityRef>,
    pub count: usize,
}

impl RefSet {
    fn from_ixs(graph: &InstanceGraph, ixs: impl IntoIterator<Item = NodeIx>) -> Self {
        let refs: Vec<_> = ixs.into_iter().map(|ix| EntityRef::of(graph, ix)).collect();
        Self { count: refs.len(), refs }
    }

    pub fn nodes(&self) -> impl Iterator<Item = &str> {
        self.refs.iter().map(|r| r.node.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Cell {
    Refs(RefSet),
    Value(Value),
}

impl Cell {
    pub fn as_refs(&self) -> Option<&RefSet> {
        match self {
            Cell::Refs(r) => Some(r),
            Cell::Value(_) => None,
        }
    }

    pub fn as_value(&self) -> Option<&Value> {
        match self {
            Cell::Value(v) => Some(v),
            Cell::Refs(_) => None,
        }
    }

    /// Text for flat exports: values as-is, references as `label; label`.
    pub fn render(&self) -> String {
        match self {
            Cell::Value(v) => v.to_string(),
            Cell::Refs(r) => r.refs.iter().map(|e| e.label.as_str()).collect::<Vec<_>>().join("; "),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub key: String,
    pub label: String,
    pub cells: BTreeMap<String, Cell>,
}

impl Row {
    pub fn cell(&self, column: &str) -> Option<&Cell> {
        self.cells.get(column)
    }

    pub fn refs(&self, column: &str) -> Option<&RefSet> {
        self.cell(column).and_then(Cell::as_refs)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SortDirection {
    #[default]
    Asc,
    Desc,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SortSpec {
    pub column: String,
    pub direction: SortDirection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ETable {
    pub pattern: QueryPattern,
    pub columns: Vec<ColumnSpec>,
    pub rows: Vec<Row>,
    pub total_row_count: usize,
    #[serde(default)]
    pub sort: Option<SortSpec>,
}

/// Runs the pattern and reshapes the match into an enriched table. Rows come
/// out in ascending key order.
pub fn materialize(pattern: &QueryPattern, graph: &InstanceGraph) -> Result<ETable> {
    let matched = match_pattern(pattern, graph)?;
    let schema = graph.schema();
    let primary = pattern.primary_occurrence()?;
    let primary_type = schema.require_node_type(&primary.node_type)?;
    let others: Vec<_> = pattern.occurrences.iter().filter(|o| o.id != pattern.primary).collect();
    let neighbor_types: Vec<_> = schema.edges_from(&primary_type.id).collect();

    let mut columns = Vec::new();
    for a in &primary_type.attributes {
        columns.push(ColumnSpec {
            id: attribute_column_id(&a.name),
            header: a.name.clone(),
            kind: ColumnKind::BaseAttribute { attribute: a.name.clone(), value_kind: a.value_kind },
            visible: true,
        });
    }
    for o in &others {
        columns.push(ColumnSpec {
            id: participating_column_id(o.id),
            header: o.alias.clone(),
            kind: ColumnKind::Participating { occurrence: o.id, node_type: o.node_type.clone() },
            visible: true,
        });
    }
    for et in &neighbor_types {
        columns.push(ColumnSpec {
            id: neighbor_column_id(&et.id),
            header: et.name.clone(),
            kind: ColumnKind::Neighbor { edge_type: et.id.clone(), node_type: et.target_type.clone() },
            visible: true,
        });
    }

    let primary_pos = matched.position(pattern.primary)?;
    let other_pos: Vec<usize> = others.iter().map(|o| matched.position(o.id)).collect::<Result<_>>()?;
    let mut groups: BTreeMap<NodeIx, Vec<BTreeSet<NodeIx>>> = BTreeMap::new();
    for t in matched.tuples() {
        let g = groups.entry(t[primary_pos]).or_insert_with(|| vec![BTreeSet::new(); others.len()]);
        for (slot, &pos) in g.iter_mut().zip(&other_pos) {
            slot.insert(t[pos]);
        }
    }

    let rows: Vec<Row> = groups
        .into_iter()
        .map(|(key, parts)| {
            let node = graph.node_at(key);
            let mut cells = BTreeMap::new();
            for a in &primary_type.attributes {
                cells.insert(attribute_column_id(&a.name), Cell::Value(node.value(&a.name).clone()));
            }
            for (o, set) in others.iter().zip(parts) {
                cells.insert(participating_column_id(o.id), Cell::Refs(RefSet::from_ixs(graph, set)));
            }
            for et in &neighbor_types {
                let ns = graph.neighbor_ixs(key, &et.id).iter().copied();
                cells.insert(neighbor_column_id(&et.id), Cell::Refs(RefSet::from_ixs(graph, ns)));
            }
            Row { key: node.id.clone(), label: graph.label_at(key), cells }
        })
        .collect();

    Ok(ETable { pattern: pattern.clone(), columns, total_row_count: rows.len(), rows, sort: None })
}

impl ETable {
    pub fn column(&self, id: &str) -> Option<&ColumnSpec> {
        self.columns.iter().find(|c| c.id == id)
    }

    pub fn require_column(&self, id: &str) -> Result<&ColumnSpec> {
        self.column(id).ok_or_else(|| Error::UnknownColumn(id.to_string()))
    }

    /// Finds a column by id or, failing that, by header.
    pub fn find_column(&self, id_or_header: &str) -> Result<&ColumnSpec> {
        self.column(id_or_header)
            .or_else(|| self.columns.iter().find(|c| c.header == id_or_header))
            .ok_or_else(|| Error::UnknownColumn(id_or_header.to_string()))
    }

    pub fn row(&self, key: &str) -> Option<&Row> {
        self.rows.iter().find(|r| r.key == key)
    }

    pub fn row_keys(&self) -> Vec<&str> {
        self.rows.iter().map(|r| r.key.as_str()).collect()
    }

    pub fn visible_columns(&self) -> impl Iterator<Item = &ColumnSpec> {
        self.columns.iter().filter(|c| c.visible)
    }

    /// Flat CSV of the visible columns, led by the row key. Reference sets
    /// are flattened to `label; label; ...`.
    pub fn to_csv(&self) -> Result<String> {
        let io = |e: csv::Error| Error::Io(e.to_string());
        let cols: Vec<_> = self.visible_columns().collect();
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(std::iter::once("key").chain(cols.iter().map(|c| c.header.as_str()))).map_err(io)?;
        for r in &self.rows {
            let cells = cols.iter().map(|c| r.cell(&c.id).map(Cell::render).unwrap_or_default());
            w.write_record(std::iter::once(r.key.clone()).chain(cells)).map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
    }
}

/// Stable sort on one column with ties broken by key. Base columns compare
/// values with nulls last in either direction; set-valued columns compare
/// reference counts.
pub fn sort_rows(etable: &ETable, column: &str, direction: SortDirection) -> Result<ETable> {
    let col = etable.require_column(column)?;
    let set_valued = col.is_set_valued();
    let directed = |o: Ordering| if direction == SortDirection::Desc { o.reverse() } else { o };
    let mut out = etable.clone();
    out.rows.sort_by(|a, b| {
        let (ca, cb) = (a.cell(column), b.cell(column));
        let primary = if set_valued {
            let n = |c: Option<&Cell>| c.and_then(Cell::as_refs).map_or(0, |r| r.count);
            directed(n(ca).cmp(&n(cb)))
        } else {
            let null = Value::Null;
            let v = |c: Option<&Cell>| c.and_then(Cell::as_value).unwrap_or(&null).clone();
            let (va, vb) = (v(ca), v(cb));
            match (va.is_null(), vb.is_null()) {
                (false, false) => directed(va.sort_cmp(&vb)),
                (a_null, b_null) => a_null.cmp(&b_null),
            }
        };
        primary.then_with(|| a.key.cmp(&b.key))
    });
    out.sort = Some(SortSpec { column: column.to_string(), direction });
    Ok(out)
}

/// Flips one column's visibility flag; the data is untouched.
pub fn set_column_visibility(etable: &ETable, column: &str, visible: bool) -> Result<ETable> {
    etable.require_column(column)?;
    let mut out = etable.clone();
    for c in out.columns.iter_mut().filter(|c| c.id == column) {
        c.visible = visible;
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Page {
    pub page: usize,
    pub page_size: usize,
    pub page_count: usize,
    pub total_row_count: usize,
    pub columns: Vec<ColumnSpec>,
    pub rows: Vec<Row>,
    #[serde(default)]
    pub sort: Option<SortSpec>,
}

/// Rows `[(page - 1) * size, page * size)`. A page past the end is empty.
pub fn paginate(etable: &ETable, page: usize, page_size: usize) -> Result<Page> {
    if page == 0 || page_size == 0 {
        return Err(Error::InvalidArgument("page and page size start at 1".into()));
    }
    let start = (page - 1).saturating_mul(page_size);
    let rows = etable.rows.iter().skip(start).take(page_size).cloned().collect();
    Ok(Page {
        page,
        page_size,
        page_count: etable.rows.len().div_ceil(page_size),
        total_row_count: etable.total_row_count,
        columns: etable.columns.clone(),
        rows,
        sort: etable.sort.clone(),
    })
}
