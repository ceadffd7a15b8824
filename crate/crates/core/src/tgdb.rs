//! The typed graph model: a schema graph of node and edge types, and an
//! immutable instance graph of typed nodes and edges with lookup indexes.
//!
//! Node iteration order is ascending node id everywhere. Internally nodes live
//! in a vector sorted by id, so a [`NodeIx`] orders exactly like the id it
//! stands for.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::value::{Value, ValueKind};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttributeDef {
    pub name: String,
    pub value_kind: ValueKind,
}

impl AttributeDef {
    pub fn new(name: impl Into<String>, value_kind: ValueKind) -> Self {
        Self { name: name.into(), value_kind }
    }
}

/// Which kind of relational construct a node type was derived from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeOrigin {
    EntityTable,
    MultivaluedAttribute,
    CategoricalAttribute,
}

/// Which kind of relational construct an edge type was derived from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeOrigin {
    FkOneToMany,
    MnRelationship,
    MultivaluedAttribute,
    CategoricalAttribute,
}

/// Where a node type's instances come from in the source relations.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeProvenance {
    pub relation: String,
    /// The attribute whose value identifies an instance (primary key for
    /// entity tables, the value column otherwise).
    pub key_attribute: String,
}

/// How an edge type maps back onto relational columns.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EdgeProvenance {
    /// `relation.attribute` references the primary key of `referenced`.
    /// Shared by both directions of the pair.
    ForeignKey { relation: String, attribute: String, referenced: String },
    /// A link relation whose `source_attribute` points at the source node and
    /// whose `target_attribute` points at (or is) the target node.
    Bridge { relation: String, source_attribute: String, target_attribute: String },
    /// A low-cardinality attribute promoted to its own node type.
    Categorical { relation: String, attribute: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeType {
    pub id: String,
    pub name: String,
    pub attributes: Vec<AttributeDef>,
    pub label_attribute: String,
    pub origin: NodeOrigin,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<NodeProvenance>,
}

impl NodeType {
    pub fn attribute(&self, name: &str) -> Option<&AttributeDef> {
        self.attributes.iter().find(|a| a.name == name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeType {
    pub id: String,
    pub name: String,
    pub source_type: String,
    pub target_type: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reverse_of: Option<String>,
    pub origin: EdgeOrigin,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<EdgeProvenance>,
}

impl EdgeType {
    pub fn is_self_loop(&self) -> bool {
        self.source_type == self.target_type
    }
}

/// Node types and edge types, with id lookups.
#[derive(Debug, Clone, Default)]
pub struct SchemaGraph {
    node_types: Vec<NodeType>,
    edge_types: Vec<EdgeType>,
    node_type_pos: HashMap<String, usize>,
    edge_type_pos: HashMap<String, usize>,
}

impl PartialEq for SchemaGraph {
    fn eq(&self, other: &Self) -> bool {
        self.node_types == other.node_types && self.edge_types == other.edge_types
    }
}

impl SchemaGraph {
    /// Builds the lookup indexes. Only duplicate ids are rejected here;
    /// everything else is reported by [`SchemaGraph::violations`].
    pub fn new(node_types: Vec<NodeType>, edge_types: Vec<EdgeType>) -> Result<Self> {
        let mut node_type_pos = HashMap::new();
        for (i, t) in node_types.iter().enumerate() {
            if node_type_pos.insert(t.id.clone(), i).is_some() {
                return Err(Error::InvalidGraph(format!("duplicate node type id `{}`", t.id)));
            }
        }
        let mut edge_type_pos = HashMap::new();
        for (i, t) in edge_types.iter().enumerate() {
            if edge_type_pos.insert(t.id.clone(), i).is_some() {
                return Err(Error::InvalidGraph(format!("duplicate edge type id `{}`", t.id)));
            }
        }
        Ok(Self { node_types, edge_types, node_type_pos, edge_type_pos })
    }

    pub fn node_types(&self) -> &[NodeType] {
        &self.node_types
    }

    pub fn edge_types(&self) -> &[EdgeType] {
        &self.edge_types
    }

    pub fn node_type(&self, id: &str) -> Option<&NodeType> {
        self.node_type_pos.get(id).map(|&i| &self.node_types[i])
    }

    pub fn edge_type(&self, id: &str) -> Option<&EdgeType> {
        self.edge_type_pos.get(id).map(|&i| &self.edge_types[i])
    }

    pub fn require_node_type(&self, id: &str) -> Result<&NodeType> {
        self.node_type(id).ok_or_else(|| Error::UnknownType(id.to_string()))
    }

    pub fn require_edge_type(&self, id: &str) -> Result<&EdgeType> {
        self.edge_type(id).ok_or_else(|| Error::UnknownEdgeType(id.to_string()))
    }

    pub(crate) fn edge_type_index(&self, id: &str) -> Option<usize> {
        self.edge_type_pos.get(id).copied()
    }

    /// Edge types leaving `node_type`, in declaration order.
    pub fn edges_from<'a>(&'a self, node_type: &'a str) -> impl Iterator<Item = &'a EdgeType> + 'a {
        self.edge_types.iter().filter(move |e| e.source_type == node_type)
    }

    pub fn violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut names = HashSet::new();
        for t in &self.node_types {
            if !names.insert(t.name.as_str()) {
                out.push(Violation::new(&t.id, Rule::DuplicateName, format!("node type name `{}` reused", t.name)));
            }
            let mut attrs = HashSet::new();
            for a in &t.attributes {
                if !attrs.insert(a.name.as_str()) {
                    out.push(Violation::new(
                        &t.id,
                        Rule::DuplicateAttribute,
                        format!("attribute `{}` declared twice", a.name),
                    ));
                }
            }
            if t.attribute(&t.label_attribute).is_none() {
                out.push(Violation::new(
                    &t.id,
                    Rule::LabelAttribute,
                    format!("label attribute `{}` is not an attribute", t.label_attribute),
                ));
            }
        }
        let mut edge_names = HashSet::new();
        for e in &self.edge_types {
            for end in [&e.source_type, &e.target_type] {
                if self.node_type(end).is_none() {
                    out.push(Violation::new(
                        &e.id,
                        Rule::UnknownEndpointType,
                        format!("endpoint type `{end}` does not exist"),
                    ));
                }
            }
            if !edge_names.insert((e.source_type.as_str(), e.name.as_str())) {
                out.push(Violation::new(
                    &e.id,
                    Rule::DuplicateName,
                    format!("edge name `{}` reused on `{}`", e.name, e.source_type),
                ));
            }
            match e.reverse_of.as_deref() {
                None if !e.is_self_loop() => {
                    out.push(Violation::new(&e.id, Rule::MissingReverse, "non-self-loop edge type has no reverse"));
                }
                None => {}
                Some(rev) => match self.edge_type(rev) {
                    None => {
                        out.push(Violation::new(&e.id, Rule::MissingReverse, format!("reverse `{rev}` does not exist")))
                    }
                    Some(r) => {
                        if r.source_type != e.target_type || r.target_type != e.source_type {
                            out.push(Violation::new(
                                &e.id,
                                Rule::ReversePairing,
                                format!("reverse `{rev}` does not swap endpoints"),
                            ));
                        }
                        if r.reverse_of.as_deref() != Some(e.id.as_str()) {
                            out.push(Violation::new(
                                &e.id,
                                Rule::ReversePairing,
                                format!("reverse `{rev}` does not point back"),
                            ));
                        }
                    }
                },
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub id: String,
    pub node_type: String,
    #[serde(default)]
    pub values: BTreeMap<String, Value>,
}

impl Node {
    pub fn value(&self, attribute: &str) -> &Value {
        static NULL: Value = Value::Null;
        self.values.get(attribute).unwrap_or(&NULL)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub id: String,
    pub edge_type: String,
    pub source: String,
    pub target: String,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub values: BTreeMap<String, Value>,
}

/// Position of a node in the graph's id-sorted node list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeIx(pub(crate) u32);

impl NodeIx {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    DuplicateName,
    DuplicateAttribute,
    LabelAttribute,
    UnknownEndpointType,
    MissingReverse,
    ReversePairing,
    UnknownAttribute,
    ValueKind,
    EdgeSourceType,
    EdgeTargetType,
    MissingMirror,
}

/// One broken rule, naming the offending node, edge or type.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub subject: String,
    pub rule: Rule,
    pub message: String,
}

impl Violation {
    pub fn new(subject: &str, rule: Rule, message: impl Into<String>) -> Self {
        Self { subject: subject.to_string(), rule, message: message.into() }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {:?}: {}", self.subject, self.rule, self.message)
    }
}

/// The serialized form: four arrays mirroring the node, edge, node type and
/// edge type tables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TgdbDocument {
    pub node_types: Vec<NodeType>,
    pub edge_types: Vec<EdgeType>,
    pub nodes: Vec<Node>,
    pub edges: Vec<Edge>,
}

/// Immutable typed instance graph. Safe to share across threads.
#[derive(Debug, Clone)]
pub struct InstanceGraph {
    schema: SchemaGraph,
    nodes: Vec<Node>,
    edges: Vec<Edge>,
    node_pos: HashMap<String, NodeIx>,
    by_type: HashMap<String, Vec<NodeIx>>,
    adjacency: HashMap<(NodeIx, usize), Vec<NodeIx>>,
}

impl PartialEq for InstanceGraph {
    fn eq(&self, other: &Self) -> bool {
        self.schema == other.schema && self.nodes == other.nodes && self.edges == other.edges
    }
}

impl InstanceGraph {
    /// Sorts and indexes the graph. Fails on duplicate ids, nodes of unknown
    /// type, and edges whose type or endpoints do not exist. Typing and
    /// mirroring rules are left to [`InstanceGraph::validate`].
    pub fn new(schema: SchemaGraph, mut nodes: Vec<Node>, mut edges: Vec<Edge>) -> Result<Self> {
        nodes.sort_by(|a, b| a.id.cmp(&b.id));
        edges.sort_by(|a, b| a.id.cmp(&b.id));

        let mut node_pos = HashMap::with_capacity(nodes.len());
        let mut by_type: HashMap<String, Vec<NodeIx>> =
            schema.node_types().iter().map(|t| (t.id.clone(), Vec::new())).collect();
        for (i, n) in nodes.iter().enumerate() {
            let ix = NodeIx(i as u32);
            if node_pos.insert(n.id.clone(), ix).is_some() {
                return Err(Error::InvalidGraph(format!("duplicate node id `{}`", n.id)));
            }
            by_type
                .get_mut(&n.node_type)
                .ok_or_else(|| Error::InvalidGraph(format!("node `{}` has unknown type `{}`", n.id, n.node_type)))?
                .push(ix);
        }

        let mut adjacency: HashMap<(NodeIx, usize), Vec<NodeIx>> = HashMap::new();
        let mut edge_ids = HashSet::with_capacity(edges.len());
        for e in &edges {
            if !edge_ids.insert(e.id.as_str()) {
                return Err(Error::InvalidGraph(format!("duplicate edge id `{}`", e.id)));
            }
            let et = schema
                .edge_type_index(&e.edge_type)
                .ok_or_else(|| Error::InvalidGraph(format!("edge `{}` has unknown type `{}`", e.id, e.edge_type)))?;
            let lookup = |id: &str| {
                node_pos
                    .get(id)
                    .copied()
                    .ok_or_else(|| Error::InvalidGraph(format!("edge `{}` references unknown node `{id}`", e.id)))
            };
            let (s, t) = (lookup(&e.source)?, lookup(&e.target)?);
            adjacency.entry((s, et)).or_default().push(t);
        }
        for targets in adjacency.values_mut() {
            targets.sort_unstable();
            targets.dedup();
        }

        Ok(Self { schema, nodes, edges, node_pos, by_type, adjacency })
    }

    pub fn empty(schema: SchemaGraph) -> Self {
        Self::new(schema, Vec::new(), Vec::new()).expect("empty graph is always indexable")
    }

    pub fn schema(&self) -> &SchemaGraph {
        &self.schema
    }

    /// All nodes in ascending id order.
    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    /// All edges in ascending id order.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn node(&self, id: &str) -> Option<&Node> {
        self.node_pos.get(id).map(|ix| &self.nodes[ix.index()])
    }

    pub fn node_ix(&self, id: &str) -> Option<NodeIx> {
        self.node_pos.get(id).copied()
    }

    pub fn node_at(&self, ix: NodeIx) -> &Node {
        &self.nodes[ix.index()]
    }

    pub fn require_node(&self, id: &str) -> Result<NodeIx> {
        self.node_ix(id).ok_or_else(|| Error::UnknownNode(id.to_string()))
    }

    /// Node positions of one type, ascending.
    pub fn ixs_of_type(&self, node_type: &str) -> Result<&[NodeIx]> {
        self.by_type.get(node_type).map(Vec::as_slice).ok_or_else(|| Error::UnknownType(node_type.to_string()))
    }

    /// Every node of `node_type`, in ascending id order.
    pub fn nodes_of_type(&self, node_type: &str) -> Result<Vec<&Node>> {
        Ok(self.ixs_of_type(node_type)?.iter().map(|&ix| self.node_at(ix)).collect())
    }

    /// Targets of the `edge_type` edges leaving `node`, ascending.
    pub fn neighbors(&self, node: &str, edge_type: &str) -> Result<Vec<&Node>> {
        let ix = self.require_node(node)?;
        let et = self.schema.require_edge_type(edge_type)?;
        let n = self.node_at(ix);
        if et.source_type != n.node_type {
            return Err(Error::TypeMismatch(format!(
                "edge type `{}` leaves `{}`, node `{}` is `{}`",
                et.id, et.source_type, n.id, n.node_type
            )));
        }
        Ok(self.neighbor_ixs(ix, edge_type).iter().map(|&t| self.node_at(t)).collect())
    }

    /// Index lookup without type checks; unknown edge types yield nothing.
    pub fn neighbor_ixs(&self, node: NodeIx, edge_type: &str) -> &[NodeIx] {
        self.schema
            .edge_type_index(edge_type)
            .and_then(|et| self.adjacency.get(&(node, et)))
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub fn has_edge(&self, source: NodeIx, edge_type: &str, target: NodeIx) -> bool {
        self.neighbor_ixs(source, edge_type).binary_search(&target).is_ok()
    }

    /// Display label of a node: its label attribute rendered as text, or its
    /// id when that value is null.
    pub fn label(&self, node: &str) -> Result<String> {
        Ok(self.label_at(self.require_node(node)?))
    }

    pub fn label_at(&self, ix: NodeIx) -> String {
        let n = self.node_at(ix);
        let label = self.schema.node_type(&n.node_type).map(|t| n.value(&t.label_attribute)).unwrap_or(&Value::Null);
        if label.is_null() {
            n.id.clone()
        } else {
            label.to_string()
        }
    }

    /// Checks every schema and instance rule. Empty means well formed.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = self.schema.violations();

        for n in &self.nodes {
            let Some(t) = self.schema.node_type(&n.node_type) else { continue };
            for (attr, value) in &n.values {
                match t.attribute(attr) {
                    None => out.push(Violation::new(
                        &n.id,
                        Rule::UnknownAttribute,
                        format!("`{attr}` is not an attribute of `{}`", t.id),
                    )),
                    Some(def) => {
                        if let Some(kind) = value.kind() {
                            if kind != def.value_kind {
                                out.push(Violation::new(
                                    &n.id,
                                    Rule::ValueKind,
                                    format!("`{attr}` holds {kind}, declared {}", def.value_kind),
                                ));
                            }
                        }
                    }
                }
            }
        }

        let mut present: HashSet<(&str, &str, &str)> = HashSet::with_capacity(self.edges.len());
        for e in &self.edges {
            present.insert((e.edge_type.as_str(), e.source.as_str(), e.target.as_str()));
        }
        for e in &self.edges {
            let Some(et) = self.schema.edge_type(&e.edge_type) else { continue };
            let source_type = self.node(&e.source).map(|n| n.node_type.as_str());
            let target_type = self.node(&e.target).map(|n| n.node_type.as_str());
            if source_type != Some(et.source_type.as_str()) {
                out.push(Violation::new(
                    &e.id,
                    Rule::EdgeSourceType,
                    format!("source `{}` is not a `{}`", e.source, et.source_type),
                ));
            }
            if target_type != Some(et.target_type.as_str()) {
                out.push(Violation::new(
                    &e.id,
                    Rule::EdgeTargetType,
                    format!("target `{}` is not a `{}`", e.target, et.target_type),
                ));
            }
            if let Some(rev) = et.reverse_of.as_deref() {
                if !present.contains(&(rev, e.target.as_str(), e.source.as_str())) {
                    out.push(Violation::new(
                        &e.id,
                        Rule::MissingMirror,
                        format!("no `{rev}` edge from `{}` to `{}`", e.target, e.source),
                    ));
                }
            }
        }
        out
    }

    pub fn to_document(&self) -> TgdbDocument {
        TgdbDocument {
            node_types: self.schema.node_types().to_vec(),
            edge_types: self.schema.edge_types().to_vec(),
            nodes: self.nodes.clone(),
            edges: self.edges.clone(),
        }
    }

    /// Rebuilds a graph from its document, restoring declared value kinds
    /// that plain JSON cannot carry (dates, integral reals).
    pub fn from_document(doc: TgdbDocument) -> Result<Self> {
        let schema = SchemaGraph::new(doc.node_types, doc.edge_types)?;
        let mut nodes = doc.nodes;
        for n in &mut nodes {
            let Some(t) = schema.node_type(&n.node_type) else { continue };
            for (attr, value) in n.values.iter_mut() {
                if let Some(def) = t.attribute(attr) {
                    let v = std::mem::take(value);
                    *value = v.coerce(def.value_kind)?;
                }
            }
        }
        Self::new(schema, nodes, doc.edges)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_document())?)
    }

    pub fn from_json(json: &str) -> Result<Self> {
        Self::from_document(serde_json::from_str(json)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Number of nodes per node type, keyed by type id.
    pub fn type_counts(&self) -> BTreeMap<&str, usize> {
        self.by_type.iter().map(|(k, v)| (k.as_str(), v.len())).collect()
    }

    /// Ids of all node types, ascending.
    pub fn type_ids(&self) -> BTreeSet<&str> {
        self.by_type.keys().map(String::as_str).collect()
    }
}
