//! Graph relations and the selection, join and projection operators.
//!
//! A graph relation is a set of fixed-arity tuples of nodes, one attribute
//! per pattern occurrence. Matching a pattern starts from the filtered base
//! relation of the primary occurrence and grows it one pattern edge at a
//! time with indexed neighbor joins. The result does not depend on the order
//! in which the tree is walked, which the test suite checks directly.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::pattern::{ensure_valid, OccurrenceId, PatternOccurrence, QueryPattern, SelectionCondition};
use crate::tgdb::{InstanceGraph, NodeIx};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RelationAttribute {
    pub occurrence: OccurrenceId,
    pub node_type: String,
}

/// Tuples are kept in a `BTreeSet`, so iteration is lexicographic by node id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphRelation {
    attributes: Vec<RelationAttribute>,
    tuples: BTreeSet<Vec<NodeIx>>,
}

impl GraphRelation {
    pub fn new(attributes: Vec<RelationAttribute>, tuples: BTreeSet<Vec<NodeIx>>) -> Result<Self> {
        let mut seen = HashSet::new();
        if let Some(dup) = attributes.iter().find(|a| !seen.insert(a.occurrence)) {
            return Err(Error::Attribute(format!("occurrence {} appears twice", dup.occurrence)));
        }
        if let Some(t) = tuples.iter().find(|t| t.len() != attributes.len()) {
            return Err(Error::Attribute(format!(
                "tuple of arity {} in a relation of arity {}",
                t.len(),
                attributes.len()
            )));
        }
        Ok(Self { attributes, tuples })
    }

    pub fn attributes(&self) -> &[RelationAttribute] {
        &self.attributes
    }

    pub fn occurrences(&self) -> Vec<OccurrenceId> {
        self.attributes.iter().map(|a| a.occurrence).collect()
    }

    pub fn tuples(&self) -> &BTreeSet<Vec<NodeIx>> {
        &self.tuples
    }

    pub fn arity(&self) -> usize {
        self.attributes.len()
    }

    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }

    pub fn position(&self, occurrence: OccurrenceId) -> Result<usize> {
        self.attributes
            .iter()
            .position(|a| a.occurrence == occurrence)
            .ok_or_else(|| Error::Attribute(format!("occurrence {occurrence} is not an attribute of this relation")))
    }

    /// Distinct nodes in one column.
    pub fn column(&self, occurrence: OccurrenceId) -> Result<BTreeSet<NodeIx>> {
        let i = self.position(occurrence)?;
        Ok(self.tuples.iter().map(|t| t[i]).collect())
    }

    /// Tuples rendered as node ids.
    pub fn id_tuples(&self, graph: &InstanceGraph) -> Vec<Vec<String>> {
        self.tuples.iter().map(|t| t.iter().map(|&ix| graph.node_at(ix).id.clone()).collect()).collect()
    }

    /// Reorders the attributes (and every tuple) to `order`, which must be a
    /// permutation of the current attributes.
    pub fn reordered(&self, order: &[OccurrenceId]) -> Result<GraphRelation> {
        if order.len() != self.arity() {
            return Err(Error::Attribute(format!(
                "{} attributes requested, relation has {}",
                order.len(),
                self.arity()
            )));
        }
        let perm: Vec<usize> = order.iter().map(|&o| self.position(o)).collect::<Result<_>>()?;
        GraphRelation::new(
            perm.iter().map(|&i| self.attributes[i].clone()).collect(),
            self.tuples.iter().map(|t| perm.iter().map(|&i| t[i]).collect()).collect(),
        )
    }

    /// CSV dump for debugging: a header of `occurrence:type` names, then
    /// one line of node ids per tuple.
    pub fn to_csv(&self, graph: &InstanceGraph) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Error::Io(e.to_string());
        w.write_record(self.attributes.iter().map(|a| format!("{}:{}", a.occurrence, a.node_type))).map_err(io)?;
        for t in self.id_tuples(graph) {
            w.write_record(&t).map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
    }
}

/// Single-attribute relation holding every node of the occurrence's type.
pub fn base_relation(graph: &InstanceGraph, occurrence: &PatternOccurrence) -> Result<GraphRelation> {
    let ixs = graph.ixs_of_type(&occurrence.node_type)?;
    Ok(GraphRelation {
        attributes: vec![RelationAttribute { occurrence: occurrence.id, node_type: occurrence.node_type.clone() }],
        tuples: ixs.iter().map(|&ix| vec![ix]).collect(),
    })
}

/// σ: keeps the tuples whose node at `occurrence` satisfies `condition`.
pub fn select_sigma(
    relation: &GraphRelation,
    occurrence: OccurrenceId,
    condition: &SelectionCondition,
    graph: &InstanceGraph,
) -> Result<GraphRelation> {
    let i = relation.position(occurrence)?;
    if condition.is_empty() {
        return Ok(relation.clone());
    }
    let mut verdicts: HashMap<NodeIx, bool> = HashMap::new();
    let tuples = relation
        .tuples
        .iter()
        .filter(|t| *verdicts.entry(t[i]).or_insert_with(|| condition.matches(graph, t[i])))
        .cloned()
        .collect();
    Ok(GraphRelation { attributes: relation.attributes.clone(), tuples })
}

/// ∗: concatenates `rel1` and `rel2` tuples whose nodes at `occ1` and `occ2`
/// are linked by an edge of `edge_type` (source at `occ1`).
pub fn join_star(
    rel1: &GraphRelation,
    rel2: &GraphRelation,
    edge_type: &str,
    occ1: OccurrenceId,
    occ2: OccurrenceId,
    graph: &InstanceGraph,
) -> Result<GraphRelation> {
    let i = rel1.position(occ1)?;
    let j = rel2.position(occ2)?;
    if let Some(a) = rel1.attributes.iter().find(|a| rel2.attributes.iter().any(|b| b.occurrence == a.occurrence)) {
        return Err(Error::Attribute(format!("occurrence {} is in both relations", a.occurrence)));
    }
    let et = graph.schema().require_edge_type(edge_type)?;
    let (t1, t2) = (&rel1.attributes[i].node_type, &rel2.attributes[j].node_type);
    if &et.source_type != t1 || &et.target_type != t2 {
        return Err(Error::TypeMismatch(format!(
            "edge type `{}` joins `{}` to `{}`, not `{t1}` to `{t2}`",
            et.id, et.source_type, et.target_type
        )));
    }

    let mut by_node: HashMap<NodeIx, Vec<&Vec<NodeIx>>> = HashMap::new();
    for t in &rel2.tuples {
        by_node.entry(t[j]).or_default().push(t);
    }
    let mut tuples = BTreeSet::new();
    for left in &rel1.tuples {
        for n in graph.neighbor_ixs(left[i], edge_type) {
            for right in by_node.get(n).into_iter().flatten() {
                let mut t = Vec::with_capacity(left.len() + right.len());
                t.extend_from_slice(left);
                t.extend_from_slice(right);
                tuples.insert(t);
            }
        }
    }
    let mut attributes = rel1.attributes.clone();
    attributes.extend(rel2.attributes.iter().cloned());
    Ok(GraphRelation { attributes, tuples })
}

/// Π: the distinct nodes of one column as a single-attribute relation.
pub fn project_pi(relation: &GraphRelation, occurrence: OccurrenceId) -> Result<GraphRelation> {
    let i = relation.position(occurrence)?;
    Ok(GraphRelation {
        attributes: vec![relation.attributes[i].clone()],
        tuples: relation.tuples.iter().map(|t| vec![t[i]]).collect(),
    })
}

/// The tuples a pattern matches, one attribute per occurrence in insertion
/// order. Evaluation starts at the primary occurrence.
pub fn match_pattern(pattern: &QueryPattern, graph: &InstanceGraph) -> Result<GraphRelation> {
    ensure_valid(pattern, graph.schema())?;
    let order = breadth_first_order(pattern, pattern.primary);
    evaluate(pattern, graph, &order)
}

/// Evaluates the pattern visiting occurrences in `order`, which must list
/// every occurrence once and keep the visited part connected.
pub fn match_with_order(
    pattern: &QueryPattern,
    graph: &InstanceGraph,
    order: &[OccurrenceId],
) -> Result<GraphRelation> {
    ensure_valid(pattern, graph.schema())?;
    let all: BTreeSet<_> = pattern.occurrences.iter().map(|o| o.id).collect();
    let given: BTreeSet<_> = order.iter().copied().collect();
    if given != all || order.len() != all.len() {
        return Err(Error::InvalidArgument("evaluation order must list every occurrence exactly once".into()));
    }
    evaluate(pattern, graph, order)
}

/// Occurrences reachable from `start`, breadth first, neighbors in edge order.
pub fn breadth_first_order(pattern: &QueryPattern, start: OccurrenceId) -> Vec<OccurrenceId> {
    let mut order = vec![start];
    let mut queue = VecDeque::from([start]);
    while let Some(cur) = queue.pop_front() {
        for (_, next) in pattern.incident(cur) {
            if !order.contains(&next) {
                order.push(next);
                queue.push_back(next);
            }
        }
    }
    order
}

fn evaluate(pattern: &QueryPattern, graph: &InstanceGraph, order: &[OccurrenceId]) -> Result<GraphRelation> {
    let filtered = |id: OccurrenceId| -> Result<GraphRelation> {
        let occ = pattern.require_occurrence(id)?;
        select_sigma(&base_relation(graph, occ)?, id, &occ.condition, graph)
    };

    let mut acc = filtered(order[0])?;
    let mut visited = vec![order[0]];
    for &next in &order[1..] {
        let (edge, _) = pattern.incident(next).find(|(_, other)| visited.contains(other)).ok_or_else(|| {
            Error::InvalidArgument(format!("occurrence {next} is not adjacent to the part evaluated so far"))
        })?;
        let rel = filtered(next)?;
        acc = if edge.to == next {
            join_star(&acc, &rel, &edge.edge_type, edge.from, next, graph)?
        } else {
            join_star(&rel, &acc, &edge.edge_type, next, edge.to, graph)?
        };
        visited.push(next);
        if acc.is_empty() {
            // the rest of the joins cannot add tuples; keep the arity right
            for &rest in order.iter().filter(|o| !visited.contains(o)) {
                let occ = pattern.require_occurrence(rest)?;
                acc.attributes.push(RelationAttribute { occurrence: rest, node_type: occ.node_type.clone() });
            }
            break;
        }
    }
    let insertion: Vec<_> = pattern.occurrences.iter().map(|o| o.id).collect();
    acc.reordered(&insertion)
}
