//! Brute-force reference semantics over the raw node and edge lists.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashSet};

use etable_core::pattern::{Comparator, PredicateTarget, SelectionPredicate};
use etable_core::tgdb::Node;
use etable_core::{InstanceGraph, QueryPattern, Value};

pub type Tuple = Vec<String>;

/// Edge lookup built by scanning `graph.edges()`.
pub struct EdgeScan {
    edges: HashSet<(String, String, String)>,
}

impl EdgeScan {
    pub fn new(graph: &InstanceGraph) -> Self {
        Self {
            edges: graph.edges().iter().map(|e| (e.edge_type.clone(), e.source.clone(), e.target.clone())).collect(),
        }
    }

    pub fn linked(&self, edge_type: &str, source: &str, target: &str) -> bool {
        self.edges.contains(&(edge_type.to_string(), source.to_string(), target.to_string()))
    }
}

/// Targets of `edge_type` edges leaving `node`, by full scan.
pub fn scan_neighbors(graph: &InstanceGraph, node: &str, edge_type: &str) -> BTreeSet<String> {
    graph.edges().iter().filter(|e| e.edge_type == edge_type && e.source == node).map(|e| e.target.clone()).collect()
}

pub fn scan_nodes_of_type<'g>(graph: &'g InstanceGraph, node_type: &str) -> Vec<&'g Node> {
    graph.nodes().iter().filter(|n| n.node_type == node_type).collect()
}

pub fn oracle_label(graph: &InstanceGraph, node: &Node) -> String {
    let t = graph.schema().node_types().iter().find(|t| t.id == node.node_type).unwrap();
    match node.values.get(&t.label_attribute) {
        None | Some(Value::Null) => node.id.clone(),
        Some(Value::Text(s)) => s.clone(),
        Some(Value::Integer(i)) => i.to_string(),
        Some(other) => other.to_string(),
    }
}

fn compare(a: &Value, b: &Value) -> Option<Ordering> {
    match (a, b) {
        (Value::Integer(x), Value::Integer(y)) => Some(x.cmp(y)),
        (Value::Integer(x), Value::Real(y)) => (*x as f64).partial_cmp(y),
        (Value::Real(x), Value::Integer(y)) => x.partial_cmp(&(*y as f64)),
        (Value::Real(x), Value::Real(y)) => x.partial_cmp(y),
        (Value::Text(x), Value::Text(y)) => Some(x.cmp(y)),
        (Value::Boolean(x), Value::Boolean(y)) => Some(x.cmp(y)),
        (Value::Date(x), Value::Date(y)) => Some(x.cmp(y)),
        _ => None,
    }
}

pub fn holds(cmp: Comparator, value: &Value, operand: &Value) -> bool {
    if matches!(value, Value::Null) {
        return false;
    }
    if cmp == Comparator::Contains {
        return match (value, operand) {
            (Value::Text(h), Value::Text(n)) => h.to_lowercase().contains(&n.to_lowercase()),
            _ => false,
        };
    }
    let Some(o) = compare(value, operand) else { return false };
    match cmp {
        Comparator::Eq => o == Ordering::Equal,
        Comparator::Ne => o != Ordering::Equal,
        Comparator::Lt => o == Ordering::Less,
        Comparator::Le => o != Ordering::Greater,
        Comparator::Gt => o == Ordering::Greater,
        Comparator::Ge => o != Ordering::Less,
        Comparator::Contains => unreachable!(),
    }
}

pub fn predicate_holds(graph: &InstanceGraph, node: &Node, p: &SelectionPredicate) -> bool {
    match &p.target {
        PredicateTarget::Attribute { name } => {
            holds(p.comparator, node.values.get(name).unwrap_or(&Value::Null), &p.operand)
        }
        PredicateTarget::NeighborLabel { edge_type } => {
            let needle = match &p.operand {
                Value::Text(s) => s.clone(),
                other => other.to_string(),
            };
            scan_neighbors(graph, &node.id, edge_type).iter().any(|n| {
                let label = oracle_label(graph, graph.nodes().iter().find(|x| &x.id == n).unwrap());
                match p.comparator {
                    Comparator::Contains => label.to_lowercase().contains(&needle.to_lowercase()),
                    _ => label == needle,
                }
            })
        }
        PredicateTarget::Node => {
            let same = Some(node.id.as_str()) == p.operand.as_text();
            if p.comparator == Comparator::Ne {
                !same
            } else {
                same
            }
        }
    }
}

/// Every assignment of nodes to occurrences that satisfies all conditions
/// and all pattern edges, as node-id tuples in occurrence order. Loops are
/// nested in occurrence order and an edge is tested as soon as both of its
/// ends are bound.
pub fn brute_force_match(graph: &InstanceGraph, pattern: &QueryPattern) -> BTreeSet<Tuple> {
    let edges = EdgeScan::new(graph);
    let candidates: Vec<Vec<&Node>> = pattern
        .occurrences
        .iter()
        .map(|o| {
            scan_nodes_of_type(graph, &o.node_type)
                .into_iter()
                .filter(|n| o.condition.predicates.iter().all(|p| predicate_holds(graph, n, p)))
                .collect()
        })
        .collect();
    let pos = |id| pattern.occurrences.iter().position(|o| o.id == id).unwrap();
    let checks: Vec<Vec<(usize, usize, &str)>> = (0..pattern.occurrences.len())
        .map(|i| {
            pattern
                .edges
                .iter()
                .filter_map(|e| {
                    let (f, t) = (pos(e.from), pos(e.to));
                    (f.max(t) == i).then_some((f, t, e.edge_type.as_str()))
                })
                .collect()
        })
        .collect();

    let mut out = BTreeSet::new();
    let mut current: Vec<&Node> = Vec::new();
    fn go<'a>(
        i: usize,
        candidates: &[Vec<&'a Node>],
        checks: &[Vec<(usize, usize, &str)>],
        edges: &EdgeScan,
        current: &mut Vec<&'a Node>,
        out: &mut BTreeSet<Tuple>,
    ) {
        if i == candidates.len() {
            out.insert(current.iter().map(|n| n.id.clone()).collect());
            return;
        }
        for &n in &candidates[i] {
            current.push(n);
            if checks[i].iter().all(|&(f, t, et)| edges.linked(et, &current[f].id, &current[t].id)) {
                go(i + 1, candidates, checks, edges, current, out);
            }
            current.pop();
        }
    }
    go(0, &candidates, &checks, &edges, &mut current, &mut out);
    out
}

/// Expected enriched-table content derived from the brute-force match:
/// row key -> participating occurrence position -> node ids.
pub fn expected_rows(
    graph: &InstanceGraph,
    pattern: &QueryPattern,
) -> BTreeMap<String, BTreeMap<usize, BTreeSet<String>>> {
    let tuples = brute_force_match(graph, pattern);
    let p = pattern.occurrences.iter().position(|o| o.id == pattern.primary).unwrap();
    let mut rows: BTreeMap<String, BTreeMap<usize, BTreeSet<String>>> = BTreeMap::new();
    for t in &tuples {
        let row = rows.entry(t[p].clone()).or_default();
        for (i, id) in t.iter().enumerate() {
            if i != p {
                row.entry(i).or_default().insert(id.clone());
            }
        }
    }
    rows
}
