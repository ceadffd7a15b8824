//! Random typed graphs and random operator-built patterns.

use std::collections::{BTreeMap, BTreeSet};

use etable_core::pattern::{
    apply_add, apply_select, apply_shift, initiate, Comparator, OccurrenceId, SelectMode, SelectionPredicate,
};
use etable_core::tgdb::{AttributeDef, Edge, EdgeOrigin, EdgeType, Node, NodeOrigin, NodeType};
use etable_core::{InstanceGraph, QueryPattern, SchemaGraph, Value, ValueKind};
use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;

pub const MAX_TYPES: usize = 6;
pub const MAX_NODES: usize = 200;
pub const MAX_EDGES: usize = 600;
pub const MAX_OCCURRENCES: usize = 4;

const WORDS: [&str; 8] = ["alpha", "Beta", "gamma", "Delta", "alpha beta", "epsilon", "zeta", "Gamma ray"];

/// A graph with at most `MAX_TYPES` node types, `MAX_NODES` nodes and
/// `MAX_EDGES` edges (mirrors included). Every edge type has a reverse,
/// self loops included, plus an occasional unpaired self loop.
pub fn random_graph(rng: &mut impl Rng) -> InstanceGraph {
    let n_types = rng.random_range(1..=MAX_TYPES);
    let node_types: Vec<NodeType> = (0..n_types)
        .map(|i| NodeType {
            id: format!("T{i}"),
            name: format!("T{i}"),
            attributes: vec![
                AttributeDef::new("name", ValueKind::Text),
                AttributeDef::new("score", ValueKind::Integer),
            ],
            label_attribute: "name".into(),
            origin: NodeOrigin::EntityTable,
            provenance: None,
        })
        .collect();

    let mut edge_types = Vec::new();
    let n_pairs = rng.random_range(1..=6);
    for i in 0..n_pairs {
        let s = format!("T{}", rng.random_range(0..n_types));
        let t = format!("T{}", rng.random_range(0..n_types));
        let (fwd, rev) = (format!("e{i}"), format!("e{i}:rev"));
        edge_types.push(edge_type(&fwd, &s, &t, Some(&rev)));
        edge_types.push(edge_type(&rev, &t, &s, Some(&fwd)));
    }
    if rng.random_bool(0.3) {
        let s = format!("T{}", rng.random_range(0..n_types));
        edge_types.push(edge_type("loop", &s, &s, None));
    }
    let schema = SchemaGraph::new(node_types, edge_types.clone()).expect("unique ids");

    let per_type = MAX_NODES / n_types;
    let mut nodes = Vec::new();
    let mut by_type: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for i in 0..n_types {
        let count = rng.random_range(0..=per_type);
        for j in 0..count {
            let id = format!("T{i}:{j:03}");
            let name = if rng.random_bool(0.1) { Value::Null } else { Value::text(*WORDS.choose(rng).unwrap()) };
            let score = if rng.random_bool(0.05) { Value::Null } else { Value::Integer(rng.random_range(0..100)) };
            nodes.push(Node {
                id: id.clone(),
                node_type: format!("T{i}"),
                values: BTreeMap::from([("name".to_string(), name), ("score".to_string(), score)]),
            });
            by_type.entry(format!("T{i}")).or_default().push(id);
        }
    }

    let mut seen = BTreeSet::new();
    let mut edges = Vec::new();
    let budget = rng.random_range(0..=MAX_EDGES / 2);
    for _ in 0..budget {
        let et = edge_types.choose(rng).unwrap();
        let (Some(srcs), Some(tgts)) = (by_type.get(&et.source_type), by_type.get(&et.target_type)) else { continue };
        let (s, t) = (srcs.choose(rng).unwrap().clone(), tgts.choose(rng).unwrap().clone());
        let mut push = |ty: &str, s: &str, t: &str| {
            if seen.insert((ty.to_string(), s.to_string(), t.to_string())) {
                edges.push(Edge {
                    id: format!("{ty}:{s}->{t}"),
                    edge_type: ty.into(),
                    source: s.into(),
                    target: t.into(),
                    values: BTreeMap::new(),
                });
            }
        };
        push(&et.id, &s, &t);
        if let Some(rev) = &et.reverse_of {
            push(rev, &t, &s);
        }
    }
    InstanceGraph::new(schema, nodes, edges).expect("consistent random graph")
}

fn edge_type(id: &str, s: &str, t: &str, rev: Option<&str>) -> EdgeType {
    EdgeType {
        id: id.into(),
        name: id.into(),
        source_type: s.into(),
        target_type: t.into(),
        reverse_of: rev.map(Into::into),
        origin: EdgeOrigin::FkOneToMany,
        provenance: None,
    }
}

/// A predicate valid for `node_type`, with operands drawn so that matches
/// are plausible.
pub fn random_predicate(rng: &mut impl Rng, graph: &InstanceGraph, node_type: &str) -> SelectionPredicate {
    let schema = graph.schema();
    let t = schema.node_type(node_type).unwrap();
    if t.attribute("score").is_none() {
        // graphs other than the random ones: filter on the label text
        let needle = ["a", "e", "data"].choose(rng).unwrap();
        return SelectionPredicate::attribute(&t.label_attribute, Comparator::Contains, *needle);
    }
    let out_edges: Vec<_> = schema.edges_from(node_type).map(|e| e.id.clone()).collect();
    let nodes = graph.nodes_of_type(node_type).unwrap();
    match rng.random_range(0..10) {
        0..=3 => {
            let cmp = *[Comparator::Eq, Comparator::Ne, Comparator::Lt, Comparator::Le, Comparator::Gt, Comparator::Ge]
                .choose(rng)
                .unwrap();
            SelectionPredicate::attribute("score", cmp, rng.random_range(0..100) as i64)
        }
        4..=5 => {
            let needle = ["a", "ta", "GAM", "beta", "z"].choose(rng).unwrap();
            SelectionPredicate::attribute("name", Comparator::Contains, *needle)
        }
        6 => SelectionPredicate::attribute("name", Comparator::Eq, *WORDS.choose(rng).unwrap()),
        7..=8 if !out_edges.is_empty() => {
            let e = out_edges.choose(rng).unwrap();
            if rng.random_bool(0.5) {
                SelectionPredicate::neighbor_label(e, Comparator::Contains, *["a", "eta", "DEL"].choose(rng).unwrap())
            } else {
                SelectionPredicate::neighbor_label(e, Comparator::Eq, *WORDS.choose(rng).unwrap())
            }
        }
        _ if !nodes.is_empty() => {
            let n = nodes.choose(rng).unwrap();
            let mut p = SelectionPredicate::node(&n.id);
            if rng.random_bool(0.3) {
                p.comparator = Comparator::Ne;
            }
            p
        }
        _ => SelectionPredicate::attribute("score", Comparator::Ge, 50i64),
    }
}

/// A pattern built by a random walk of primitive operators, with at most
/// `MAX_OCCURRENCES` occurrences.
pub fn random_pattern(rng: &mut impl Rng, graph: &InstanceGraph) -> QueryPattern {
    let schema = graph.schema();
    let types: Vec<_> = schema.node_types().iter().map(|t| t.id.clone()).collect();
    let mut p = initiate(schema, types.choose(rng).unwrap()).unwrap();
    let steps = rng.random_range(0..8);
    for _ in 0..steps {
        let primary_type = p.primary_type().unwrap().to_string();
        match rng.random_range(0..5) {
            0..=2 => {
                let out: Vec<_> = schema.edges_from(&primary_type).map(|e| e.id.clone()).collect();
                if p.occurrences.len() < MAX_OCCURRENCES && !out.is_empty() {
                    p = apply_add(schema, &p, out.choose(rng).unwrap()).unwrap();
                }
            }
            3 => {
                let n = rng.random_range(1..=2);
                let preds = (0..n).map(|_| random_predicate(rng, graph, &primary_type)).collect();
                p = apply_select(schema, &p, &etable_core::SelectionCondition::new(preds), SelectMode::Conjoin)
                    .unwrap();
            }
            _ => {
                let target = p.occurrences.choose(rng).unwrap().id;
                p = apply_shift(&p, target).unwrap();
            }
        }
    }
    p
}

/// A random evaluation order: starts anywhere and only ever visits an
/// occurrence adjacent to one already visited.
pub fn random_order(rng: &mut impl Rng, pattern: &QueryPattern) -> Vec<OccurrenceId> {
    let mut order = vec![pattern.occurrences.choose(rng).unwrap().id];
    while order.len() < pattern.occurrences.len() {
        let mut frontier: Vec<OccurrenceId> = pattern
            .edges
            .iter()
            .filter_map(|e| match (order.contains(&e.from), order.contains(&e.to)) {
                (true, false) => Some(e.to),
                (false, true) => Some(e.from),
                _ => None,
            })
            .collect();
        frontier.shuffle(rng);
        order.push(frontier[0]);
    }
    order
}

/// A (graph, pattern) case, reproducible from its seed.
pub fn random_case(seed: u64) -> (InstanceGraph, QueryPattern) {
    let mut rng = super::rng(seed);
    let g = random_graph(&mut rng);
    let p = random_pattern(&mut rng, &g);
    (g, p)
}
