//! Random user-action sequences for session tests, with deliberately
//! invalid actions mixed in.

use etable_core::etable::{ColumnKind, ETable, SortDirection};
use etable_core::pattern::{Comparator, SelectMode, SelectionPredicate};
use etable_core::{InstanceGraph, Session, UserAction};
use rand::seq::IndexedRandom;
use rand::Rng;

use super::graphs::random_predicate;

/// An action that should succeed against `session`'s current state.
pub fn random_valid_action(rng: &mut impl Rng, session: &Session) -> UserAction {
    let graph = session.graph();
    let types: Vec<&str> = graph.schema().node_types().iter().map(|t| t.id.as_str()).collect();
    let Ok(table) = session.table() else {
        return UserAction::Open { node_type: types.choose(rng).unwrap().to_string() };
    };
    let ref_columns: Vec<_> = table.columns.iter().filter(|c| c.is_set_valued()).collect();
    let columns: Vec<_> = table.columns.iter().collect();
    let history_len = session.history().len();
    loop {
        let action = match rng.random_range(0..12) {
            0 => UserAction::Open { node_type: types.choose(rng).unwrap().to_string() },
            1..=3 => {
                let primary = session.pattern().unwrap().primary_type().unwrap().to_string();
                let p = academic_predicate(rng, graph, &primary);
                let mode = if rng.random_bool(0.2) { SelectMode::Replace } else { SelectMode::Conjoin };
                UserAction::Filter { predicates: vec![p], mode }
            }
            4..=5 if !ref_columns.is_empty() => {
                UserAction::Pivot { column: ref_columns.choose(rng).unwrap().id.clone() }
            }
            6 => UserAction::Single { node: graph.nodes().choose(rng).unwrap().id.clone() },
            7 if !ref_columns.is_empty() && !table.rows.is_empty() => UserAction::Seeall {
                row: table.rows.choose(rng).unwrap().key.clone(),
                column: ref_columns.choose(rng).unwrap().id.clone(),
            },
            8 => UserAction::Sort {
                column: columns.choose(rng).unwrap().id.clone(),
                direction: if rng.random_bool(0.5) { SortDirection::Asc } else { SortDirection::Desc },
            },
            9 => UserAction::SetVisibility {
                column: columns.choose(rng).unwrap().id.clone(),
                visible: rng.random_bool(0.4),
            },
            10 if history_len > 0 => UserAction::Revert { step: rng.random_range(1..=history_len) },
            _ => continue,
        };
        return action;
    }
}

/// Predicates over the academic attributes, falling back to the generic
/// generator for other graphs.
fn academic_predicate(rng: &mut impl Rng, graph: &InstanceGraph, node_type: &str) -> SelectionPredicate {
    let p = match node_type {
        "Papers" => SelectionPredicate::attribute("year", Comparator::Gt, rng.random_range(2004..2016) as i64),
        "Conferences" => {
            SelectionPredicate::attribute("name", Comparator::Eq, *["SIGMOD", "VLDB", "KDD"].choose(rng).unwrap())
        }
        "Institutions" => {
            SelectionPredicate::attribute("country", Comparator::Contains, *["korea", "usa"].choose(rng).unwrap())
        }
        "Authors" => {
            SelectionPredicate::attribute("name", Comparator::Contains, *["a", "e", "madden"].choose(rng).unwrap())
        }
        "Keywords" => {
            SelectionPredicate::attribute("keyword", Comparator::Contains, *["user", "data", "q"].choose(rng).unwrap())
        }
        _ => return random_predicate(rng, graph, node_type),
    };
    if rng.random_bool(0.3) {
        random_predicate_any(rng, graph, node_type)
    } else {
        p
    }
}

fn random_predicate_any(rng: &mut impl Rng, graph: &InstanceGraph, node_type: &str) -> SelectionPredicate {
    let out: Vec<_> = graph.schema().edges_from(node_type).map(|e| e.id.clone()).collect();
    match out.choose(rng) {
        Some(e) if rng.random_bool(0.5) => SelectionPredicate::neighbor_label(
            e,
            Comparator::Contains,
            *["a", "sigmod", "korea", "user"].choose(rng).unwrap(),
        ),
        _ => {
            let nodes = graph.nodes_of_type(node_type).unwrap();
            SelectionPredicate::node(&nodes.choose(rng).unwrap().id)
        }
    }
}

/// An action that must be rejected against `session`'s current state.
pub fn random_invalid_action(rng: &mut impl Rng, session: &Session) -> UserAction {
    let table: Option<ETable> = session.table().ok();
    let base_column = table.as_ref().and_then(|t| {
        t.columns.iter().find(|c| matches!(c.kind, ColumnKind::BaseAttribute { .. })).map(|c| c.id.clone())
    });
    loop {
        let action = match rng.random_range(0..8) {
            0 => UserAction::Open { node_type: "NoSuchType".into() },
            1 => UserAction::filter(vec![SelectionPredicate::attribute("no_such_attribute", Comparator::Eq, 1i64)]),
            2 => match &base_column {
                Some(c) => UserAction::Pivot { column: c.clone() },
                None => continue,
            },
            3 => UserAction::Pivot { column: "nbr:no-such-edge".into() },
            4 => UserAction::Single { node: "Nowhere:0".into() },
            5 => UserAction::Seeall { row: "Nowhere:0".into(), column: "occ:0".into() },
            6 => UserAction::Sort { column: "attr:no_such_attribute".into(), direction: SortDirection::Asc },
            _ => UserAction::Revert { step: session.history().len() + 1 + rng.random_range(0..3) },
        };
        return action;
    }
}
