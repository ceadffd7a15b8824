//! Seeded action generator driven by the state of a reference session.

use etable_core::etable::ColumnKind;
use etable_core::etable::SortDirection;
use etable_core::{Comparator, SelectionPredicate, Session, UserAction};
use rand::rngs::StdRng;
use rand::seq::IndexedRandom;
use rand::Rng;

const TYPES: [&str; 5] = ["Papers", "Authors", "Institutions", "Conferences", "Keywords"];

/// Picks an action that usually applies to `session`. Roughly one in ten
/// is deliberately off (a bad column, a revert past the end) so that error
/// paths are part of every run.
pub fn next_action(rng: &mut StdRng, session: &Session) -> UserAction {
    let Ok(table) = session.table() else {
        return UserAction::Open { node_type: TYPES.choose(rng).unwrap().to_string() };
    };
    let neighbor: Vec<_> = table.columns.iter().filter(|c| c.is_set_valued()).collect();
    let attrs: Vec<_> = table.columns.iter().filter(|c| matches!(c.kind, ColumnKind::BaseAttribute { .. })).collect();
    match rng.random_range(0..100) {
        0..=9 => UserAction::Open { node_type: TYPES.choose(rng).unwrap().to_string() },
        10..=34 => UserAction::Pivot { column: neighbor.choose(rng).unwrap().id.clone() },
        35..=49 => {
            let col = attrs.choose(rng).unwrap();
            let ColumnKind::BaseAttribute { attribute, .. } = &col.kind else { unreachable!() };
            let letter = ['a', 'e', 'i', 'o', 'n', 's'].choose(rng).unwrap().to_string();
            UserAction::filter(vec![SelectionPredicate::attribute(attribute, Comparator::Contains, letter)])
        }
        50..=64 => UserAction::Sort {
            column: table.columns.choose(rng).unwrap().id.clone(),
            direction: if rng.random() { SortDirection::Asc } else { SortDirection::Desc },
        },
        65..=72 => {
            UserAction::SetVisibility { column: table.columns.choose(rng).unwrap().id.clone(), visible: rng.random() }
        }
        73..=82 => match table.rows.choose(rng) {
            Some(row) => match neighbor.choose(rng).and_then(|c| row.refs(&c.id)).and_then(|r| r.refs.first()) {
                Some(r) if rng.random_bool(0.5) => UserAction::Single { node: r.node.clone() },
                _ => UserAction::Seeall { row: row.key.clone(), column: neighbor.choose(rng).unwrap().id.clone() },
            },
            None => UserAction::Revert { step: 1 },
        },
        83..=90 => UserAction::Revert { step: rng.random_range(1..=session.history().len()) },
        91..=95 => UserAction::Pivot { column: "nbr:missing".into() },
        _ => UserAction::Revert { step: session.history().len() + 1 },
    }
}

/// A script of `len` actions generated against a private session, so it is
/// reproducible from the seed alone.
pub fn script(rng: &mut StdRng, graph: &std::sync::Arc<etable_core::InstanceGraph>, len: usize) -> Vec<UserAction> {
    let mut session = Session::new(graph.clone());
    (0..len)
        .map(|_| {
            let action = next_action(rng, &session);
            let _ = session.apply(&action);
            action
        })
        .collect()
}

/// Like [`script`] but keeps only the actions that applied, so the result
/// replays without error.
pub fn accepted_script(
    rng: &mut StdRng,
    graph: &std::sync::Arc<etable_core::InstanceGraph>,
    len: usize,
) -> Vec<UserAction> {
    let mut session = Session::new(graph.clone());
    let mut out = Vec::new();
    while out.len() < len {
        let action = next_action(rng, &session);
        if session.apply(&action).is_ok() {
            out.push(action);
        }
    }
    out
}

/// Drops wall-clock timestamps so outcomes from different runs compare.
pub fn without_timestamps(mut v: serde_json::Value) -> serde_json::Value {
    match &mut v {
        serde_json::Value::Object(map) => {
            map.remove("timestamp");
            for x in map.values_mut() {
                *x = without_timestamps(x.take());
            }
        }
        serde_json::Value::Array(items) => {
            for x in items.iter_mut() {
                *x = without_timestamps(x.take());
            }
        }
        _ => {}
    }
    v
}
