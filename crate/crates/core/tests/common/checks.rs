//! Per-case comparisons between the engine and the oracles. Each returns a
//! description of the first disagreement.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use etable_core::algebra::match_with_order;
use etable_core::etable::{participating_column_id, ColumnKind};
use etable_core::pattern::replay;
use etable_core::{
    match_pattern, materialize, pattern_from_join_query, InstanceGraph, QueryPattern, Session, UserAction,
};
use rand::Rng;

use super::actions::{random_invalid_action, random_valid_action};
use super::oracle::{brute_force_match, expected_rows, scan_neighbors};
use super::relational::{evaluate, Database};

pub type Check = Result<(), String>;

fn engine_tuples(pattern: &QueryPattern, graph: &InstanceGraph) -> Result<BTreeSet<Vec<String>>, String> {
    let rel = match_pattern(pattern, graph).map_err(|e| format!("match failed: {e}"))?;
    Ok(rel.id_tuples(graph).into_iter().collect())
}

pub fn match_equals_brute_force(graph: &InstanceGraph, pattern: &QueryPattern) -> Check {
    let engine = engine_tuples(pattern, graph)?;
    let oracle = brute_force_match(graph, pattern);
    if engine != oracle {
        return Err(format!(
            "engine {} tuples vs oracle {} tuples for {:?}",
            engine.len(),
            oracle.len(),
            serde_json::to_string(pattern).unwrap()
        ));
    }
    Ok(())
}

pub fn orders_agree(graph: &InstanceGraph, pattern: &QueryPattern, rng: &mut impl Rng, orders: usize) -> Check {
    let reference = engine_tuples(pattern, graph)?;
    let ids: Vec<_> = pattern.occurrences.iter().map(|o| o.id).collect();
    for _ in 0..orders {
        let order = super::graphs::random_order(rng, pattern);
        let rel = match_with_order(pattern, graph, &order).map_err(|e| format!("order {order:?}: {e}"))?;
        let rel = rel.reordered(&ids).map_err(|e| e.to_string())?;
        let got: BTreeSet<_> = rel.id_tuples(graph).into_iter().collect();
        if got != reference {
            return Err(format!("order {order:?} gives {} tuples, primary-first gives {}", got.len(), reference.len()));
        }
    }
    Ok(())
}

/// Row keys, participating cells and neighbor cells against the oracle.
pub fn etable_consistent(graph: &InstanceGraph, pattern: &QueryPattern) -> Check {
    let table = materialize(pattern, graph).map_err(|e| e.to_string())?;
    let expected = expected_rows(graph, pattern);
    let keys: BTreeSet<String> = table.rows.iter().map(|r| r.key.clone()).collect();
    let want: BTreeSet<String> = expected.keys().cloned().collect();
    if keys != want {
        return Err(format!("row keys {keys:?} vs expected {want:?}"));
    }
    if table.total_row_count != want.len() {
        return Err("total_row_count disagrees with the row list".into());
    }
    let primary_type = &pattern.primary_occurrence().unwrap().node_type;
    let expected_nbr: BTreeSet<String> =
        graph.schema().edges_from(primary_type).map(|e| format!("nbr:{}", e.id)).collect();
    let got_nbr: BTreeSet<String> =
        table.columns.iter().filter(|c| matches!(c.kind, ColumnKind::Neighbor { .. })).map(|c| c.id.clone()).collect();
    if got_nbr != expected_nbr {
        return Err(format!("neighbor columns {got_nbr:?} vs {expected_nbr:?}"));
    }
    for row in &table.rows {
        let parts = &expected[&row.key];
        for (pos, occ) in pattern.occurrences.iter().enumerate() {
            if occ.id == pattern.primary {
                continue;
            }
            let col = participating_column_id(occ.id);
            let cell: BTreeSet<String> = row
                .refs(&col)
                .ok_or_else(|| format!("row {} lacks {col}", row.key))?
                .nodes()
                .map(String::from)
                .collect();
            let want = parts.get(&pos).cloned().unwrap_or_default();
            if cell != want {
                return Err(format!("row {} column {col}: {cell:?} vs {want:?}", row.key));
            }
        }
        for c in &table.columns {
            let ColumnKind::Neighbor { edge_type, .. } = &c.kind else { continue };
            let refs = row.refs(&c.id).ok_or_else(|| format!("row {} lacks {}", row.key, c.id))?;
            let cell: BTreeSet<String> = refs.nodes().map(String::from).collect();
            let want = scan_neighbors(graph, &row.key, edge_type);
            if cell != want || refs.count != want.len() {
                return Err(format!("row {} column {}: {cell:?} vs {want:?}", row.key, c.id));
            }
        }
    }
    Ok(())
}

/// Flat tuple count never undercuts the row count, and strictly exceeds it
/// exactly when some primary node matches more than once.
pub fn duplication_collapse(graph: &InstanceGraph, pattern: &QueryPattern) -> Check {
    let tuples = brute_force_match(graph, pattern);
    let table = materialize(pattern, graph).map_err(|e| e.to_string())?;
    let p = pattern.occurrences.iter().position(|o| o.id == pattern.primary).unwrap();
    let mut per_key: BTreeMap<&str, usize> = BTreeMap::new();
    for t in &tuples {
        *per_key.entry(t[p].as_str()).or_default() += 1;
    }
    let duplicated = per_key.values().any(|&n| n >= 2);
    let ok = if duplicated { tuples.len() > table.rows.len() } else { tuples.len() == table.rows.len() };
    if !ok {
        return Err(format!("{} tuples vs {} rows (duplicated: {duplicated})", tuples.len(), table.rows.len()));
    }
    Ok(())
}

pub fn join_query_sound(db: &Database, graph: &InstanceGraph, query: &etable_core::JoinQuerySpec) -> Check {
    let pattern = pattern_from_join_query(query, graph.schema()).map_err(|e| format!("{e} for {query:?}"))?;
    let table = materialize(&pattern, graph).map_err(|e| e.to_string())?;
    let oracle = evaluate(db, query);
    let keys: BTreeSet<&str> = table.rows.iter().map(|r| r.key.as_str()).collect();
    let want: BTreeSet<&str> = oracle.keys().map(String::as_str).collect();
    if keys != want {
        return Err(format!("group keys {want:?} vs row keys {keys:?} for {query:?}"));
    }
    for row in &table.rows {
        for occ in &pattern.occurrences {
            if occ.id == pattern.primary {
                continue;
            }
            let cell: BTreeSet<String> =
                row.refs(&participating_column_id(occ.id)).unwrap().nodes().map(String::from).collect();
            let want = oracle[&row.key].get(&occ.alias).cloned().unwrap_or_default();
            if cell != want {
                return Err(format!("row {} alias {}: {cell:?} vs {want:?} for {query:?}", row.key, occ.alias));
            }
        }
    }
    Ok(())
}

/// Observable session state compared across an action.
fn snapshot(s: &Session) -> String {
    serde_json::json!({
        "history": s.history(),
        "presentation": s.presentation(),
        "table": s.table().ok(),
        "page": s.current_page().ok(),
    })
    .to_string()
}

/// Statistics from one random session run.
#[derive(Debug, Default, Clone, Copy)]
pub struct SessionRun {
    pub valid: usize,
    pub invalid: usize,
}

/// Drives a session through up to `max_len` random actions, a quarter of
/// them invalid. After every accepted action the served table must equal a
/// from-scratch recomputation and a replay of the accepted actions on a
/// fresh session; every rejected action must leave the state untouched.
pub fn session_sequence(graph: &Arc<InstanceGraph>, rng: &mut impl Rng, max_len: usize) -> Result<SessionRun, String> {
    let mut session = Session::new(graph.clone());
    let mut accepted: Vec<UserAction> = Vec::new();
    let mut run = SessionRun::default();
    let len = rng.random_range(1..=max_len);
    for step in 0..len {
        if rng.random_bool(0.25) {
            let action = random_invalid_action(rng, &session);
            let before = snapshot(&session);
            if session.apply(&action).is_ok() {
                return Err(format!("step {step}: invalid {action:?} was accepted"));
            }
            if snapshot(&session) != before {
                return Err(format!("step {step}: rejected {action:?} changed the session"));
            }
            run.invalid += 1;
            continue;
        }
        let action = random_valid_action(rng, &session);
        session.apply(&action).map_err(|e| format!("step {step}: {action:?} failed: {e}"))?;
        accepted.push(action);
        run.valid += 1;

        let pattern = replay(graph.schema(), session.history()).map_err(|e| e.to_string())?;
        if &pattern != session.pattern().unwrap() {
            return Err(format!("step {step}: replayed pattern differs"));
        }
        let fresh = materialize(&pattern, graph).map_err(|e| e.to_string())?;
        let presented = session.presentation().apply(&fresh).map_err(|e| e.to_string())?;
        if presented != session.table().unwrap() {
            return Err(format!("step {step}: served table differs from recomputation"));
        }
        let keys: BTreeSet<String> = fresh.rows.iter().map(|r| r.key.clone()).collect();
        let want: BTreeSet<String> = expected_rows(graph, &pattern).into_keys().collect();
        if keys != want {
            return Err(format!("step {step}: row keys differ from the brute-force answer"));
        }
        let mut again = Session::new(graph.clone());
        for a in &accepted {
            again.apply(a).map_err(|e| format!("replaying {a:?}: {e}"))?;
        }
        if again.table().unwrap() != session.table().unwrap() || again.presentation() != session.presentation() {
            return Err(format!("step {step}: replay of accepted actions diverges"));
        }
    }
    Ok(run)
}
