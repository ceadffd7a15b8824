//! Renders patterns as SQL and turns a hand-written join query back into a
//! pattern that the engine can evaluate.

use etable_core::fixtures::academic_graph;
use etable_core::sql::join_query_from_pattern;
use etable_core::{emit_sql, materialize, pattern_from_join_query, Comparator, JoinQuerySpec, SelectionPredicate};

fn main() -> etable_core::Result<()> {
    let graph = academic_graph();
    let schema = graph.schema();

    // Authors at KAIST together with the papers they wrote.
    let query = JoinQuerySpec::default()
        .relation("Authors", "a")
        .relation("Institutions", "i")
        .relation("Paper_authors", "pa")
        .relation("Papers", "p")
        .join(("a", "institution_id"), ("i", "institution_id"))
        .join(("pa", "author_id"), ("a", "author_id"))
        .join(("pa", "paper_id"), ("p", "paper_id"))
        .select("i", SelectionPredicate::attribute("name", Comparator::Eq, "KAIST"))
        .group_by("a");

    let pattern = pattern_from_join_query(&query, schema)?;
    println!("pattern: {} occurrences, {} edges", pattern.occurrences.len(), pattern.edges.len());
    for e in &pattern.edges {
        println!("  {} -[{}]-> {}", e.from, e.edge_type, e.to);
    }

    println!("\n{}\n", emit_sql(&pattern, schema)?.statement);

    let table = materialize(&pattern, &graph)?;
    for row in &table.rows {
        println!("  {:<12} {}", row.key, row.label);
    }

    let back = join_query_from_pattern(&pattern, schema)?;
    println!("\nback to {} relations and {} join conditions", back.relations.len(), back.join_conditions.len());
    Ok(())
}
