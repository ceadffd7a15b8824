//! Builds a query pattern one operator at a time and evaluates it with the
//! join algebra after each step.

use etable_core::fixtures::academic_graph;
use etable_core::{match_pattern, Comparator, OccurrenceId, Operator, QueryPattern, SelectionPredicate};

fn main() -> etable_core::Result<()> {
    let graph = academic_graph();
    let select = |p: SelectionPredicate| Operator::Select { condition: p.into(), mode: Default::default() };
    let steps = [
        Operator::Initiate { node_type: "Conferences".into() },
        select(SelectionPredicate::attribute("name", Comparator::Eq, "SIGMOD")),
        Operator::Add { edge_type: "fk:Papers.conference_id:rev".into() },
        select(SelectionPredicate::attribute("year", Comparator::Gt, 2005i64)),
        Operator::Add { edge_type: "mn:Paper_authors".into() },
        Operator::Add { edge_type: "fk:Authors.institution_id".into() },
        select(SelectionPredicate::attribute("country", Comparator::Contains, "Korea")),
        Operator::Shift { occurrence: OccurrenceId(2) },
    ];

    let mut pattern: Option<QueryPattern> = None;
    for op in &steps {
        let next = op.apply(graph.schema(), pattern.as_ref())?;
        let matches = match_pattern(&next, &graph)?;
        let primary = next.occurrence(next.primary).expect("the primary occurrence exists");
        println!(
            "{:<8} {} occurrences, primary {} ({}), {} matching tuples",
            op.name(),
            next.occurrences.len(),
            next.primary,
            primary.node_type,
            matches.len()
        );
        pattern = Some(next);
    }

    let pattern = pattern.unwrap();
    let matches = match_pattern(&pattern, &graph)?;
    println!("\n{}", matches.to_csv(&graph)?);
    Ok(())
}
