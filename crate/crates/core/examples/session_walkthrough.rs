//! Drives an exploration session the way the browser client does: open,
//! filter, pivot, sort, then revert to an earlier step. Prints the first
//! rows after every action and the operator history at the end.

use etable_core::etable::SortDirection;
use etable_core::fixtures::academic_graph;
use etable_core::{Comparator, Page, SelectionPredicate, Session, UserAction};
use std::sync::Arc;

fn show(action: &UserAction, page: &Page) {
    let labels: Vec<&str> = page.rows.iter().take(4).map(|r| r.label.as_str()).collect();
    println!("{:<14} {:>3} rows  {}", action.name(), page.total_row_count, labels.join(" | "));
}

fn main() -> etable_core::Result<()> {
    let mut session = Session::with_page_size(Arc::new(academic_graph()), 10);
    let actions = [
        UserAction::Open { node_type: "Institutions".into() },
        UserAction::filter(vec![SelectionPredicate::attribute("country", Comparator::Eq, "USA")]),
        UserAction::Pivot { column: "nbr:fk:Authors.institution_id:rev".into() },
        UserAction::Sort { column: "nbr:mn:Paper_authors:rev".into(), direction: SortDirection::Desc },
        UserAction::Pivot { column: "nbr:mn:Paper_authors:rev".into() },
        UserAction::Revert { step: 3 },
    ];
    for action in &actions {
        let page = session.apply(action)?;
        show(action, &page);
    }

    println!("\nhistory");
    for (i, record) in session.history().iter().enumerate() {
        println!("  {}: {}", i + 1, serde_json::to_string(&record.operator).unwrap());
    }
    Ok(())
}
