//! Materializes an enriched table for a small pattern and shows the three
//! kinds of columns: base attributes, participating occurrences and
//! neighbor sets. Then sorts by a set-valued column and pages through it.

use etable_core::etable::{paginate, sort_rows, Cell, ColumnKind, SortDirection};
use etable_core::fixtures::academic_graph;
use etable_core::{apply_add, apply_shift, initiate, materialize, OccurrenceId};

fn main() -> etable_core::Result<()> {
    let graph = academic_graph();
    let papers = initiate(graph.schema(), "Papers")?;
    let with_venue = apply_add(graph.schema(), &papers, "fk:Papers.conference_id")?;
    let pattern = apply_shift(&with_venue, OccurrenceId(0))?;
    let table = materialize(&pattern, &graph)?;

    println!("{} rows", table.total_row_count);
    for c in &table.columns {
        let kind = match &c.kind {
            ColumnKind::BaseAttribute { .. } => "attribute",
            ColumnKind::Participating { .. } => "participating",
            ColumnKind::Neighbor { .. } => "neighbor",
        };
        println!("  {:<36} {:<14} {}", c.id, kind, c.header);
    }

    let by_authors = sort_rows(&table, "nbr:mn:Paper_authors", SortDirection::Desc)?;
    let first = paginate(&by_authors, 1, 5)?;
    println!("\nmost authors first, page 1 of {}:", first.page_count);
    for row in &first.rows {
        let authors = match row.cell("nbr:mn:Paper_authors") {
            Some(Cell::Refs(set)) => format!("{} authors", set.count),
            _ => String::new(),
        };
        println!("  {:<10} {:<55} {authors}", row.key, row.label);
    }
    Ok(())
}
