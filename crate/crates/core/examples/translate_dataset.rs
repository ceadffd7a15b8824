//! Reverse engineers the bundled academic dataset into a typed graph and
//! prints how every relation was classified and what came out of it.
//!
//! ```text
//! cargo run -p etable-core --example translate_dataset [manifest.json data_dir]
//! ```

use etable_core::fixtures::{academic_dir, academic_manifest};
use etable_core::translate::{translate_dir, RelationManifest, TranslateOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let (manifest, dir) = match args.as_slice() {
        [m, d] => (RelationManifest::load(m)?, d.into()),
        _ => (academic_manifest(), academic_dir()),
    };
    let translation = translate_dir(&manifest, &dir, TranslateOptions { strict: false })?;
    let (graph, report) = (&translation.graph, &translation.report);

    println!("relations");
    for class in &report.classes {
        println!("  {:<16} {:?}", class.relation, class.category);
    }
    println!("node types");
    for (t, n) in graph.type_counts() {
        println!("  {t:<16} {n} nodes");
    }
    println!("edge types");
    for e in graph.schema().edge_types() {
        println!("  {:<32} {} -> {}", e.id, e.source_type, e.target_type);
    }
    println!("{} nodes, {} edges, clean: {}", report.node_count, report.edge_count, report.is_clean());
    Ok(())
}
