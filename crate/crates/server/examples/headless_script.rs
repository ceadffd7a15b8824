//! Replays an action script without a server and prints the final table as
//! CSV, the same output `etable script --format csv` produces.
//!
//! ```text
//! cargo run -p etable-server --example headless_script [script.json]
//! ```

use std::sync::Arc;

use etable_core::fixtures::academic_graph;
use etable_server::script::parse_script;
use etable_server::{run_script, ScriptFormat};

const DEFAULT_SCRIPT: &str = r#"[
  {"kind": "Open", "args": {"node_type": "Conferences"}},
  {"kind": "Pivot", "args": {"column": "nbr:fk:Papers.conference_id:rev"}},
  {"kind": "Filter", "args": {"predicates": [
    {"target": {"kind": "attribute", "name": "title"}, "op": "contains", "value": "graph"}
  ]}},
  {"kind": "Sort", "args": {"column": "attr:year", "direction": "desc"}},
  {"kind": "SetVisibility", "args": {"column": "attr:conference_id", "visible": false}}
]"#;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let text = match std::env::args().nth(1) {
        Some(path) => std::fs::read_to_string(path)?,
        None => DEFAULT_SCRIPT.to_string(),
    };
    let actions = parse_script(&text)?;
    print!("{}", run_script(Arc::new(academic_graph()), &actions, ScriptFormat::Csv)?);
    Ok(())
}
