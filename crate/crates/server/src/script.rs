//! Headless replay of an action script against a graph.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use etable_core::etable::{paginate, Page};
use etable_core::{Error, InstanceGraph, Session, UserAction};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ScriptFormat {
    #[default]
    Json,
    Csv,
}

impl FromStr for ScriptFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(ScriptFormat::Json),
            "csv" => Ok(ScriptFormat::Csv),
            other => Err(format!("unknown format `{other}`, expected json or csv")),
        }
    }
}

/// A failed script: `step` counts from 1; zero means the script itself
/// could not be read.
#[derive(Debug, Clone, PartialEq)]
pub struct ScriptError {
    pub step: usize,
    pub error: Error,
}

impl fmt::Display for ScriptError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.step == 0 {
            write!(f, "script: {}", self.error)
        } else {
            write!(f, "step {}: {}", self.step, self.error)
        }
    }
}

impl std::error::Error for ScriptError {}

pub fn parse_script(text: &str) -> Result<Vec<UserAction>, ScriptError> {
    serde_json::from_str(text).map_err(|e| ScriptError { step: 0, error: e.into() })
}

/// Applies `actions` to a fresh session and returns it.
pub fn replay_actions(graph: Arc<InstanceGraph>, actions: &[UserAction]) -> Result<Session, ScriptError> {
    match actions.first() {
        Some(UserAction::Open { .. }) => {}
        _ => {
            return Err(ScriptError { step: 1, error: Error::InvalidArgument("a script must start with Open".into()) });
        }
    }
    let mut session = Session::new(graph);
    for (i, action) in actions.iter().enumerate() {
        session.apply(action).map_err(|error| ScriptError { step: i + 1, error })?;
    }
    Ok(session)
}

/// The whole presented table as a single page, which is also what
/// `GET /sessions/{id}/table?page=1&size=<total>` returns.
pub fn full_page(session: &Session) -> Result<Page, Error> {
    let table = session.table()?;
    paginate(&table, 1, table.rows.len().max(1))
}

/// Runs the script and renders the final table.
pub fn run_script(
    graph: Arc<InstanceGraph>,
    actions: &[UserAction],
    format: ScriptFormat,
) -> Result<String, ScriptError> {
    let session = replay_actions(graph, actions)?;
    let last = actions.len();
    let wrap = |error| ScriptError { step: last, error };
    match format {
        ScriptFormat::Json => {
            let page = full_page(&session).map_err(wrap)?;
            serde_json::to_string_pretty(&page).map_err(|e| wrap(e.into()))
        }
        ScriptFormat::Csv => session.table().and_then(|t| t.to_csv()).map_err(wrap),
    }
}
