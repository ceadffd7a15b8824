//! Exploration sessions driven by user-level actions.
//!
//! Query-changing actions append primitive operators to the history:
//!
//! | action  | operators appended                                        |
//! |---------|-----------------------------------------------------------|
//! | Open    | history reset to `Initiate(type)`                         |
//! | Filter  | `Select(condition)`                                       |
//! | Pivot   | `Add(edge)` on a neighbor column, `Shift(occ)` otherwise  |
//! | Single  | history reset to `Initiate(type(v))`, `Select(id = v)`    |
//! | Seeall  | `Select(id = row)` then `Add(edge)` or `Shift(occ)`       |
//! | Revert  | history truncated                                         |
//!
//! Sort and SetVisibility only touch presentation state. Every action is
//! computed on copies and committed at the end, so a failing action leaves
//! the session exactly as it was.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::etable::{
    materialize, paginate, set_column_visibility, sort_rows, ColumnKind, ETable, Page, SortDirection, SortSpec,
    DEFAULT_PAGE_SIZE,
};
use crate::pattern::{
    replay, Operator, OperatorRecord, QueryPattern, SelectMode, SelectionCondition, SelectionPredicate,
};
use crate::tgdb::InstanceGraph;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "args")]
pub enum UserAction {
    Open {
        node_type: String,
    },
    Filter {
        predicates: Vec<SelectionPredicate>,
        #[serde(default)]
        mode: SelectMode,
    },
    Pivot {
        column: String,
    },
    Single {
        node: String,
    },
    Seeall {
        row: String,
        column: String,
    },
    Sort {
        column: String,
        #[serde(default)]
        direction: SortDirection,
    },
    SetVisibility {
        column: String,
        visible: bool,
    },
    Revert {
        step: usize,
    },
}

impl UserAction {
    pub fn name(&self) -> &'static str {
        match self {
            UserAction::Open { .. } => "Open",
            UserAction::Filter { .. } => "Filter",
            UserAction::Pivot { .. } => "Pivot",
            UserAction::Single { .. } => "Single",
            UserAction::Seeall { .. } => "Seeall",
            UserAction::Sort { .. } => "Sort",
            UserAction::SetVisibility { .. } => "SetVisibility",
            UserAction::Revert { .. } => "Revert",
        }
    }

    pub fn filter(predicates: Vec<SelectionPredicate>) -> Self {
        UserAction::Filter { predicates, mode: SelectMode::Conjoin }
    }
}

/// Sort, hidden columns and current page. Independent of the query history.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Presentation {
    pub sort: Option<SortSpec>,
    pub hidden: Vec<String>,
    pub page: usize,
}

impl Presentation {
    fn reset() -> Self {
        Self { sort: None, hidden: Vec::new(), page: 1 }
    }

    /// Applies sort and visibility to a freshly materialized table. Columns
    /// that no longer exist are ignored.
    pub fn apply(&self, table: &ETable) -> Result<ETable> {
        let mut t = table.clone();
        for c in &self.hidden {
            if t.column(c).is_some() {
                t = set_column_visibility(&t, c, false)?;
            }
        }
        if let Some(s) = &self.sort {
            if t.column(&s.column).is_some() {
                t = sort_rows(&t, &s.column, s.direction)?;
            }
        }
        Ok(t)
    }
}

/// Everything a client needs after an action: the page, the current
/// pattern and the operator history.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionOutcome {
    pub page: Page,
    pub pattern: QueryPattern,
    pub history: Vec<OperatorRecord>,
}

#[derive(Debug, Clone)]
pub struct Session {
    graph: Arc<InstanceGraph>,
    history: Vec<OperatorRecord>,
    presentation: Presentation,
    page_size: usize,
    /// `materialize(replay(history))`, recomputed whenever history changes.
    table: Option<ETable>,
}

impl Session {
    pub fn new(graph: Arc<InstanceGraph>) -> Self {
        Self::with_page_size(graph, DEFAULT_PAGE_SIZE)
    }

    pub fn with_page_size(graph: Arc<InstanceGraph>, page_size: usize) -> Self {
        Self {
            graph,
            history: Vec::new(),
            presentation: Presentation::reset(),
            page_size: page_size.max(1),
            table: None,
        }
    }

    pub fn graph(&self) -> &InstanceGraph {
        &self.graph
    }

    pub fn history(&self) -> &[OperatorRecord] {
        &self.history
    }

    pub fn presentation(&self) -> &Presentation {
        &self.presentation
    }

    pub fn page_size(&self) -> usize {
        self.page_size
    }

    pub fn pattern(&self) -> Result<&QueryPattern> {
        self.table.as_ref().map(|t| &t.pattern).ok_or(Error::NoTable)
    }

    /// The current table with presentation applied.
    pub fn table(&self) -> Result<ETable> {
        let t = self.table.as_ref().ok_or(Error::NoTable)?;
        self.presentation.apply(t)
    }

    /// Rebuilds the presented table from the history alone, bypassing the
    /// stored copy.
    pub fn recompute(&self) -> Result<ETable> {
        let pattern = replay(self.graph.schema(), &self.history)?;
        self.presentation.apply(&materialize(&pattern, &self.graph)?)
    }

    pub fn page(&self, page: usize, page_size: usize) -> Result<Page> {
        paginate(&self.table()?, page, page_size)
    }

    pub fn current_page(&self) -> Result<Page> {
        self.page(self.presentation.page, self.page_size)
    }

    pub fn outcome(&self) -> Result<ActionOutcome> {
        Ok(ActionOutcome {
            page: self.current_page()?,
            pattern: self.pattern()?.clone(),
            history: self.history.clone(),
        })
    }

    /// Applies one action atomically and returns the refreshed page.
    pub fn apply(&mut self, action: &UserAction) -> Result<Page> {
        match action {
            UserAction::Open { node_type } => self.act_open(node_type),
            UserAction::Filter { predicates, mode } => {
                self.act_filter_with(&SelectionCondition::new(predicates.clone()), *mode)
            }
            UserAction::Pivot { column } => self.act_pivot(column),
            UserAction::Single { node } => self.act_single(node),
            UserAction::Seeall { row, column } => self.act_seeall(row, column),
            UserAction::Sort { column, direction } => self.act_sort(column, *direction),
            UserAction::SetVisibility { column, visible } => self.act_set_visibility(column, *visible),
            UserAction::Revert { step } => self.act_revert(*step),
        }
    }

    pub fn act_open(&mut self, node_type: &str) -> Result<Page> {
        let ops = [Operator::Initiate { node_type: node_type.to_string() }];
        self.commit(Vec::new(), &ops, Presentation::reset())
    }

    pub fn act_filter(&mut self, condition: &SelectionCondition) -> Result<Page> {
        self.act_filter_with(condition, SelectMode::Conjoin)
    }

    pub fn act_filter_with(&mut self, condition: &SelectionCondition, mode: SelectMode) -> Result<Page> {
        self.require_table()?;
        let op = Operator::Select { condition: condition.clone(), mode };
        let presentation = Presentation { page: 1, ..self.presentation.clone() };
        self.commit(self.history.clone(), &[op], presentation)
    }

    pub fn act_pivot(&mut self, column: &str) -> Result<Page> {
        let table = self.require_table()?;
        let col = table.find_column(column)?;
        let op = match &col.kind {
            ColumnKind::Neighbor { edge_type, .. } => Operator::Add { edge_type: edge_type.clone() },
            ColumnKind::Participating { occurrence, .. } => Operator::Shift { occurrence: *occurrence },
            ColumnKind::BaseAttribute { attribute, .. } => return Err(Error::InvalidPivot(attribute.clone())),
        };
        self.commit(self.history.clone(), &[op], Presentation::reset())
    }

    pub fn act_single(&mut self, node: &str) -> Result<Page> {
        let ix = self.graph.require_node(node)?;
        let n = self.graph.node_at(ix);
        let ops = [
            Operator::Initiate { node_type: n.node_type.clone() },
            Operator::Select { condition: SelectionPredicate::node(&n.id).into(), mode: SelectMode::Conjoin },
        ];
        self.commit(Vec::new(), &ops, Presentation::reset())
    }

    pub fn act_seeall(&mut self, row: &str, column: &str) -> Result<Page> {
        let table = self.require_table()?;
        if table.row(row).is_none() {
            return Err(Error::UnknownRow(row.to_string()));
        }
        let col = table.find_column(column)?;
        let expand = match &col.kind {
            ColumnKind::Neighbor { edge_type, .. } => Operator::Add { edge_type: edge_type.clone() },
            ColumnKind::Participating { occurrence, .. } => Operator::Shift { occurrence: *occurrence },
            ColumnKind::BaseAttribute { attribute, .. } => return Err(Error::InvalidColumn(attribute.clone())),
        };
        let select = Operator::Select { condition: SelectionPredicate::node(row).into(), mode: SelectMode::Conjoin };
        self.commit(self.history.clone(), &[select, expand], Presentation::reset())
    }

    pub fn act_sort(&mut self, column: &str, direction: SortDirection) -> Result<Page> {
        let id = self.require_table()?.find_column(column)?.id.clone();
        let presentation =
            Presentation { sort: Some(SortSpec { column: id, direction }), page: 1, ..self.presentation.clone() };
        self.set_presentation(presentation)
    }

    pub fn act_set_visibility(&mut self, column: &str, visible: bool) -> Result<Page> {
        let id = self.require_table()?.find_column(column)?.id.clone();
        let mut presentation = self.presentation.clone();
        presentation.hidden.retain(|c| *c != id);
        if !visible {
            presentation.hidden.push(id);
        }
        self.set_presentation(presentation)
    }

    pub fn act_revert(&mut self, step: usize) -> Result<Page> {
        if step == 0 || step > self.history.len() {
            return Err(Error::OutOfRange { step, len: self.history.len() });
        }
        let history = self.history[..step].to_vec();
        let pattern = replay(self.graph.schema(), &history)?;
        let table = materialize(&pattern, &self.graph)?;
        self.install(history, table, Presentation::reset())
    }

    fn require_table(&self) -> Result<&ETable> {
        self.table.as_ref().ok_or(Error::NoTable)
    }

    /// Appends `ops` to `base`, replays the result from scratch and swaps it
    /// in only if every step succeeds.
    fn commit(&mut self, base: Vec<OperatorRecord>, ops: &[Operator], presentation: Presentation) -> Result<Page> {
        let schema = self.graph.schema();
        let mut history = base;
        let mut current = history.last().map(|r| r.snapshot.clone());
        for op in ops {
            let next = op.apply(schema, current.as_ref())?;
            history.push(OperatorRecord::new(op.clone(), next.clone()));
            current = Some(next);
        }
        let pattern = replay(schema, &history)?;
        let table = materialize(&pattern, &self.graph)?;
        self.install(history, table, presentation)
    }

    fn set_presentation(&mut self, presentation: Presentation) -> Result<Page> {
        let table = self.require_table()?.clone();
        self.install(self.history.clone(), table, presentation)
    }

    fn install(&mut self, history: Vec<OperatorRecord>, table: ETable, presentation: Presentation) -> Result<Page> {
        let page = paginate(&presentation.apply(&table)?, presentation.page, self.page_size)?;
        self.history = history;
        self.table = Some(table);
        self.presentation = presentation;
        Ok(page)
    }
}
