//! Query patterns and the four primitive operators that build them.
//!
//! A pattern is a tree of *occurrences* (a node type may occur more than
//! once, so edges bind occurrences rather than types), one of which is the
//! primary occurrence whose nodes become table rows. Patterns are values:
//! every operator returns a new pattern and leaves its input alone.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tgdb::{InstanceGraph, NodeIx, SchemaGraph};
use crate::translate::dedup_name;
use crate::value::{Value, ValueKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct OccurrenceId(pub u32);

impl fmt::Display for OccurrenceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PredicateTarget {
    /// A base attribute of the occurrence's node type.
    Attribute { name: String },
    /// The labels of neighbors reached through an edge type; satisfied when
    /// at least one neighbor's label matches.
    NeighborLabel { edge_type: String },
    /// The node itself, compared by id.
    Node,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Comparator {
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = "!=")]
    Ne,
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">")]
    Gt,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = "contains")]
    Contains,
}

impl Comparator {
    pub fn symbol(self) -> &'static str {
        match self {
            Comparator::Eq => "=",
            Comparator::Ne => "!=",
            Comparator::Lt => "<",
            Comparator::Le => "<=",
            Comparator::Gt => ">",
            Comparator::Ge => ">=",
            Comparator::Contains => "contains",
        }
    }

    fn holds(self, ord: std::cmp::Ordering) -> bool {
        use std::cmp::Ordering::*;
        match self {
            Comparator::Eq => ord == Equal,
            Comparator::Ne => ord != Equal,
            Comparator::Lt => ord == Less,
            Comparator::Le => ord != Greater,
            Comparator::Gt => ord == Greater,
            Comparator::Ge => ord != Less,
            Comparator::Contains => false,
        }
    }
}

/// Case-insensitive substring test used by `contains`.
pub fn text_contains(haystack: &str, needle: &str) -> bool {
    haystack.to_lowercase().contains(&needle.to_lowercase())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionPredicate {
    pub target: PredicateTarget,
    #[serde(rename = "op")]
    pub comparator: Comparator,
    #[serde(rename = "value")]
    pub operand: Value,
}

impl SelectionPredicate {
    pub fn attribute(name: &str, comparator: Comparator, operand: impl Into<Value>) -> Self {
        Self { target: PredicateTarget::Attribute { name: name.into() }, comparator, operand: operand.into() }
    }

    pub fn neighbor_label(edge_type: &str, comparator: Comparator, operand: impl Into<Value>) -> Self {
        Self {
            target: PredicateTarget::NeighborLabel { edge_type: edge_type.into() },
            comparator,
            operand: operand.into(),
        }
    }

    /// Restricts to a single node.
    pub fn node(id: &str) -> Self {
        Self { target: PredicateTarget::Node, comparator: Comparator::Eq, operand: Value::text(id) }
    }

    /// Checks the predicate against `node_type` and coerces the operand to
    /// the attribute's kind.
    pub fn checked(&self, schema: &SchemaGraph, node_type: &str) -> Result<SelectionPredicate> {
        let t = schema.require_node_type(node_type)?;
        if self.operand.is_null() {
            return Err(Error::Predicate("operand must not be null".into()));
        }
        let operand = match &self.target {
            PredicateTarget::Attribute { name } => {
                let def = t
                    .attribute(name)
                    .ok_or_else(|| Error::Predicate(format!("`{}` has no attribute `{name}`", t.id)))?;
                if self.comparator == Comparator::Contains && def.value_kind != ValueKind::Text {
                    return Err(Error::Predicate(format!("`contains` needs text, `{name}` is {}", def.value_kind)));
                }
                self.operand
                    .clone()
                    .coerce(def.value_kind)
                    .map_err(|e| Error::Predicate(format!("operand for `{name}`: {e}")))?
            }
            PredicateTarget::NeighborLabel { edge_type } => {
                let et = schema
                    .edge_type(edge_type)
                    .ok_or_else(|| Error::Predicate(format!("unknown edge type `{edge_type}`")))?;
                if et.source_type != t.id {
                    return Err(Error::Predicate(format!("edge type `{edge_type}` does not leave `{}`", t.id)));
                }
                if !matches!(self.comparator, Comparator::Eq | Comparator::Contains) {
                    return Err(Error::Predicate("neighbor labels support only `=` and `contains`".into()));
                }
                Value::text(self.operand.to_string())
            }
            PredicateTarget::Node => {
                if !matches!(self.comparator, Comparator::Eq | Comparator::Ne) {
                    return Err(Error::Predicate("node identity supports only `=` and `!=`".into()));
                }
                Value::text(self.operand.to_string())
            }
        };
        Ok(SelectionPredicate { target: self.target.clone(), comparator: self.comparator, operand })
    }

    pub fn matches(&self, graph: &InstanceGraph, node: NodeIx) -> bool {
        match &self.target {
            PredicateTarget::Attribute { name } => {
                let v = graph.node_at(node).value(name);
                if v.is_null() {
                    return false;
                }
                match self.comparator {
                    Comparator::Contains => match (v.as_text(), self.operand.as_text()) {
                        (Some(h), Some(n)) => text_contains(h, n),
                        _ => false,
                    },
                    cmp => v.compare(&self.operand).is_some_and(|o| cmp.holds(o)),
                }
            }
            PredicateTarget::NeighborLabel { edge_type } => {
                let needle = self.operand.to_string();
                graph.neighbor_ixs(node, edge_type).iter().any(|&n| {
                    let label = graph.label_at(n);
                    match self.comparator {
                        Comparator::Contains => text_contains(&label, &needle),
                        _ => label == needle,
                    }
                })
            }
            PredicateTarget::Node => {
                let same = graph.node_at(node).id == self.operand.to_string();
                match self.comparator {
                    Comparator::Ne => !same,
                    _ => same,
                }
            }
        }
    }
}

impl fmt::Display for SelectionPredicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let quoted = |v: &Value| match v {
            Value::Text(s) => format!("{s:?}"),
            other => other.to_string(),
        };
        match &self.target {
            PredicateTarget::Attribute { name } => {
                write!(f, "{name} {} {}", self.comparator.symbol(), quoted(&self.operand))
            }
            PredicateTarget::NeighborLabel { edge_type } => {
                write!(f, "[{edge_type}] {} {}", self.comparator.symbol(), quoted(&self.operand))
            }
            PredicateTarget::Node => write!(f, "id {} {}", self.comparator.symbol(), quoted(&self.operand)),
        }
    }
}

/// A conjunction of predicates. The empty condition accepts everything.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SelectionCondition {
    #[serde(default)]
    pub predicates: Vec<SelectionPredicate>,
}

impl SelectionCondition {
    pub fn all() -> Self {
        Self::default()
    }

    pub fn new(predicates: Vec<SelectionPredicate>) -> Self {
        Self { predicates }
    }

    pub fn is_empty(&self) -> bool {
        self.predicates.is_empty()
    }

    pub fn matches(&self, graph: &InstanceGraph, node: NodeIx) -> bool {
        self.predicates.iter().all(|p| p.matches(graph, node))
    }

    fn checked(&self, schema: &SchemaGraph, node_type: &str) -> Result<Self> {
        Ok(Self { predicates: self.predicates.iter().map(|p| p.checked(schema, node_type)).collect::<Result<_>>()? })
    }
}

impl From<SelectionPredicate> for SelectionCondition {
    fn from(p: SelectionPredicate) -> Self {
        Self { predicates: vec![p] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternOccurrence {
    pub id: OccurrenceId,
    pub node_type: String,
    #[serde(default)]
    pub condition: SelectionCondition,
    pub alias: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatternEdge {
    pub edge_type: String,
    pub from: OccurrenceId,
    pub to: OccurrenceId,
}

/// A rooted tree of occurrences with per-occurrence conditions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryPattern {
    pub occurrences: Vec<PatternOccurrence>,
    pub edges: Vec<PatternEdge>,
    pub primary: OccurrenceId,
}

impl QueryPattern {
    pub fn occurrence(&self, id: OccurrenceId) -> Option<&PatternOccurrence> {
        self.occurrences.iter().find(|o| o.id == id)
    }

    pub fn require_occurrence(&self, id: OccurrenceId) -> Result<&PatternOccurrence> {
        self.occurrence(id).ok_or(Error::UnknownOccurrence(id.0))
    }

    pub fn primary_occurrence(&self) -> Result<&PatternOccurrence> {
        self.occurrence(self.primary)
            .ok_or_else(|| Error::Pattern(format!("primary occurrence {} is missing", self.primary)))
    }

    pub fn primary_type(&self) -> Result<&str> {
        Ok(&self.primary_occurrence()?.node_type)
    }

    fn occurrence_mut(&mut self, id: OccurrenceId) -> Option<&mut PatternOccurrence> {
        self.occurrences.iter_mut().find(|o| o.id == id)
    }

    fn next_id(&self) -> OccurrenceId {
        OccurrenceId(self.occurrences.iter().map(|o| o.id.0 + 1).max().unwrap_or(0))
    }

    /// Alias for a new occurrence of `type_name`: the name itself, suffixed
    /// when already used.
    pub fn fresh_alias(&self, type_name: &str) -> String {
        dedup_name(type_name, |n| self.occurrences.iter().any(|o| o.alias == n))
    }

    /// Pattern edges touching `occ`, each with the occurrence at its other end.
    pub fn incident(&self, occ: OccurrenceId) -> impl Iterator<Item = (&PatternEdge, OccurrenceId)> + '_ {
        self.edges.iter().filter_map(move |e| {
            if e.from == occ {
                Some((e, e.to))
            } else if e.to == occ {
                Some((e, e.from))
            } else {
                None
            }
        })
    }

    /// Total number of predicates across all occurrences.
    pub fn predicate_count(&self) -> usize {
        self.occurrences.iter().map(|o| o.condition.predicates.len()).sum()
    }
}

/// Starts a pattern with a single unconstrained occurrence of `node_type`.
pub fn initiate(schema: &SchemaGraph, node_type: &str) -> Result<QueryPattern> {
    let t = schema.require_node_type(node_type)?;
    Ok(QueryPattern {
        occurrences: vec![PatternOccurrence {
            id: OccurrenceId(0),
            node_type: t.id.clone(),
            condition: SelectionCondition::all(),
            alias: t.name.clone(),
        }],
        edges: Vec::new(),
        primary: OccurrenceId(0),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectMode {
    /// New predicates are added to the primary's existing condition.
    #[default]
    Conjoin,
    /// The primary's condition is replaced outright.
    Replace,
}

/// Filters the primary occurrence. The structure never changes.
pub fn apply_select(
    schema: &SchemaGraph,
    pattern: &QueryPattern,
    condition: &SelectionCondition,
    mode: SelectMode,
) -> Result<QueryPattern> {
    let primary = pattern.primary_occurrence()?;
    let checked = condition.checked(schema, &primary.node_type)?;
    let mut next = pattern.clone();
    let occ = next.occurrence_mut(pattern.primary).expect("primary exists");
    match mode {
        SelectMode::Conjoin => occ.condition.predicates.extend(checked.predicates),
        SelectMode::Replace => occ.condition = checked,
    }
    Ok(next)
}

/// Joins a new occurrence of the edge type's target onto the primary and
/// makes it the new primary.
pub fn apply_add(schema: &SchemaGraph, pattern: &QueryPattern, edge_type: &str) -> Result<QueryPattern> {
    let et = schema.require_edge_type(edge_type)?;
    let primary = pattern.primary_occurrence()?;
    if et.source_type != primary.node_type {
        return Err(Error::TypeMismatch(format!(
            "edge type `{}` leaves `{}`, the primary is `{}`",
            et.id, et.source_type, primary.node_type
        )));
    }
    let target = schema.require_node_type(&et.target_type)?;
    let mut next = pattern.clone();
    let id = pattern.next_id();
    next.occurrences.push(PatternOccurrence {
        id,
        node_type: target.id.clone(),
        condition: SelectionCondition::all(),
        alias: pattern.fresh_alias(&target.name),
    });
    next.edges.push(PatternEdge { edge_type: et.id.clone(), from: pattern.primary, to: id });
    next.primary = id;
    Ok(next)
}

/// Moves the primary to another occurrence; nothing else changes.
pub fn apply_shift(pattern: &QueryPattern, occurrence: OccurrenceId) -> Result<QueryPattern> {
    pattern.require_occurrence(occurrence)?;
    let mut next = pattern.clone();
    next.primary = occurrence;
    Ok(next)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PatternRule {
    MissingPrimary,
    DuplicateOccurrence,
    DuplicateAlias,
    UnknownNodeType,
    UnknownEdgeType,
    MissingEndpoint,
    EdgeTyping,
    Disconnected,
    Cycle,
    PredicateTyping,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PatternViolation {
    pub rule: PatternRule,
    pub message: String,
}

impl fmt::Display for PatternViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}: {}", self.rule, self.message)
    }
}

/// Checks primary presence, unique ids and aliases, edge endpoint typing,
/// predicate typing, and that occurrences and edges form a tree.
pub fn validate_pattern(pattern: &QueryPattern, schema: &SchemaGraph) -> Vec<PatternViolation> {
    let mut out = Vec::new();
    let mut v = |rule, message: String| out.push(PatternViolation { rule, message });

    let mut ids = HashSet::new();
    let mut aliases = HashSet::new();
    let mut types: HashMap<OccurrenceId, &str> = HashMap::new();
    for o in &pattern.occurrences {
        if !ids.insert(o.id) {
            v(PatternRule::DuplicateOccurrence, format!("occurrence {} appears twice", o.id));
        }
        if !aliases.insert(o.alias.as_str()) {
            v(PatternRule::DuplicateAlias, format!("alias `{}` appears twice", o.alias));
        }
        types.insert(o.id, &o.node_type);
        if schema.node_type(&o.node_type).is_none() {
            v(PatternRule::UnknownNodeType, format!("occurrence {} has unknown type `{}`", o.id, o.node_type));
        } else if let Err(e) = o.condition.checked(schema, &o.node_type) {
            v(PatternRule::PredicateTyping, format!("occurrence {}: {e}", o.id));
        }
    }
    if !ids.contains(&pattern.primary) {
        v(PatternRule::MissingPrimary, format!("primary occurrence {} is not in the pattern", pattern.primary));
    }

    for e in &pattern.edges {
        let (Some(from), Some(to)) = (types.get(&e.from), types.get(&e.to)) else {
            v(PatternRule::MissingEndpoint, format!("edge {} -> {} has a missing endpoint", e.from, e.to));
            continue;
        };
        match schema.edge_type(&e.edge_type) {
            None => v(PatternRule::UnknownEdgeType, format!("unknown edge type `{}`", e.edge_type)),
            Some(et) => {
                if et.source_type != *from || et.target_type != *to {
                    v(
                        PatternRule::EdgeTyping,
                        format!(
                            "edge `{}` joins `{}` to `{}`, not `{from}` to `{to}`",
                            et.id, et.source_type, et.target_type
                        ),
                    );
                }
            }
        }
    }

    // union-find over occurrence ids: a repeated union means a cycle
    let mut parent: HashMap<OccurrenceId, OccurrenceId> = ids.iter().map(|&i| (i, i)).collect();
    fn find(parent: &mut HashMap<OccurrenceId, OccurrenceId>, x: OccurrenceId) -> OccurrenceId {
        let p = parent[&x];
        if p == x {
            return x;
        }
        let root = find(parent, p);
        parent.insert(x, root);
        root
    }
    let mut cycle = false;
    for e in &pattern.edges {
        if !(parent.contains_key(&e.from) && parent.contains_key(&e.to)) {
            continue;
        }
        let (a, b) = (find(&mut parent, e.from), find(&mut parent, e.to));
        if a == b {
            cycle = true;
        } else {
            parent.insert(a, b);
        }
    }
    if cycle {
        v(PatternRule::Cycle, "pattern edges form a cycle".into());
    }
    let roots: BTreeSet<_> = ids.iter().map(|&i| find(&mut parent, i)).collect();
    if roots.len() > 1 {
        v(PatternRule::Disconnected, format!("pattern has {} disconnected parts", roots.len()));
    }
    out
}

/// Fails with `PatternError` when the pattern has any violation.
pub fn ensure_valid(pattern: &QueryPattern, schema: &SchemaGraph) -> Result<()> {
    let violations = validate_pattern(pattern, schema);
    if violations.is_empty() {
        Ok(())
    } else {
        Err(Error::Pattern(violations.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")))
    }
}

/// One primitive operator with its arguments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Operator {
    Initiate {
        node_type: String,
    },
    Select {
        condition: SelectionCondition,
        #[serde(default)]
        mode: SelectMode,
    },
    Add {
        edge_type: String,
    },
    Shift {
        occurrence: OccurrenceId,
    },
}

impl Operator {
    pub fn name(&self) -> &'static str {
        match self {
            Operator::Initiate { .. } => "Initiate",
            Operator::Select { .. } => "Select",
            Operator::Add { .. } => "Add",
            Operator::Shift { .. } => "Shift",
        }
    }

    /// Applies the operator. `Initiate` needs no current pattern; every other
    /// operator does.
    pub fn apply(&self, schema: &SchemaGraph, current: Option<&QueryPattern>) -> Result<QueryPattern> {
        let need = || current.ok_or_else(|| Error::History(format!("{} needs an existing pattern", self.name())));
        match self {
            Operator::Initiate { node_type } => initiate(schema, node_type),
            Operator::Select { condition, mode } => apply_select(schema, need()?, condition, *mode),
            Operator::Add { edge_type } => apply_add(schema, need()?, edge_type),
            Operator::Shift { occurrence } => apply_shift(need()?, *occurrence),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorRecord {
    pub operator: Operator,
    pub snapshot: QueryPattern,
    /// Milliseconds since the Unix epoch.
    pub timestamp: u64,
}

impl OperatorRecord {
    pub fn new(operator: Operator, snapshot: QueryPattern) -> Self {
        let timestamp = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_millis() as u64).unwrap_or(0);
        Self { operator, snapshot, timestamp }
    }
}

/// Folds operators from scratch. The first must be `Initiate` and no later
/// one may be.
pub fn replay_operators<'a>(
    schema: &SchemaGraph,
    operators: impl IntoIterator<Item = &'a Operator>,
) -> Result<QueryPattern> {
    let mut current: Option<QueryPattern> = None;
    for (i, op) in operators.into_iter().enumerate() {
        match (i, op) {
            (0, Operator::Initiate { .. }) => {}
            (0, other) => {
                return Err(Error::History(format!("history starts with {} instead of Initiate", other.name())))
            }
            (_, Operator::Initiate { .. }) => {
                return Err(Error::History(format!("Initiate at step {} must start a new history", i + 1)))
            }
            _ => {}
        }
        current = Some(op.apply(schema, current.as_ref())?);
    }
    current.ok_or_else(|| Error::History("empty history".into()))
}

/// Replays the operators of `records`; revert-to-step-k is `replay(&records[..k])`.
pub fn replay(schema: &SchemaGraph, records: &[OperatorRecord]) -> Result<QueryPattern> {
    replay_operators(schema, records.iter().map(|r| &r.operator))
}
