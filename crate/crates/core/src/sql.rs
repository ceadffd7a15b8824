//! SQL in both directions.
//!
//! [`emit_sql`] renders a pattern as the grouped join an enriched table
//! stands for:
//!
//! ```text
//! SELECT "Authors".*, ent-list("Papers"), ...
//! FROM Authors AS "Authors", Papers AS "Papers", ...
//! WHERE <one join predicate per pattern edge> AND <selection conjuncts>
//! GROUP BY "Authors"
//! ```
//!
//! `ent-list(alias)` stands for the list of entity references of `alias`
//! inside each group, much like an array aggregate.
//!
//! [`pattern_from_join_query`] goes the other way from a structured
//! [`JoinQuerySpec`]: entity relations become occurrences, foreign-key
//! equalities become pattern edges, and many-to-many link relations collapse
//! into the single edge type they were translated into. A multivalued
//! attribute relation becomes an occurrence of its value node type.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pattern::{
    ensure_valid, Comparator, OccurrenceId, PatternEdge, PatternOccurrence, PredicateTarget, QueryPattern,
    SelectionCondition, SelectionPredicate,
};
use crate::tgdb::{EdgeOrigin, EdgeProvenance, EdgeType, NodeOrigin, NodeType, SchemaGraph};
use crate::translate::dedup_name;
use crate::value::{Value, ValueKind};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SqlText {
    pub statement: String,
}

impl fmt::Display for SqlText {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.statement)
    }
}

fn ident(alias: &str) -> String {
    format!("\"{}\"", alias.replace('"', "\"\""))
}

fn literal(v: &Value) -> String {
    match v {
        Value::Null => "NULL".into(),
        Value::Text(s) => format!("'{}'", s.replace('\'', "''")),
        Value::Integer(i) => i.to_string(),
        Value::Real(r) => r.to_string(),
        Value::Boolean(b) => if *b { "TRUE" } else { "FALSE" }.into(),
        Value::Date(_) => format!("DATE '{v}'"),
    }
}

fn like_pattern(needle: &str) -> String {
    literal(&Value::text(format!("%{needle}%")))
}

fn key_attribute(t: &NodeType) -> &str {
    t.provenance.as_ref().map(|p| p.key_attribute.as_str()).unwrap_or("id")
}

/// What a node type is read from: a base table, or the distinct values of
/// one column for value node types.
fn from_source(t: &NodeType) -> String {
    match (&t.provenance, t.origin) {
        (Some(p), NodeOrigin::EntityTable) => p.relation.clone(),
        (Some(p), _) => format!("(SELECT DISTINCT {} FROM {})", p.key_attribute, p.relation),
        (None, _) => t.id.clone(),
    }
}

/// True for the first-declared member of a reverse pair.
fn is_forward(schema: &SchemaGraph, et: &EdgeType) -> bool {
    let pos = |id: &str| schema.edge_types().iter().position(|e| e.id == id);
    match et.reverse_of.as_deref().and_then(pos) {
        Some(rev) => pos(&et.id).is_some_and(|me| me <= rev),
        None => true,
    }
}

/// A predicate that holds when `from` and `to` (SQL expressions naming rows
/// of the edge's source and target types) are linked by `et`.
fn join_predicate(schema: &SchemaGraph, et: &EdgeType, from: &str, to: &str) -> Result<String> {
    let src = schema.require_node_type(&et.source_type)?;
    let tgt = schema.require_node_type(&et.target_type)?;
    Ok(match &et.provenance {
        Some(EdgeProvenance::ForeignKey { attribute, .. }) => {
            let (referencing, referenced, ref_type) =
                if is_forward(schema, et) { (from, to, tgt) } else { (to, from, src) };
            format!("{referencing}.{attribute} = {referenced}.{}", key_attribute(ref_type))
        }
        Some(EdgeProvenance::Bridge { relation, source_attribute, target_attribute }) => format!(
            "EXISTS (SELECT 1 FROM {relation} WHERE {relation}.{source_attribute} = {from}.{} AND {relation}.{target_attribute} = {to}.{})",
            key_attribute(src),
            key_attribute(tgt)
        ),
        Some(EdgeProvenance::Categorical { attribute, .. }) => {
            let (entity, value) = if src.origin == NodeOrigin::EntityTable { (from, to) } else { (to, from) };
            format!("{entity}.{attribute} = {value}.{attribute}")
        }
        None => format!("EDGE({}, {from}, {to})", literal(&Value::text(&et.id))),
    })
}

fn render_predicate(schema: &SchemaGraph, occ: &PatternOccurrence, p: &SelectionPredicate) -> Result<String> {
    let alias = ident(&occ.alias);
    let op = |c: Comparator| match c {
        Comparator::Ne => "<>",
        other => other.symbol(),
    };
    Ok(match &p.target {
        PredicateTarget::Attribute { name } => match p.comparator {
            Comparator::Contains => format!("{alias}.{name} ILIKE {}", like_pattern(&p.operand.to_string())),
            c => format!("{alias}.{name} {} {}", op(c), literal(&p.operand)),
        },
        PredicateTarget::NeighborLabel { edge_type } => {
            let et = schema.require_edge_type(edge_type)?;
            let tgt = schema.require_node_type(&et.target_type)?;
            let test = match p.comparator {
                Comparator::Contains => {
                    format!("n.{} ILIKE {}", tgt.label_attribute, like_pattern(&p.operand.to_string()))
                }
                _ => format!("n.{} = {}", tgt.label_attribute, literal(&Value::text(p.operand.to_string()))),
            };
            format!(
                "EXISTS (SELECT 1 FROM {} AS n WHERE {} AND {test})",
                from_source(tgt),
                join_predicate(schema, et, &alias, "n")?
            )
        }
        PredicateTarget::Node => {
            let t = schema.require_node_type(&occ.node_type)?;
            let id = p.operand.to_string();
            let raw = id.strip_prefix(&format!("{}:", t.id)).unwrap_or(&id);
            let key = key_attribute(t);
            let kind = t.attribute(key).map_or(ValueKind::Text, |a| a.value_kind);
            let v = Value::parse(kind, raw).unwrap_or_else(|_| Value::text(raw));
            format!("{alias}.{key} {} {}", op(p.comparator), literal(&v))
        }
    })
}

/// Renders the pattern as a grouped join. Deterministic: the same pattern
/// always yields the same text.
pub fn emit_sql(pattern: &QueryPattern, schema: &SchemaGraph) -> Result<SqlText> {
    ensure_valid(pattern, schema)?;
    let primary = pattern.primary_occurrence()?;
    let alias_of = |id: OccurrenceId| pattern.require_occurrence(id).map(|o| ident(&o.alias));

    let mut select = vec![format!("{}.*", ident(&primary.alias))];
    select.extend(
        pattern.occurrences.iter().filter(|o| o.id != primary.id).map(|o| format!("ent-list({})", ident(&o.alias))),
    );

    let from = pattern
        .occurrences
        .iter()
        .map(|o| Ok(format!("{} AS {}", from_source(schema.require_node_type(&o.node_type)?), ident(&o.alias))))
        .collect::<Result<Vec<_>>>()?;

    let mut conjuncts = Vec::new();
    for e in &pattern.edges {
        let et = schema.require_edge_type(&e.edge_type)?;
        conjuncts.push(join_predicate(schema, et, &alias_of(e.from)?, &alias_of(e.to)?)?);
    }
    for o in &pattern.occurrences {
        for p in &o.condition.predicates {
            conjuncts.push(render_predicate(schema, o, p)?);
        }
    }

    let mut statement = format!("SELECT {}\nFROM {}", select.join(", "), from.join(", "));
    if !conjuncts.is_empty() {
        statement.push_str(&format!("\nWHERE {}", conjuncts.join("\n  AND ")));
    }
    statement.push_str(&format!("\nGROUP BY {}", ident(&primary.alias)));
    Ok(SqlText { statement })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AliasedRelation {
    pub relation: String,
    pub alias: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ColumnRef {
    pub alias: String,
    pub attribute: String,
}

impl ColumnRef {
    pub fn new(alias: &str, attribute: &str) -> Self {
        Self { alias: alias.into(), attribute: attribute.into() }
    }
}

/// `left = right`, expected to pair a foreign key with the primary key it
/// references.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JoinCondition {
    pub left: ColumnRef,
    pub right: ColumnRef,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AliasedPredicate {
    pub alias: String,
    pub predicate: SelectionPredicate,
}

/// A select-project-join query with an optional grouping alias.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct JoinQuerySpec {
    pub relations: Vec<AliasedRelation>,
    #[serde(default)]
    pub join_conditions: Vec<JoinCondition>,
    #[serde(default)]
    pub selections: Vec<AliasedPredicate>,
    #[serde(default)]
    pub group_by: Option<String>,
}

impl JoinQuerySpec {
    pub fn relation(mut self, relation: &str, alias: &str) -> Self {
        self.relations.push(AliasedRelation { relation: relation.into(), alias: alias.into() });
        self
    }

    pub fn join(mut self, left: (&str, &str), right: (&str, &str)) -> Self {
        self.join_conditions
            .push(JoinCondition { left: ColumnRef::new(left.0, left.1), right: ColumnRef::new(right.0, right.1) });
        self
    }

    pub fn select(mut self, alias: &str, predicate: SelectionPredicate) -> Self {
        self.selections.push(AliasedPredicate { alias: alias.into(), predicate });
        self
    }

    pub fn group_by(mut self, alias: &str) -> Self {
        self.group_by = Some(alias.into());
        self
    }
}

/// How an alias's relation shows up in the graph.
#[derive(Debug, Clone, Copy)]
enum Role<'a> {
    Entity(&'a NodeType),
    Value(&'a NodeType),
    Link(&'a str),
}

fn role<'a>(schema: &'a SchemaGraph, relation: &'a str) -> Result<Role<'a>> {
    let by_origin = |origin| {
        schema
            .node_types()
            .iter()
            .find(|t| t.origin == origin && t.provenance.as_ref().is_some_and(|p| p.relation == relation))
    };
    if let Some(t) = by_origin(NodeOrigin::EntityTable) {
        return Ok(Role::Entity(t));
    }
    if let Some(t) = by_origin(NodeOrigin::MultivaluedAttribute) {
        return Ok(Role::Value(t));
    }
    let is_link = schema.edge_types().iter().any(|e| {
        e.origin == EdgeOrigin::MnRelationship
            && matches!(&e.provenance, Some(EdgeProvenance::Bridge { relation: r, .. }) if r == relation)
    });
    if is_link {
        Ok(Role::Link(relation))
    } else {
        Err(Error::UnknownRelation(relation.to_string()))
    }
}

/// The attribute of a multivalued relation that points at its owner.
fn owner_attribute(schema: &SchemaGraph, value_type: &NodeType) -> Option<(String, String)> {
    schema.edges_from(&value_type.id).find_map(|e| match &e.provenance {
        Some(EdgeProvenance::Bridge { target_attribute, .. }) if e.origin == EdgeOrigin::MultivaluedAttribute => {
            Some((target_attribute.clone(), e.target_type.clone()))
        }
        _ => None,
    })
}

/// An undirected link between two occurrences; `edge_type` runs `a -> b`.
struct Link {
    a: usize,
    b: usize,
    edge_type: String,
}

/// Builds the pattern a join query denotes. Occurrence ids follow the
/// declaration order of entity and multivalued aliases; edges point away
/// from the first of them. The `group_by` alias becomes the primary, or the
/// first occurrence when there is none.
pub fn pattern_from_join_query(query: &JoinQuerySpec, schema: &SchemaGraph) -> Result<QueryPattern> {
    let mut roles: HashMap<&str, Role> = HashMap::new();
    let mut occ_index: HashMap<&str, usize> = HashMap::new();
    let mut occurrences = Vec::new();
    for r in &query.relations {
        if roles.contains_key(r.alias.as_str()) {
            return Err(Error::InvalidArgument(format!("alias `{}` is declared twice", r.alias)));
        }
        let role = role(schema, &r.relation)?;
        if let Role::Entity(t) | Role::Value(t) = role {
            occ_index.insert(&r.alias, occurrences.len());
            occurrences.push(PatternOccurrence {
                id: OccurrenceId(occurrences.len() as u32),
                node_type: t.id.clone(),
                condition: SelectionCondition::all(),
                alias: r.alias.clone(),
            });
        }
        roles.insert(&r.alias, role);
    }
    if occurrences.is_empty() {
        return Err(Error::InvalidArgument("the query names no entity relation".into()));
    }
    let role_of = |alias: &str| {
        roles.get(alias).copied().ok_or_else(|| Error::InvalidArgument(format!("unknown alias `{alias}`")))
    };
    let no_edge = |c: &JoinCondition| {
        Error::NoEdgeType(format!(
            "{}.{} = {}.{} is not a foreign key to primary key join",
            c.left.alias, c.left.attribute, c.right.alias, c.right.attribute
        ))
    };

    let mut links = Vec::new();
    let mut link_ends: BTreeMap<&str, Vec<(&str, &str)>> = BTreeMap::new();
    let mut owned: BTreeSet<&str> = BTreeSet::new();
    for c in &query.join_conditions {
        let (l, r) = (role_of(&c.left.alias)?, role_of(&c.right.alias)?);
        match (l, r) {
            (Role::Entity(lt), Role::Entity(rt)) => {
                let (referencing, referenced, fwd) = fk_edge(schema, c, lt, rt).ok_or_else(|| no_edge(c))?;
                links.push(Link { a: occ_index[referencing], b: occ_index[referenced], edge_type: fwd.id.clone() });
            }
            (Role::Entity(et), Role::Value(vt)) | (Role::Value(vt), Role::Entity(et)) => {
                let (entity, value) =
                    if matches!(l, Role::Entity(_)) { (&c.left, &c.right) } else { (&c.right, &c.left) };
                let (owner_attr, owner_type) = owner_attribute(schema, vt).ok_or_else(|| no_edge(c))?;
                if value.attribute != owner_attr || owner_type != et.id || entity.attribute != key_attribute(et) {
                    return Err(no_edge(c));
                }
                let e = schema
                    .edges_from(&et.id)
                    .find(|e| e.target_type == vt.id && e.origin == EdgeOrigin::MultivaluedAttribute)
                    .ok_or_else(|| no_edge(c))?;
                // a value row carries exactly one owner, which a value node does not
                if !owned.insert(value.alias.as_str()) {
                    return Err(Error::InvalidArgument(format!(
                        "`{}` is joined to more than one owner; each of its rows belongs to a single one",
                        value.alias
                    )));
                }
                links.push(Link {
                    a: occ_index[entity.alias.as_str()],
                    b: occ_index[value.alias.as_str()],
                    edge_type: e.id.clone(),
                });
            }
            (Role::Link(_), Role::Entity(et)) | (Role::Entity(et), Role::Link(_)) => {
                let (link, entity) = if matches!(l, Role::Link(_)) { (&c.left, &c.right) } else { (&c.right, &c.left) };
                if entity.attribute != key_attribute(et) {
                    return Err(no_edge(c));
                }
                link_ends.entry(&link.alias).or_default().push((link.attribute.as_str(), entity.alias.as_str()));
            }
            _ => return Err(no_edge(c)),
        }
    }
    for r in &query.relations {
        let (alias, Role::Link(rel)) = (r.alias.as_str(), roles[r.alias.as_str()]) else { continue };
        let ends = link_ends.get(alias).map(Vec::as_slice).unwrap_or(&[]);
        let [(attr_a, occ_a), (attr_b, occ_b)] = ends else {
            return Err(Error::InvalidArgument(format!(
                "link relation `{alias}` must be joined to exactly two entities, found {}",
                ends.len()
            )));
        };
        let e = schema
            .edge_types()
            .iter()
            .find(|e| {
                e.origin == EdgeOrigin::MnRelationship
                    && matches!(&e.provenance, Some(EdgeProvenance::Bridge { relation, source_attribute, target_attribute })
                        if relation == rel && source_attribute == attr_a && target_attribute == attr_b)
            })
            .ok_or_else(|| Error::NoEdgeType(format!("`{alias}` does not link `{attr_a}` to `{attr_b}`")))?;
        let (ia, ib) = (occ_index[occ_a], occ_index[occ_b]);
        let types_ok = occurrences[ia].node_type == e.source_type && occurrences[ib].node_type == e.target_type;
        if !types_ok {
            return Err(Error::NoEdgeType(format!("`{alias}` joins the wrong entity types")));
        }
        links.push(Link { a: ia, b: ib, edge_type: e.id.clone() });
    }

    if links.len() + 1 != occurrences.len() {
        return Err(Error::InvalidArgument(format!(
            "{} joins between {} entities; the joins must form a tree",
            links.len(),
            occurrences.len()
        )));
    }

    // orient every link away from the first occurrence
    let mut edges: Vec<Option<PatternEdge>> = vec![None; occurrences.len()];
    let mut seen = vec![false; occurrences.len()];
    seen[0] = true;
    let mut queue = VecDeque::from([0usize]);
    while let Some(parent) = queue.pop_front() {
        for l in &links {
            let (child, edge_type) = if l.a == parent && !seen[l.b] {
                (l.b, l.edge_type.clone())
            } else if l.b == parent && !seen[l.a] {
                let et = schema.require_edge_type(&l.edge_type)?;
                let rev =
                    et.reverse_of.clone().ok_or_else(|| Error::NoEdgeType(format!("`{}` has no reverse", et.id)))?;
                (l.a, rev)
            } else {
                continue;
            };
            seen[child] = true;
            edges[child] =
                Some(PatternEdge { edge_type, from: OccurrenceId(parent as u32), to: OccurrenceId(child as u32) });
            queue.push_back(child);
        }
    }
    if seen.iter().any(|s| !s) {
        return Err(Error::InvalidArgument("the joins do not connect every entity".into()));
    }

    for s in &query.selections {
        let i = *occ_index.get(s.alias.as_str()).ok_or_else(|| {
            Error::InvalidArgument(format!("selection on `{}`, which is not an entity or value alias", s.alias))
        })?;
        let checked = s.predicate.checked(schema, &occurrences[i].node_type)?;
        occurrences[i].condition.predicates.push(checked);
    }

    let primary = match &query.group_by {
        Some(alias) => *occ_index
            .get(alias.as_str())
            .ok_or_else(|| Error::InvalidArgument(format!("cannot group by `{alias}`")))?,
        None => 0,
    };
    let pattern = QueryPattern {
        occurrences,
        edges: edges.into_iter().flatten().collect(),
        primary: OccurrenceId(primary as u32),
    };
    ensure_valid(&pattern, schema)?;
    Ok(pattern)
}

/// Matches an equality against the foreign keys between two entity types.
/// Returns (referencing alias, referenced alias, forward edge type).
fn fk_edge<'c, 's>(
    schema: &'s SchemaGraph,
    c: &'c JoinCondition,
    lt: &NodeType,
    rt: &NodeType,
) -> Option<(&'c str, &'c str, &'s EdgeType)> {
    let try_dir = |fk: &'c ColumnRef, fk_type: &NodeType, pk: &'c ColumnRef, pk_type: &NodeType| {
        if pk.attribute != key_attribute(pk_type) {
            return None;
        }
        let relation = &fk_type.provenance.as_ref()?.relation;
        schema
            .edge_types()
            .iter()
            .find(|e| {
                e.source_type == fk_type.id
                    && e.target_type == pk_type.id
                    && is_forward(schema, e)
                    && matches!(&e.provenance, Some(EdgeProvenance::ForeignKey { relation: r, attribute, .. })
                        if r == relation && *attribute == fk.attribute)
            })
            .map(|e| (fk.alias.as_str(), pk.alias.as_str(), e))
    };
    try_dir(&c.left, lt, &c.right, rt).or_else(|| try_dir(&c.right, rt, &c.left, lt))
}

/// The join query a pattern stands for: one alias per occurrence in
/// occurrence order, then one alias per many-to-many edge. Feeding the
/// result to [`pattern_from_join_query`] gives back a pattern equal to the
/// input whenever the input's edges point away from its first occurrence,
/// which holds for every pattern built with the primitive operators. A value
/// occurrence touching more than one edge is rejected.
pub fn join_query_from_pattern(pattern: &QueryPattern, schema: &SchemaGraph) -> Result<JoinQuerySpec> {
    ensure_valid(pattern, schema)?;
    let mut query = JoinQuerySpec::default();
    for o in &pattern.occurrences {
        let t = schema.require_node_type(&o.node_type)?;
        let relation = match (&t.provenance, t.origin) {
            (Some(p), NodeOrigin::EntityTable | NodeOrigin::MultivaluedAttribute) => p.relation.clone(),
            _ => return Err(Error::InvalidArgument(format!("`{}` has no relation of its own", t.id))),
        };
        if t.origin == NodeOrigin::MultivaluedAttribute && pattern.incident(o.id).count() > 1 {
            return Err(Error::InvalidArgument(format!(
                "`{}` links several owners through one value, which a single `{relation}` row cannot express",
                o.alias
            )));
        }
        query.relations.push(AliasedRelation { relation, alias: o.alias.clone() });
    }
    for e in &pattern.edges {
        let et = schema.require_edge_type(&e.edge_type)?;
        let from = pattern.require_occurrence(e.from)?;
        let to = pattern.require_occurrence(e.to)?;
        let (ft, tt) = (schema.require_node_type(&from.node_type)?, schema.require_node_type(&to.node_type)?);
        let key = |o: &PatternOccurrence, t: &NodeType| ColumnRef::new(&o.alias, key_attribute(t));
        match (&et.provenance, et.origin) {
            (Some(EdgeProvenance::ForeignKey { attribute, .. }), _) => {
                let cond = if is_forward(schema, et) {
                    JoinCondition { left: ColumnRef::new(&from.alias, attribute), right: key(to, tt) }
                } else {
                    JoinCondition { left: key(from, ft), right: ColumnRef::new(&to.alias, attribute) }
                };
                query.join_conditions.push(cond);
            }
            (
                Some(EdgeProvenance::Bridge { relation, source_attribute, target_attribute }),
                EdgeOrigin::MnRelationship,
            ) => {
                let alias = dedup_name(relation, |n| query.relations.iter().any(|r| r.alias == n));
                query.relations.push(AliasedRelation { relation: relation.clone(), alias: alias.clone() });
                query
                    .join_conditions
                    .push(JoinCondition { left: key(from, ft), right: ColumnRef::new(&alias, source_attribute) });
                query
                    .join_conditions
                    .push(JoinCondition { left: ColumnRef::new(&alias, target_attribute), right: key(to, tt) });
            }
            (Some(EdgeProvenance::Bridge { .. }), EdgeOrigin::MultivaluedAttribute) => {
                let (entity, et_, value, vt) =
                    if ft.origin == NodeOrigin::EntityTable { (from, ft, to, tt) } else { (to, tt, from, ft) };
                let (owner_attr, _) = owner_attribute(schema, vt)
                    .ok_or_else(|| Error::InvalidArgument(format!("`{}` has no owner edge", vt.id)))?;
                let (ecol, vcol) = (key(entity, et_), ColumnRef::new(&value.alias, &owner_attr));
                let cond = if entity.id == from.id {
                    JoinCondition { left: ecol, right: vcol }
                } else {
                    JoinCondition { left: vcol, right: ecol }
                };
                query.join_conditions.push(cond);
            }
            _ => return Err(Error::InvalidArgument(format!("edge type `{}` has no relational form", et.id))),
        }
    }
    for o in &pattern.occurrences {
        for p in &o.condition.predicates {
            query.selections.push(AliasedPredicate { alias: o.alias.clone(), predicate: p.clone() });
        }
    }
    query.group_by = Some(pattern.primary_occurrence()?.alias.clone());
    Ok(query)
}
