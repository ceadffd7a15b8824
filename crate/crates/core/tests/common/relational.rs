//! A nested-loop relational evaluator over the academic CSV files, plus a
//! generator of random join queries over the same relations.
//!
//! Rows are read with the `csv` crate straight from disk. Join conditions,
//! selections and grouping are evaluated on raw strings here, so the only
//! thing shared with the engine is the identity convention for graph nodes
//! (`{type}:{primary key}` and `Keywords:{keyword}`).

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use etable_core::pattern::{Comparator, PredicateTarget, SelectionPredicate};
use etable_core::sql::{AliasedPredicate, AliasedRelation, ColumnRef, JoinCondition, JoinQuerySpec};
use etable_core::Value;
use rand::seq::IndexedRandom;
use rand::Rng;

pub type Row = BTreeMap<String, String>;

pub struct Database {
    pub tables: BTreeMap<String, Vec<Row>>,
}

impl Database {
    pub fn load(dir: &Path) -> Self {
        let mut tables = BTreeMap::new();
        for name in RELATIONS {
            let mut reader = csv::Reader::from_path(dir.join(format!("{name}.csv"))).unwrap();
            let headers = reader.headers().unwrap().clone();
            let rows = reader
                .records()
                .map(|r| {
                    let r = r.unwrap();
                    headers.iter().zip(r.iter()).map(|(h, v)| (h.to_string(), v.to_string())).collect()
                })
                .collect();
            tables.insert(name.to_string(), rows);
        }
        Self { tables }
    }
}

pub const RELATIONS: [&str; 7] =
    ["Conferences", "Institutions", "Authors", "Papers", "Paper_authors", "Paper_citations", "Paper_keywords"];

const INTEGER_COLUMNS: [&str; 6] =
    ["conference_id", "institution_id", "author_id", "paper_id", "year", "cited_paper_id"];

fn key_of(relation: &str) -> Option<&'static str> {
    match relation {
        "Conferences" => Some("conference_id"),
        "Institutions" => Some("institution_id"),
        "Authors" => Some("author_id"),
        "Papers" => Some("paper_id"),
        _ => None,
    }
}

pub fn is_node_relation(relation: &str) -> bool {
    relation == "Paper_keywords" || key_of(relation).is_some()
}

/// Identity of the graph node an alias row stands for, or `None` for link
/// relations, which do not become nodes.
pub fn identity(relation: &str, row: &Row) -> Option<String> {
    match relation {
        "Paper_keywords" => Some(format!("Keywords:{}", row["keyword"])),
        r => key_of(r).map(|k| format!("{r}:{}", row[k])),
    }
}

fn raw_holds(column: &str, raw: &str, cmp: Comparator, operand: &Value) -> bool {
    if cmp == Comparator::Contains {
        let needle = operand.as_text().unwrap_or_default().to_lowercase();
        return raw.to_lowercase().contains(&needle);
    }
    let ord = if INTEGER_COLUMNS.contains(&column) {
        let Value::Integer(o) = operand else { return false };
        raw.parse::<i64>().unwrap().cmp(o)
    } else {
        let Some(o) = operand.as_text() else { return false };
        raw.cmp(o)
    };
    use std::cmp::Ordering::*;
    match cmp {
        Comparator::Eq => ord == Equal,
        Comparator::Ne => ord != Equal,
        Comparator::Lt => ord == Less,
        Comparator::Le => ord != Greater,
        Comparator::Gt => ord == Greater,
        Comparator::Ge => ord != Less,
        Comparator::Contains => unreachable!(),
    }
}

/// Grouped answer: group key -> alias -> identities seen with that key.
pub type Grouped = BTreeMap<String, BTreeMap<String, BTreeSet<String>>>;

/// Evaluates the join by nested loops in declaration order and groups the
/// surviving rows by `group_by` (or the first node-bearing alias).
pub fn evaluate(db: &Database, query: &JoinQuerySpec) -> Grouped {
    let n = query.relations.len();
    let pos = |alias: &str| query.relations.iter().position(|r| r.alias == alias).unwrap();
    let conds: Vec<Vec<(usize, &str, usize, &str)>> = (0..n)
        .map(|i| {
            query
                .join_conditions
                .iter()
                .filter_map(|c| {
                    let (l, r) = (pos(&c.left.alias), pos(&c.right.alias));
                    (l.max(r) == i).then_some((l, c.left.attribute.as_str(), r, c.right.attribute.as_str()))
                })
                .collect()
        })
        .collect();
    let sels: Vec<Vec<&SelectionPredicate>> = (0..n)
        .map(|i| query.selections.iter().filter(|s| pos(&s.alias) == i).map(|s| &s.predicate).collect())
        .collect();
    let tables: Vec<&Vec<Row>> = query.relations.iter().map(|r| &db.tables[&r.relation]).collect();

    let node_aliases: Vec<usize> = (0..n).filter(|&i| is_node_relation(&query.relations[i].relation)).collect();
    let group = query.group_by.as_deref().map(pos).unwrap_or(node_aliases[0]);

    let mut out = Grouped::new();
    let mut bound: Vec<&Row> = Vec::new();
    #[allow(clippy::too_many_arguments)]
    fn go<'a>(
        i: usize,
        query: &JoinQuerySpec,
        tables: &[&'a Vec<Row>],
        conds: &[Vec<(usize, &str, usize, &str)>],
        sels: &[Vec<&SelectionPredicate>],
        node_aliases: &[usize],
        group: usize,
        bound: &mut Vec<&'a Row>,
        out: &mut Grouped,
    ) {
        if i == tables.len() {
            let key = identity(&query.relations[group].relation, bound[group]).unwrap();
            let entry = out.entry(key).or_default();
            for &a in node_aliases {
                if a != group {
                    let id = identity(&query.relations[a].relation, bound[a]).unwrap();
                    entry.entry(query.relations[a].alias.clone()).or_default().insert(id);
                }
            }
            return;
        }
        for row in tables[i] {
            let selected = sels[i].iter().all(|p| match &p.target {
                PredicateTarget::Attribute { name } => raw_holds(name, &row[name], p.comparator, &p.operand),
                _ => panic!("the relational oracle only evaluates attribute predicates"),
            });
            if !selected {
                continue;
            }
            bound.push(row);
            if conds[i].iter().all(|&(l, la, r, ra)| bound[l][la] == bound[r][ra]) {
                go(i + 1, query, tables, conds, sels, node_aliases, group, bound, out);
            }
            bound.pop();
        }
    }
    go(0, query, &tables, &conds, &sels, &node_aliases, group, &mut bound, &mut out);
    out
}

/// One way to grow a query tree from an alias of `from`.
enum Step {
    /// `from.fk = new.pk` or `new.fk = from.pk`.
    Fk { new: &'static str, from_attr: &'static str, new_attr: &'static str },
    /// Through a link relation: `link.a = from.pk AND link.b = new.pk`.
    Link {
        link: &'static str,
        a: &'static str,
        b: &'static str,
        new: &'static str,
        from_key: &'static str,
        new_key: &'static str,
    },
}

fn steps(from: &str) -> Vec<Step> {
    use Step::*;
    match from {
        "Conferences" => vec![Fk { new: "Papers", from_attr: "conference_id", new_attr: "conference_id" }],
        "Institutions" => vec![Fk { new: "Authors", from_attr: "institution_id", new_attr: "institution_id" }],
        "Authors" => vec![
            Fk { new: "Institutions", from_attr: "institution_id", new_attr: "institution_id" },
            Link {
                link: "Paper_authors",
                a: "author_id",
                b: "paper_id",
                new: "Papers",
                from_key: "author_id",
                new_key: "paper_id",
            },
        ],
        "Papers" => vec![
            Fk { new: "Conferences", from_attr: "conference_id", new_attr: "conference_id" },
            Fk { new: "Paper_keywords", from_attr: "paper_id", new_attr: "paper_id" },
            Link {
                link: "Paper_authors",
                a: "paper_id",
                b: "author_id",
                new: "Authors",
                from_key: "paper_id",
                new_key: "author_id",
            },
            Link {
                link: "Paper_citations",
                a: "paper_id",
                b: "cited_paper_id",
                new: "Papers",
                from_key: "paper_id",
                new_key: "paper_id",
            },
            Link {
                link: "Paper_citations",
                a: "cited_paper_id",
                b: "paper_id",
                new: "Papers",
                from_key: "paper_id",
                new_key: "paper_id",
            },
        ],
        "Paper_keywords" => vec![Fk { new: "Papers", from_attr: "paper_id", new_attr: "paper_id" }],
        _ => vec![],
    }
}

fn random_selection(rng: &mut impl Rng, relation: &str) -> SelectionPredicate {
    let choices: Vec<SelectionPredicate> = match relation {
        "Conferences" => vec![
            SelectionPredicate::attribute(
                "name",
                Comparator::Eq,
                *["SIGMOD", "VLDB", "KDD", "CHI"].choose(rng).unwrap(),
            ),
            SelectionPredicate::attribute("area", Comparator::Contains, *["data", "Human"].choose(rng).unwrap()),
        ],
        "Institutions" => vec![
            SelectionPredicate::attribute("country", Comparator::Contains, *["korea", "USA", "a"].choose(rng).unwrap()),
            SelectionPredicate::attribute(
                "name",
                Comparator::Contains,
                *["university", "KAIST", "of"].choose(rng).unwrap(),
            ),
        ],
        "Authors" => vec![SelectionPredicate::attribute(
            "name",
            Comparator::Contains,
            *["an", "madden", "e"].choose(rng).unwrap(),
        )],
        "Papers" => vec![
            SelectionPredicate::attribute(
                "year",
                *[Comparator::Gt, Comparator::Le, Comparator::Eq, Comparator::Ne].choose(rng).unwrap(),
                rng.random_range(2004..2018) as i64,
            ),
            SelectionPredicate::attribute(
                "title",
                Comparator::Contains,
                *["data", "query", "user", "the"].choose(rng).unwrap(),
            ),
        ],
        "Paper_keywords" => vec![SelectionPredicate::attribute(
            "keyword",
            *[Comparator::Eq, Comparator::Contains].choose(rng).unwrap(),
            *["user", "database", "usability", "query", "a"].choose(rng).unwrap(),
        )],
        _ => vec![],
    };
    choices.choose(rng).unwrap().clone()
}

/// A random tree-shaped join query with at most `max_relations` aliases.
pub fn random_join_query(rng: &mut impl Rng, max_relations: usize) -> JoinQuerySpec {
    let starts = ["Conferences", "Institutions", "Authors", "Papers", "Paper_keywords"];
    let mut query = JoinQuerySpec::default();
    let mut counter = 0;
    let mut alias = |rel: &str| {
        counter += 1;
        format!("{}{counter}", rel[..2].to_lowercase())
    };
    let first = *starts.choose(rng).unwrap();
    query.relations.push(AliasedRelation { relation: first.into(), alias: alias(first) });
    let jc = |la: &str, lc: &str, ra: &str, rc: &str| JoinCondition {
        left: ColumnRef::new(la, lc),
        right: ColumnRef::new(ra, rc),
    };

    let growth = rng.random_range(0..4);
    for _ in 0..growth {
        let nodes: Vec<AliasedRelation> =
            query.relations.iter().filter(|r| is_node_relation(&r.relation)).cloned().collect();
        let from = nodes.choose(rng).unwrap().clone();
        let joined =
            |alias: &str| query.join_conditions.iter().any(|c| c.left.alias == alias || c.right.alias == alias);
        // a keyword row has a single owner paper
        if from.relation == "Paper_keywords" && joined(&from.alias) {
            continue;
        }
        let options = steps(&from.relation);
        let Some(step) = options.choose(rng) else { continue };
        match *step {
            Step::Fk { new, from_attr, new_attr } => {
                if query.relations.len() + 1 > max_relations {
                    continue;
                }
                let a = alias(new);
                query.relations.push(AliasedRelation { relation: new.into(), alias: a.clone() });
                // keep the referencing side on the left half the time
                if rng.random_bool(0.5) {
                    query.join_conditions.push(jc(&from.alias, from_attr, &a, new_attr));
                } else {
                    query.join_conditions.push(jc(&a, new_attr, &from.alias, from_attr));
                }
            }
            Step::Link { link, a, b, new, from_key, new_key } => {
                if query.relations.len() + 2 > max_relations {
                    continue;
                }
                let (la, na) = (alias(link), alias(new));
                query.relations.push(AliasedRelation { relation: link.into(), alias: la.clone() });
                query.relations.push(AliasedRelation { relation: new.into(), alias: na.clone() });
                query.join_conditions.push(jc(&la, a, &from.alias, from_key));
                query.join_conditions.push(jc(&la, b, &na, new_key));
            }
        }
    }

    let node_aliases: Vec<AliasedRelation> =
        query.relations.iter().filter(|r| is_node_relation(&r.relation)).cloned().collect();
    for _ in 0..rng.random_range(0..3) {
        let r = node_aliases.choose(rng).unwrap();
        query
            .selections
            .push(AliasedPredicate { alias: r.alias.clone(), predicate: random_selection(rng, &r.relation) });
    }
    if rng.random_bool(0.7) {
        query.group_by = Some(node_aliases.choose(rng).unwrap().alias.clone());
    }
    query
}
