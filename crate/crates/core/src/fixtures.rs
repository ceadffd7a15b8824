//! Bundled datasets for examples, tests and demos.
//!
//! The academic dataset is a small publication database of seven relations
//! (four entity tables, two many-to-many link tables and one keyword table)
//! with seven foreign keys. Its rows are synthetic but shaped so that the
//! walkthrough queries used throughout the docs have unambiguous answers.

use std::collections::BTreeMap;
use std::path::PathBuf;

use crate::tgdb::{AttributeDef, Edge, EdgeOrigin, EdgeType, InstanceGraph, Node, NodeOrigin, NodeType, SchemaGraph};
use crate::translate::{translate, RawTable, RelationManifest, Tables, TranslateOptions, Translation};
use crate::value::{Value, ValueKind};

pub const ACADEMIC_MANIFEST: &str = include_str!("../fixtures/academic/manifest.json");

pub const ACADEMIC_TABLES: [(&str, &str); 7] = [
    ("Conferences", include_str!("../fixtures/academic/Conferences.csv")),
    ("Institutions", include_str!("../fixtures/academic/Institutions.csv")),
    ("Authors", include_str!("../fixtures/academic/Authors.csv")),
    ("Papers", include_str!("../fixtures/academic/Papers.csv")),
    ("Paper_authors", include_str!("../fixtures/academic/Paper_authors.csv")),
    ("Paper_citations", include_str!("../fixtures/academic/Paper_citations.csv")),
    ("Paper_keywords", include_str!("../fixtures/academic/Paper_keywords.csv")),
];

/// Directory holding the academic manifest and CSV files on disk.
pub fn academic_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join("academic")
}

pub fn academic_manifest() -> RelationManifest {
    RelationManifest::from_json(ACADEMIC_MANIFEST).expect("bundled manifest is valid")
}

pub fn academic_tables() -> Tables {
    ACADEMIC_TABLES
        .iter()
        .map(|(name, csv)| (name.to_string(), RawTable::from_csv(csv).expect("bundled CSV is valid")))
        .collect()
}

pub fn academic_translation() -> Translation {
    translate(&academic_manifest(), &academic_tables(), TranslateOptions { strict: true })
        .expect("bundled dataset translates cleanly")
}

pub fn academic_graph() -> InstanceGraph {
    academic_translation().graph
}

/// A hand-built graph of three papers, four authors and two conferences,
/// plus an unpaired `related` self loop between papers and an empty
/// `Keywords` type.
pub fn tiny_graph() -> InstanceGraph {
    let nt = |id: &str, attrs: &[(&str, ValueKind)], label: &str, origin| NodeType {
        id: id.into(),
        name: id.into(),
        attributes: attrs.iter().map(|(n, k)| AttributeDef::new(*n, *k)).collect(),
        label_attribute: label.into(),
        origin,
        provenance: None,
    };
    let et = |id: &str, name: &str, s: &str, t: &str, rev: Option<&str>| EdgeType {
        id: id.into(),
        name: name.into(),
        source_type: s.into(),
        target_type: t.into(),
        reverse_of: rev.map(Into::into),
        origin: EdgeOrigin::MnRelationship,
        provenance: None,
    };
    let schema = SchemaGraph::new(
        vec![
            nt("Papers", &[("title", ValueKind::Text), ("year", ValueKind::Integer)], "title", NodeOrigin::EntityTable),
            nt("Authors", &[("name", ValueKind::Text)], "name", NodeOrigin::EntityTable),
            nt("Conferences", &[("name", ValueKind::Text)], "name", NodeOrigin::EntityTable),
            nt("Keywords", &[("keyword", ValueKind::Text)], "keyword", NodeOrigin::MultivaluedAttribute),
        ],
        vec![
            et("authors", "Authors", "Papers", "Authors", Some("papers")),
            et("papers", "Papers", "Authors", "Papers", Some("authors")),
            et("conference", "Conferences", "Papers", "Conferences", Some("conference_papers")),
            et("conference_papers", "Papers", "Conferences", "Papers", Some("conference")),
            et("keywords", "Keywords", "Papers", "Keywords", Some("keyword_papers")),
            et("keyword_papers", "Papers", "Keywords", "Papers", Some("keywords")),
            et("related", "Related", "Papers", "Papers", None),
        ],
    )
    .expect("ids are unique");

    let node = |id: &str, ty: &str, vals: Vec<(&str, Value)>| Node {
        id: id.into(),
        node_type: ty.into(),
        values: vals.into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
    };
    let nodes = vec![
        node("Papers:p1", "Papers", vec![("title", "Usable databases".into()), ("year", 2004.into())]),
        node("Papers:p2", "Papers", vec![("title", "Guided interaction".into()), ("year", 2007.into())]),
        node("Papers:p3", "Papers", vec![("title", "Column stores".into()), ("year", 2013.into())]),
        node("Authors:a1", "Authors", vec![("name", "Arnab Nandi".into())]),
        node("Authors:a2", "Authors", vec![("name", "H. V. Jagadish".into())]),
        node("Authors:a3", "Authors", vec![("name", "Samuel Madden".into())]),
        node("Authors:a4", "Authors", vec![("name", Value::Null)]),
        node("Conferences:c1", "Conferences", vec![("name", "SIGMOD".into())]),
        node("Conferences:c2", "Conferences", vec![("name", "VLDB".into())]),
    ];

    let mut edges = Vec::new();
    let mut pair = |ty: &str, rev: Option<&str>, s: &str, t: &str| {
        let mut push = |ty: &str, s: &str, t: &str| {
            edges.push(Edge {
                id: format!("{ty}:{s}->{t}"),
                edge_type: ty.into(),
                source: s.into(),
                target: t.into(),
                values: BTreeMap::new(),
            })
        };
        push(ty, s, t);
        if let Some(rev) = rev {
            push(rev, t, s);
        }
    };
    for (p, a) in [("p1", "a1"), ("p1", "a2"), ("p2", "a2"), ("p2", "a3"), ("p3", "a3")] {
        pair("authors", Some("papers"), &format!("Papers:{p}"), &format!("Authors:{a}"));
    }
    for (p, c) in [("p1", "c1"), ("p2", "c1"), ("p3", "c2")] {
        pair("conference", Some("conference_papers"), &format!("Papers:{p}"), &format!("Conferences:{c}"));
    }
    pair("related", None, "Papers:p2", "Papers:p1");

    InstanceGraph::new(schema, nodes, edges).expect("tiny graph is consistent")
}
