use std::collections::{BTreeMap, HashMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::value::ValueKind;

pub const DEFAULT_CATEGORICAL_THRESHOLD: usize = 30;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnDef {
    pub name: String,
    pub kind: ValueKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForeignKey {
    pub attribute: String,
    pub references: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationDef {
    pub name: String,
    pub attributes: Vec<ColumnDef>,
    pub primary_key: Vec<String>,
    #[serde(default)]
    pub foreign_keys: Vec<ForeignKey>,
}

impl RelationDef {
    pub fn attribute(&self, name: &str) -> Option<&ColumnDef> {
        self.attributes.iter().find(|a| a.name == name)
    }

    pub fn foreign_key(&self, attribute: &str) -> Option<&ForeignKey> {
        self.foreign_keys.iter().find(|fk| fk.attribute == attribute)
    }

    pub fn is_foreign_key(&self, attribute: &str) -> bool {
        self.foreign_key(attribute).is_some()
    }

    pub fn in_primary_key(&self, attribute: &str) -> bool {
        self.primary_key.iter().any(|k| k == attribute)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoricalAttribute {
    pub relation: String,
    pub attribute: String,
}

/// Describes a relational dump: relations with keys, plus the user choices
/// the translation cannot infer on its own.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationManifest {
    pub relations: Vec<RelationDef>,
    /// Relation name to label attribute.
    #[serde(default)]
    pub overrides: BTreeMap<String, String>,
    #[serde(default)]
    pub categorical_attributes: Vec<CategoricalAttribute>,
    #[serde(default = "default_threshold")]
    pub categorical_cardinality_threshold: usize,
    /// Edge type id to display name.
    #[serde(default)]
    pub edge_labels: BTreeMap<String, String>,
}

fn default_threshold() -> usize {
    DEFAULT_CATEGORICAL_THRESHOLD
}

impl RelationManifest {
    pub fn new(relations: Vec<RelationDef>) -> Self {
        Self {
            relations,
            overrides: BTreeMap::new(),
            categorical_attributes: Vec::new(),
            categorical_cardinality_threshold: DEFAULT_CATEGORICAL_THRESHOLD,
            edge_labels: BTreeMap::new(),
        }
    }

    pub fn from_json(json: &str) -> Result<Self> {
        let manifest: Self = serde_json::from_str(json)?;
        manifest.check()?;
        Ok(manifest)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn relation(&self, name: &str) -> Option<&RelationDef> {
        self.relations.iter().find(|r| r.name == name)
    }

    /// Structural checks: keys declared, attributes exist, and every foreign
    /// key points at a relation with a single-attribute primary key.
    pub fn check(&self) -> Result<()> {
        let mut seen = HashSet::new();
        let by_name: HashMap<&str, &RelationDef> = self.relations.iter().map(|r| (r.name.as_str(), r)).collect();
        for r in &self.relations {
            if !seen.insert(r.name.as_str()) {
                return Err(Error::Manifest(format!("relation `{}` declared twice", r.name)));
            }
            let mut attrs = HashSet::new();
            for a in &r.attributes {
                if !attrs.insert(a.name.as_str()) {
                    return Err(Error::Manifest(format!("`{}.{}` declared twice", r.name, a.name)));
                }
            }
            if r.primary_key.is_empty() {
                return Err(Error::Manifest(format!("relation `{}` has no primary key", r.name)));
            }
            for k in &r.primary_key {
                if r.attribute(k).is_none() {
                    return Err(Error::Manifest(format!("primary key `{}.{k}` is not an attribute", r.name)));
                }
            }
            for fk in &r.foreign_keys {
                if r.attribute(&fk.attribute).is_none() {
                    return Err(Error::Manifest(format!(
                        "foreign key `{}.{}` is not an attribute",
                        r.name, fk.attribute
                    )));
                }
                let target = by_name.get(fk.references.as_str()).ok_or_else(|| {
                    Error::Manifest(format!(
                        "foreign key `{}.{}` references unknown relation `{}`",
                        r.name, fk.attribute, fk.references
                    ))
                })?;
                if target.primary_key.len() != 1 {
                    return Err(Error::Manifest(format!(
                        "foreign key `{}.{}` references `{}`, whose primary key is not a single attribute",
                        r.name, fk.attribute, fk.references
                    )));
                }
            }
        }
        for c in &self.categorical_attributes {
            let r = by_name.get(c.relation.as_str()).ok_or_else(|| {
                Error::Manifest(format!("categorical attribute on unknown relation `{}`", c.relation))
            })?;
            if r.attribute(&c.attribute).is_none() {
                return Err(Error::Manifest(format!(
                    "categorical attribute `{}.{}` does not exist",
                    c.relation, c.attribute
                )));
            }
        }
        Ok(())
    }
}
