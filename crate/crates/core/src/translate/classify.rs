use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::manifest::{RelationDef, RelationManifest};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RelationCategory {
    Entity,
    RelationshipMn,
    MultivaluedAttribute,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationClass {
    pub relation: String,
    pub category: RelationCategory,
}

/// Sorts every relation into exactly one category:
///
/// * entity: the primary key contains no foreign key;
/// * many-to-many relationship: a two-attribute primary key whose parts both
///   reference entity relations;
/// * multivalued attribute: exactly two attributes, together the primary key,
///   one of them referencing an entity relation and the other not a foreign key.
///
/// Anything else is rejected with the reason it fits none of these.
pub fn classify_relations(manifest: &RelationManifest) -> Result<Vec<RelationClass>> {
    manifest.check()?;
    let entities: HashSet<&str> = manifest
        .relations
        .iter()
        .filter(|r| !r.primary_key.iter().any(|k| r.is_foreign_key(k)))
        .map(|r| r.name.as_str())
        .collect();

    manifest
        .relations
        .iter()
        .map(|r| {
            let category = if entities.contains(r.name.as_str()) {
                RelationCategory::Entity
            } else {
                classify_dependent(r, &entities)?
            };
            Ok(RelationClass { relation: r.name.clone(), category })
        })
        .collect()
}

fn classify_dependent(r: &RelationDef, entities: &HashSet<&str>) -> Result<RelationCategory> {
    let refs_entity = |attr: &str| r.foreign_key(attr).is_some_and(|fk| entities.contains(fk.references.as_str()));
    let fail = |reason: String| Error::UnclassifiableRelation { relation: r.name.clone(), reason };

    if r.primary_key.len() != 2 {
        return Err(fail(format!(
            "primary key has {} attributes and contains a foreign key; only binary link relations are supported",
            r.primary_key.len()
        )));
    }
    let (a, b) = (&r.primary_key[0], &r.primary_key[1]);
    match (refs_entity(a), refs_entity(b)) {
        (true, true) => Ok(RelationCategory::RelationshipMn),
        (true, false) | (false, true) => {
            let value = if refs_entity(a) { b } else { a };
            if r.attributes.len() != 2 {
                Err(fail(format!(
                    "looks like a multivalued attribute but has {} attributes instead of 2",
                    r.attributes.len()
                )))
            } else if r.is_foreign_key(value) {
                Err(fail(format!("`{value}` is a foreign key to a non-entity relation")))
            } else {
                Ok(RelationCategory::MultivaluedAttribute)
            }
        }
        (false, false) => Err(fail("composite primary key references no entity relation".into())),
    }
}
