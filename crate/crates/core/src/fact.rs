//! Typed entities, atomic facts and per-document fact sets.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::hash::{Hash, Hasher};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Case-folds, collapses internal whitespace and trims.
pub fn normalize_text(raw: &str) -> String {
    raw.split_whitespace()
        .map(str::to_lowercase)
        .collect::<Vec<_>>()
        .join(" ")
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FactError {
    #[error("empty {0}")]
    Empty(&'static str),
    #[error("target record missing model")]
    MissingModel,
}

/// An entity surface form together with its annotated type label.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawEntity")]
pub struct TypedEntity {
    text: String,
    #[serde(rename = "type")]
    entity_type: String,
}

#[derive(Deserialize)]
struct RawEntity {
    text: String,
    #[serde(rename = "type")]
    entity_type: String,
}

impl TryFrom<RawEntity> for TypedEntity {
    type Error = FactError;

    fn try_from(raw: RawEntity) -> Result<Self, Self::Error> {
        TypedEntity::new(&raw.text, &raw.entity_type)
    }
}

impl TypedEntity {
    pub fn new(text: &str, entity_type: &str) -> Result<Self, FactError> {
        let text = normalize_text(text);
        if text.is_empty() {
            return Err(FactError::Empty("entity text"));
        }
        let entity_type = entity_type.trim();
        if entity_type.is_empty() {
            return Err(FactError::Empty("entity type"));
        }
        Ok(Self {
            text,
            entity_type: entity_type.to_string(),
        })
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn entity_type(&self) -> &str {
        &self.entity_type
    }
}

/// An atomic `(subject, predicate, object)` triple.
///
/// Identity is the normalized `(subject text, predicate, object)` key. The
/// subject's type and the optional object type are carried along but never
/// take part in equality, ordering or hashing.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "RawFact")]
pub struct Fact {
    subject: TypedEntity,
    predicate: String,
    object: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    object_type: Option<String>,
}

#[derive(Deserialize)]
struct RawFact {
    subject: TypedEntity,
    predicate: String,
    object: String,
    #[serde(default)]
    object_type: Option<String>,
}

impl TryFrom<RawFact> for Fact {
    type Error = FactError;

    fn try_from(raw: RawFact) -> Result<Self, Self::Error> {
        Fact::new(raw.subject, &raw.predicate, &raw.object, raw.object_type.as_deref())
    }
}

impl Fact {
    pub fn new(
        subject: TypedEntity,
        predicate: &str,
        object: &str,
        object_type: Option<&str>,
    ) -> Result<Self, FactError> {
        let predicate = normalize_text(predicate);
        if predicate.is_empty() {
            return Err(FactError::Empty("predicate"));
        }
        let object = normalize_text(object);
        if object.is_empty() {
            return Err(FactError::Empty("object"));
        }
        let object_type = object_type
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(str::to_string);
        Ok(Self {
            subject,
            predicate,
            object,
            object_type,
        })
    }

    pub fn subject(&self) -> &TypedEntity {
        &self.subject
    }

    pub fn predicate(&self) -> &str {
        &self.predicate
    }

    pub fn object(&self) -> &str {
        &self.object
    }

    pub fn object_type(&self) -> Option<&str> {
        self.object_type.as_deref()
    }

    /// The `(subject, object)` projection used for hard matching.
    pub fn so_pair(&self) -> SoPair<'_> {
        SoPair {
            subject: &self.subject.text,
            object: &self.object,
        }
    }

    fn key(&self) -> (&str, &str, &str) {
        (&self.subject.text, &self.predicate, &self.object)
    }
}

impl PartialEq for Fact {
    fn eq(&self, other: &Self) -> bool {
        self.key() == other.key()
    }
}

impl Eq for Fact {}

impl Hash for Fact {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.key().hash(state);
    }
}

impl PartialOrd for Fact {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Fact {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key().cmp(&other.key())
    }
}

impl fmt::Display for Fact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({}, {}, {})",
            self.subject.text, self.predicate, self.object
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SoPair<'a> {
    pub subject: &'a str,
    pub object: &'a str,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Source,
    Target,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Side::Source => f.write_str("source"),
            Side::Target => f.write_str("target"),
        }
    }
}

/// Deduplicated facts for one `(document, side[, model])`.
///
/// `entities` holds standalone annotations that did not produce a triple;
/// they only feed type statistics.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactSet {
    doc_id: String,
    side: Side,
    model: Option<String>,
    facts: BTreeSet<Fact>,
    entities: Vec<TypedEntity>,
}

impl FactSet {
    pub fn new(doc_id: &str, side: Side, model: Option<&str>) -> Result<Self, FactError> {
        let doc_id = doc_id.trim();
        if doc_id.is_empty() {
            return Err(FactError::Empty("doc_id"));
        }
        let model = model.map(str::trim).filter(|m| !m.is_empty());
        if side == Side::Target && model.is_none() {
            return Err(FactError::MissingModel);
        }
        Ok(Self {
            doc_id: doc_id.to_string(),
            side,
            model: model.map(str::to_string),
            facts: BTreeSet::new(),
            entities: Vec::new(),
        })
    }

    /// Inserts a fact, returning `false` when an equal fact is already present.
    pub fn insert(&mut self, fact: Fact) -> bool {
        self.facts.insert(fact)
    }

    pub fn add_entity(&mut self, entity: TypedEntity) {
        self.entities.push(entity);
    }

    pub fn doc_id(&self) -> &str {
        &self.doc_id
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn model(&self) -> Option<&str> {
        self.model.as_deref()
    }

    /// Facts in canonical (sorted) order.
    pub fn facts(&self) -> impl ExactSizeIterator<Item = &Fact> + Clone {
        self.facts.iter()
    }

    pub fn entities(&self) -> &[TypedEntity] {
        &self.entities
    }

    pub fn len(&self) -> usize {
        self.facts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.facts.is_empty()
    }

    pub fn contains(&self, fact: &Fact) -> bool {
        self.facts.contains(fact)
    }

    pub fn so_pairs(&self) -> HashSet<SoPair<'_>> {
        so_pairs(self)
    }

    /// Same set restricted to facts accepted by `keep`.
    pub fn retain_facts(&self, mut keep: impl FnMut(&Fact) -> bool) -> FactSet {
        FactSet {
            doc_id: self.doc_id.clone(),
            side: self.side,
            model: self.model.clone(),
            facts: self.facts.iter().filter(|f| keep(f)).cloned().collect(),
            entities: self.entities.clone(),
        }
    }
}

pub fn so_pairs(fs: &FactSet) -> HashSet<SoPair<'_>> {
    fs.facts.iter().map(Fact::so_pair).collect()
}
