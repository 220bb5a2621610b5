//! Fact-file parsing, corpus assembly and report persistence.
//!
//! The fact file is line-delimited JSON with one record per
//! `(doc_id, side[, model])`:
//!
//! ```text
//! {"doc_id": "d1", "side": "source", "entities": [{"text": "Monday", "type": "Time"}],
//!  "facts": [{"subject": {"text": "Aspirin", "type": "Drug"}, "predicate": "treats", "object": "headache"}]}
//! ```

use std::collections::BTreeMap;
use std::io::{self, BufRead, Write};

use log::warn;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fact::{Fact, FactError, FactSet, Side, TypedEntity};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("line {line}: malformed record: {message}")]
    Malformed { line: usize, message: String },
    #[error("line {line}: field `{field}`: {message}")]
    Field {
        line: usize,
        field: String,
        message: String,
    },
    #[error("line {line}: target record missing model")]
    MissingModel { line: usize },
    #[error("no fact sets to assemble")]
    EmptyCorpus,
    #[error("document `{0}`: multiple sources")]
    MultipleSources(String),
    #[error("document `{0}`: missing source")]
    MissingSource(String),
    #[error("document `{0}`: no targets")]
    NoTargets(String),
    #[error("document `{doc_id}`: duplicate target for model `{model}`")]
    DuplicateTarget { doc_id: String, model: String },
    #[error("malformed report: {0}")]
    Report(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Default)]
pub struct ParsedFacts {
    pub fact_sets: Vec<FactSet>,
    /// Facts dropped because an equal fact was already in the same record.
    pub duplicates: usize,
}

#[derive(Deserialize)]
struct RawRecord {
    doc_id: Option<String>,
    side: Option<String>,
    #[serde(default)]
    model: Option<String>,
    #[serde(default)]
    entities: Option<Vec<RawEntity>>,
    facts: Option<Vec<RawFact>>,
}

#[derive(Deserialize)]
struct RawEntity {
    text: Option<String>,
    #[serde(rename = "type")]
    entity_type: Option<String>,
}

#[derive(Deserialize)]
struct RawFact {
    subject: Option<RawEntity>,
    predicate: Option<String>,
    object: Option<String>,
    #[serde(default)]
    object_type: Option<String>,
}

fn field_error(line: usize, field: impl Into<String>, message: impl Into<String>) -> IngestError {
    IngestError::Field {
        line,
        field: field.into(),
        message: message.into(),
    }
}

fn required<T>(value: Option<T>, line: usize, field: impl Into<String>) -> Result<T, IngestError> {
    value.ok_or_else(|| field_error(line, field, "missing required field"))
}

fn entity(raw: RawEntity, line: usize, path: &str) -> Result<TypedEntity, IngestError> {
    let text = required(raw.text, line, format!("{path}.text"))?;
    let ty = required(raw.entity_type, line, format!("{path}.type"))?;
    TypedEntity::new(&text, &ty).map_err(|e| field_error(line, path, e.to_string()))
}

fn parse_record(raw: RawRecord, line: usize) -> Result<(FactSet, usize), IngestError> {
    let doc_id = required(raw.doc_id, line, "doc_id")?;
    let side = match required(raw.side, line, "side")?.as_str() {
        "source" => Side::Source,
        "target" => Side::Target,
        other => {
            return Err(field_error(
                line,
                "side",
                format!("expected \"source\" or \"target\", got {other:?}"),
            ))
        }
    };
    let facts = required(raw.facts, line, "facts")?;
    let mut fs = FactSet::new(&doc_id, side, raw.model.as_deref()).map_err(|e| match e {
        FactError::MissingModel => IngestError::MissingModel { line },
        other => field_error(line, "doc_id", other.to_string()),
    })?;

    for (i, e) in raw.entities.unwrap_or_default().into_iter().enumerate() {
        fs.add_entity(entity(e, line, &format!("entities[{i}]"))?);
    }

    let mut duplicates = 0;
    for (i, f) in facts.into_iter().enumerate() {
        let path = format!("facts[{i}]");
        let subject = entity(
            required(f.subject, line, format!("{path}.subject"))?,
            line,
            &format!("{path}.subject"),
        )?;
        let predicate = required(f.predicate, line, format!("{path}.predicate"))?;
        let object = required(f.object, line, format!("{path}.object"))?;
        let fact = Fact::new(subject, &predicate, &object, f.object_type.as_deref())
            .map_err(|e| field_error(line, &path, e.to_string()))?;
        if !fs.insert(fact) {
            duplicates += 1;
        }
    }
    Ok((fs, duplicates))
}

/// Parses a fact-file stream. Blank lines are skipped; line numbers are 1-based.
pub fn parse_fact_file<R: BufRead>(reader: R) -> Result<ParsedFacts, IngestError> {
    let mut out = ParsedFacts::default();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let raw: RawRecord = serde_json::from_str(&line).map_err(|e| IngestError::Malformed {
            line: line_no,
            message: e.to_string(),
        })?;
        let (fs, dups) = parse_record(raw, line_no)?;
        if dups > 0 {
            warn!(
                "line {line_no}: dropped {dups} duplicate fact(s) for document `{}`",
                fs.doc_id()
            );
        }
        out.duplicates += dups;
        out.fact_sets.push(fs);
    }
    Ok(out)
}

#[derive(Serialize)]
struct RecordOut<'a> {
    doc_id: &'a str,
    side: Side,
    #[serde(skip_serializing_if = "Option::is_none")]
    model: Option<&'a str>,
    #[serde(skip_serializing_if = "<[TypedEntity]>::is_empty")]
    entities: &'a [TypedEntity],
    facts: Vec<&'a Fact>,
}

/// Writes fact sets back out in the fact-file format, one record per line.
pub fn write_fact_file<W: Write>(fact_sets: &[FactSet], mut out: W) -> Result<(), IngestError> {
    for fs in fact_sets {
        let record = RecordOut {
            doc_id: fs.doc_id(),
            side: fs.side(),
            model: fs.model(),
            entities: fs.entities(),
            facts: fs.facts().collect(),
        };
        serde_json::to_writer(&mut out, &record)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// One document: its ground-truth facts, one fact set per model, and the
/// bag of entity types observed in the source annotation.
#[derive(Debug, Clone, PartialEq)]
pub struct DocumentRecord {
    pub doc_id: String,
    pub source: FactSet,
    pub targets: BTreeMap<String, FactSet>,
    pub type_bag: BTreeMap<String, usize>,
}

impl DocumentRecord {
    pub fn type_count(&self) -> usize {
        self.type_bag.values().sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    /// Sorted by `doc_id`.
    pub documents: Vec<DocumentRecord>,
    /// Sorted union of all target models.
    pub model_names: Vec<String>,
}

impl Corpus {
    pub fn document(&self, doc_id: &str) -> Option<&DocumentRecord> {
        self.documents
            .binary_search_by(|d| d.doc_id.as_str().cmp(doc_id))
            .ok()
            .map(|i| &self.documents[i])
    }
}

/// Subject types of every fact, plus standalone entities whose text is not
/// already the subject of a fact in the same record.
fn type_bag(source: &FactSet) -> BTreeMap<String, usize> {
    let mut bag = BTreeMap::new();
    for fact in source.facts() {
        *bag.entry(fact.subject().entity_type().to_string()).or_insert(0) += 1;
    }
    for e in source.entities() {
        if !source.facts().any(|f| f.subject().text() == e.text()) {
            *bag.entry(e.entity_type().to_string()).or_insert(0) += 1;
        }
    }
    bag
}

pub fn assemble_corpus(fact_sets: Vec<FactSet>) -> Result<Corpus, IngestError> {
    if fact_sets.is_empty() {
        return Err(IngestError::EmptyCorpus);
    }
    let mut sources: BTreeMap<String, FactSet> = BTreeMap::new();
    let mut targets: BTreeMap<String, BTreeMap<String, FactSet>> = BTreeMap::new();

    for fs in fact_sets {
        let doc_id = fs.doc_id().to_string();
        match fs.side() {
            Side::Source => {
                if sources.insert(doc_id.clone(), fs).is_some() {
                    return Err(IngestError::MultipleSources(doc_id));
                }
            }
            Side::Target => {
                let model = fs.model().expect("target fact sets carry a model").to_string();
                let per_doc = targets.entry(doc_id.clone()).or_default();
                if per_doc.contains_key(&model) {
                    return Err(IngestError::DuplicateTarget { doc_id, model });
                }
                per_doc.insert(model, fs);
            }
        }
    }

    if let Some(doc_id) = targets.keys().find(|d| !sources.contains_key(*d)) {
        return Err(IngestError::MissingSource(doc_id.clone()));
    }

    let mut model_names = std::collections::BTreeSet::new();
    let mut documents = Vec::with_capacity(sources.len());
    for (doc_id, source) in sources {
        let doc_targets = targets
            .remove(&doc_id)
            .ok_or_else(|| IngestError::NoTargets(doc_id.clone()))?;
        model_names.extend(doc_targets.keys().cloned());
        documents.push(DocumentRecord {
            type_bag: type_bag(&source),
            doc_id,
            source,
            targets: doc_targets,
        });
    }

    Ok(Corpus {
        documents,
        model_names: model_names.into_iter().collect(),
    })
}

/// Writes a report as a single pretty-printed JSON document.
pub fn write_report<T: Serialize, W: Write>(report: &T, mut out: W) -> Result<(), IngestError> {
    serde_json::to_writer_pretty(&mut out, report)?;
    out.write_all(b"\n")?;
    Ok(())
}

pub fn read_report<T: DeserializeOwned, R: io::Read>(input: R) -> Result<T, IngestError> {
    Ok(serde_json::from_reader(input)?)
}

/// Writes one compact JSON document per line.
pub fn write_jsonl<T: Serialize, W: Write>(items: &[T], mut out: W) -> Result<(), IngestError> {
    for item in items {
        serde_json::to_writer(&mut out, item)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_jsonl<T: DeserializeOwned, R: BufRead>(input: R) -> Result<Vec<T>, IngestError> {
    let mut items = Vec::new();
    for (idx, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        items.push(
            serde_json::from_str(&line).map_err(|e| IngestError::Malformed {
                line: idx + 1,
                message: e.to_string(),
            })?,
        );
    }
    Ok(items)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<ParsedFacts, IngestError> {
        parse_fact_file(text.as_bytes())
    }

    const D1_SOURCE: &str = r#"{"doc_id":"d1","side":"source","facts":[{"subject":{"text":"Aspirin","type":"Drug"},"predicate":"treats","object":"headache"}]}"#;

    #[test]
    fn parses_single_record() {
        let parsed = parse(D1_SOURCE).unwrap();
        assert_eq!(parsed.fact_sets.len(), 1);
        let fs = &parsed.fact_sets[0];
        assert_eq!(fs.len(), 1);
        assert_eq!(fs.facts().next().unwrap().subject().text(), "aspirin");
        assert_eq!(parsed.duplicates, 0);
    }

    #[test]
    fn duplicate_facts_are_counted_not_fatal() {
        let line = r#"{"doc_id":"d1","side":"source","facts":[
            {"subject":{"text":"Aspirin","type":"Drug"},"predicate":"treats","object":"headache"},
            {"subject":{"text":"aspirin","type":"Drug"},"predicate":"Treats","object":"headache "}]}"#
            .replace('\n', "");
        let parsed = parse(&line).unwrap();
        assert_eq!(parsed.fact_sets[0].len(), 1);
        assert_eq!(parsed.duplicates, 1);
    }

    #[test]
    fn target_without_model_is_rejected() {
        let err = parse(r#"{"doc_id":"d1","side":"target","facts":[]}"#).unwrap_err();
        assert!(matches!(err, IngestError::MissingModel { line: 1 }));
        assert_eq!(err.to_string(), "line 1: target record missing model");
    }

    #[test]
    fn errors_name_line_and_field() {
        let text = format!(
            "{D1_SOURCE}\n\n{}",
            r#"{"doc_id":"d1","side":"source","facts":[{"subject":{"text":"  ","type":"Drug"},"predicate":"p","object":"o"}]}"#
        );
        match parse(&text).unwrap_err() {
            IngestError::Field { line, field, .. } => {
                assert_eq!(line, 3);
                assert_eq!(field, "facts[0].subject");
            }
            other => panic!("unexpected {other}"),
        }
        match parse(r#"{"side":"source","facts":[]}"#).unwrap_err() {
            IngestError::Field { field, .. } => assert_eq!(field, "doc_id"),
            other => panic!("unexpected {other}"),
        }
        match parse(r#"{"doc_id":"d","side":"source","facts":[{"subject":{"text":"a","type":"T"},"object":"o"}]}"#).unwrap_err() {
            IngestError::Field { field, .. } => assert_eq!(field, "facts[0].predicate"),
            other => panic!("unexpected {other}"),
        }
        assert!(matches!(parse("{not json").unwrap_err(), IngestError::Malformed { line: 1, .. }));
        assert!(matches!(
            parse(r#"{"doc_id":"d","side":"both","facts":[]}"#).unwrap_err(),
            IngestError::Field { .. }
        ));
    }

    fn fs(doc: &str, side: Side, model: Option<&str>) -> FactSet {
        FactSet::new(doc, side, model).unwrap()
    }

    #[test]
    fn assembles_one_document_two_models() {
        let corpus = assemble_corpus(vec![
            fs("d1", Side::Target, Some("m2")),
            fs("d1", Side::Source, None),
            fs("d1", Side::Target, Some("m1")),
        ])
        .unwrap();
        assert_eq!(corpus.documents.len(), 1);
        assert_eq!(corpus.model_names, vec!["m1", "m2"]);
    }

    #[test]
    fn assembly_errors() {
        let err = assemble_corpus(vec![
            fs("d1", Side::Source, None),
            fs("d1", Side::Source, None),
            fs("d1", Side::Target, Some("m")),
        ])
        .unwrap_err();
        assert_eq!(err.to_string(), "document `d1`: multiple sources");

        let err = assemble_corpus(vec![fs("d1", Side::Target, Some("m"))]).unwrap_err();
        assert_eq!(err.to_string(), "document `d1`: missing source");

        let err = assemble_corpus(vec![fs("d1", Side::Source, None)]).unwrap_err();
        assert!(matches!(err, IngestError::NoTargets(_)));

        let err = assemble_corpus(vec![
            fs("d1", Side::Source, None),
            fs("d1", Side::Target, Some("m")),
            fs("d1", Side::Target, Some("m")),
        ])
        .unwrap_err();
        assert!(matches!(err, IngestError::DuplicateTarget { .. }));

        assert!(matches!(assemble_corpus(vec![]), Err(IngestError::EmptyCorpus)));
    }

    #[test]
    fn type_bag_counts_occurrences() {
        let text = r#"{"doc_id":"d1","side":"source","entities":[{"text":"Monday","type":"Time"},{"text":"John","type":"Person"}],"facts":[{"subject":{"text":"John","type":"Person"},"predicate":"takes","object":"aspirin"},{"subject":{"text":"John","type":"Person"},"predicate":"visits","object":"Mary"}]}
{"doc_id":"d1","side":"target","model":"m","facts":[{"subject":{"text":"Zed","type":"Org"},"predicate":"p","object":"q"}]}"#;
        let corpus = assemble_corpus(parse(text).unwrap().fact_sets).unwrap();
        let bag = &corpus.documents[0].type_bag;
        assert_eq!(bag.get("Person"), Some(&2));
        assert_eq!(bag.get("Time"), Some(&1));
        assert_eq!(bag.get("Org"), None);
    }
}
