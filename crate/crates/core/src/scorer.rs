//! Weighted fact alignment between a source and a target fact set.
//!
//! Subject/object pairs are matched exactly. A source fact whose pair never
//! occurs on the target side is a false negative, a target fact whose pair
//! never occurs on the source side is a false positive, and every source and
//! target fact sharing a pair adds the similarity of their predicates to the
//! true-positive mass.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::num::NonZeroUsize;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fact::{Fact, FactSet, SoPair};
use crate::ingest::{Corpus, DocumentRecord};
use crate::similarity::{SimilarityError, SimilarityProvider};
use crate::weights::TypeSet;

#[derive(Debug, Error)]
pub enum ScoreError {
    #[error("document `{doc_id}` has no target for model `{model}`")]
    UnknownModel { doc_id: String, model: String },
    #[error("type set is empty")]
    EmptyTypeSet,
    #[error(transparent)]
    Similarity(#[from] SimilarityError),
    #[error("could not start worker pool: {0}")]
    Pool(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoringMode {
    /// Every target fact sharing the pair contributes its similarity.
    #[default]
    Literal,
    /// Only the most similar target fact sharing the pair contributes.
    BestMatch,
}

impl FromStr for ScoringMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "literal" => Ok(ScoringMode::Literal),
            "best_match" => Ok(ScoringMode::BestMatch),
            other => Err(format!("unknown scoring mode `{other}` (expected literal or best_match)")),
        }
    }
}

impl fmt::Display for ScoringMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ScoringMode::Literal => "literal",
            ScoringMode::BestMatch => "best_match",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Counts {
    /// Similarity-weighted; negative similarities may drive it below 0.
    pub tp: f64,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchedFact {
    pub source_fact: Fact,
    pub target_fact: Fact,
    pub similarity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub doc_id: String,
    pub model: String,
    pub tp: f64,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Both filtered fact sets were empty.
    #[serde(default)]
    pub vacuous: bool,
    pub matched: Vec<MatchedFact>,
    pub fn_facts: Vec<Fact>,
    pub fp_facts: Vec<Fact>,
}

impl ScoreReport {
    pub fn counts(&self) -> Counts {
        Counts {
            tp: self.tp,
            fp: self.fp,
            fn_: self.fn_,
        }
    }
}

/// Precision, recall and F1 from weighted counts. `tp` is clamped at 0
/// first; any zero denominator yields 0.
pub fn precision_recall_f1(counts: &Counts) -> (f64, f64, f64) {
    let tp = counts.tp.max(0.0);
    let ratio = |misses: usize| {
        let denom = tp + misses as f64;
        if denom == 0.0 {
            0.0
        } else {
            (tp / denom).clamp(0.0, 1.0)
        }
    };
    let precision = ratio(counts.fp);
    let recall = ratio(counts.fn_);
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        (2.0 * precision * recall / (precision + recall)).clamp(0.0, 1.0)
    };
    (precision, recall, f1)
}

/// Keeps the facts whose subject type is in `types`.
pub fn filter_facts(fs: &FactSet, types: &TypeSet) -> Result<FactSet, ScoreError> {
    if types.is_empty() {
        return Err(ScoreError::EmptyTypeSet);
    }
    Ok(fs.retain_facts(|f| types.contains(f.subject().entity_type())))
}

struct Alignment {
    counts: Counts,
    matched: Vec<MatchedFact>,
    fn_facts: Vec<Fact>,
    fp_facts: Vec<Fact>,
}

fn target_index(target: &FactSet) -> HashMap<SoPair<'_>, Vec<&Fact>> {
    let mut index: HashMap<SoPair<'_>, Vec<&Fact>> = HashMap::new();
    for f in target.facts() {
        index.entry(f.so_pair()).or_default().push(f);
    }
    index
}

/// Predicate pairs whose similarity the alignment will need.
pub fn predicate_pairs(source: &FactSet, target: &FactSet) -> Vec<(String, String)> {
    let index = target_index(target);
    let mut pairs = Vec::new();
    for fs in source.facts() {
        for ft in index.get(&fs.so_pair()).into_iter().flatten() {
            pairs.push((fs.predicate().to_string(), ft.predicate().to_string()));
        }
    }
    pairs
}

fn align<P: SimilarityProvider + ?Sized>(
    source: &FactSet,
    target: &FactSet,
    provider: &P,
    mode: ScoringMode,
) -> Result<Alignment, SimilarityError> {
    let index = target_index(target);
    let source_pairs: HashSet<SoPair<'_>> = source.so_pairs();

    let mut tp = 0.0;
    let mut matched = Vec::new();
    let mut fn_facts = Vec::new();

    // facts iterate in canonical order, so the tp accumulation order is fixed
    for fs in source.facts() {
        let Some(candidates) = index.get(&fs.so_pair()) else {
            fn_facts.push(fs.clone());
            continue;
        };
        match mode {
            ScoringMode::Literal => {
                for ft in candidates {
                    let s = provider.score(fs.predicate(), ft.predicate())?;
                    tp += s;
                    matched.push(MatchedFact {
                        source_fact: fs.clone(),
                        target_fact: (*ft).clone(),
                        similarity: s,
                    });
                }
            }
            ScoringMode::BestMatch => {
                let mut best: Option<(&Fact, f64)> = None;
                for ft in candidates {
                    let s = provider.score(fs.predicate(), ft.predicate())?;
                    if best.is_none_or(|(_, b)| s > b) {
                        best = Some((ft, s));
                    }
                }
                let (ft, s) = best.expect("index buckets are non-empty");
                tp += s;
                matched.push(MatchedFact {
                    source_fact: fs.clone(),
                    target_fact: ft.clone(),
                    similarity: s,
                });
            }
        }
    }

    let fp_facts: Vec<Fact> = target
        .facts()
        .filter(|ft| !source_pairs.contains(&ft.so_pair()))
        .cloned()
        .collect();

    Ok(Alignment {
        counts: Counts {
            tp,
            fp: fp_facts.len(),
            fn_: fn_facts.len(),
        },
        matched,
        fn_facts,
        fp_facts,
    })
}

/// Weighted TP/FP/FN between two (already type-filtered) fact sets.
pub fn weighted_counts<P: SimilarityProvider + ?Sized>(
    source: &FactSet,
    target: &FactSet,
    provider: &P,
    mode: ScoringMode,
) -> Result<Counts, ScoreError> {
    Ok(align(source, target, provider, mode)?.counts)
}

/// Scores one fact-set pair after filtering both sides by `types`.
pub fn score_fact_sets<P: SimilarityProvider + ?Sized>(
    doc_id: &str,
    model: &str,
    source: &FactSet,
    target: &FactSet,
    types: &TypeSet,
    provider: &P,
    mode: ScoringMode,
) -> Result<ScoreReport, ScoreError> {
    let source = filter_facts(source, types)?;
    let target = filter_facts(target, types)?;
    let alignment = align(&source, &target, provider, mode)?;
    let vacuous = source.is_empty() && target.is_empty();
    let (precision, recall, f1) = if vacuous {
        (1.0, 1.0, 1.0)
    } else {
        precision_recall_f1(&alignment.counts)
    };
    Ok(ScoreReport {
        doc_id: doc_id.to_string(),
        model: model.to_string(),
        tp: alignment.counts.tp,
        fp: alignment.counts.fp,
        fn_: alignment.counts.fn_,
        precision,
        recall,
        f1,
        vacuous,
        matched: alignment.matched,
        fn_facts: alignment.fn_facts,
        fp_facts: alignment.fp_facts,
    })
}

pub fn score_document<P: SimilarityProvider + ?Sized>(
    doc: &DocumentRecord,
    model: &str,
    types: &TypeSet,
    provider: &P,
    mode: ScoringMode,
) -> Result<ScoreReport, ScoreError> {
    let target = doc.targets.get(model).ok_or_else(|| ScoreError::UnknownModel {
        doc_id: doc.doc_id.clone(),
        model: model.to_string(),
    })?;
    score_fact_sets(&doc.doc_id, model, &doc.source, target, types, provider, mode)
}

/// Scores every `(document, model)` pair of the corpus on `jobs` worker
/// threads. Reports come back in `(doc_id, model)` order whatever the
/// degree of parallelism.
pub fn score_corpus<P: SimilarityProvider + ?Sized>(
    corpus: &Corpus,
    types: &TypeSet,
    provider: &P,
    mode: ScoringMode,
    jobs: NonZeroUsize,
) -> Result<Vec<ScoreReport>, ScoreError> {
    if types.is_empty() {
        return Err(ScoreError::EmptyTypeSet);
    }
    let tasks: Vec<(&DocumentRecord, &str)> = corpus
        .documents
        .iter()
        .flat_map(|d| d.targets.keys().map(move |m| (d, m.as_str())))
        .collect();

    let mut needed: Vec<(String, String)> = tasks
        .iter()
        .flat_map(|(d, m)| {
            let source = d.source.retain_facts(|f| types.contains(f.subject().entity_type()));
            let target = d.targets[*m].retain_facts(|f| types.contains(f.subject().entity_type()));
            predicate_pairs(&source, &target)
        })
        .collect();
    needed.sort_unstable();
    needed.dedup();
    provider.prefetch(&needed)?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.get())
        .build()
        .map_err(|e| ScoreError::Pool(e.to_string()))?;
    pool.install(|| {
        tasks
            .par_iter()
            .map(|(doc, model)| score_document(doc, model, types, provider, mode))
            .collect()
    })
}
