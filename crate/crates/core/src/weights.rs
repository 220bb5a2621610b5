//! TF-IDF weighting over bags of entity types and top-n type selection.

use std::collections::BTreeMap;
use std::num::NonZeroUsize;

use crate::ingest::Corpus;

/// Per-document and corpus-level TF-IDF weights of entity types.
///
/// `tf` is the within-document relative frequency and `idf = ln(N / df)`,
/// unsmoothed, so a type present in every document weighs exactly 0.
#[derive(Debug, Clone, PartialEq)]
pub struct TypeWeights {
    pub n_docs: usize,
    pub per_doc: BTreeMap<(String, String), f64>,
    /// Mean of the per-document weights over all `n_docs` documents.
    pub aggregate: BTreeMap<String, f64>,
    pub df: BTreeMap<String, usize>,
    /// Corpus-wide occurrence count, used to rank types when every idf is 0.
    pub frequency: BTreeMap<String, usize>,
}

impl TypeWeights {
    pub fn aggregate_weight(&self, entity_type: &str) -> f64 {
        self.aggregate.get(entity_type).copied().unwrap_or(0.0)
    }
}

pub fn tfidf_weights(corpus: &Corpus) -> TypeWeights {
    let n_docs = corpus.documents.len();
    let mut df: BTreeMap<String, usize> = BTreeMap::new();
    let mut frequency: BTreeMap<String, usize> = BTreeMap::new();
    for doc in &corpus.documents {
        for (ty, &count) in doc.type_bag.iter().filter(|(_, &c)| c > 0) {
            *df.entry(ty.clone()).or_insert(0) += 1;
            *frequency.entry(ty.clone()).or_insert(0) += count;
        }
    }

    let mut per_doc = BTreeMap::new();
    let mut sums: BTreeMap<String, f64> = df.keys().map(|t| (t.clone(), 0.0)).collect();
    // documents are sorted by doc_id, so the accumulation order is canonical
    for doc in &corpus.documents {
        let total = doc.type_count();
        if total == 0 {
            continue;
        }
        for (ty, &count) in doc.type_bag.iter().filter(|(_, &c)| c > 0) {
            let tf = count as f64 / total as f64;
            let idf = (n_docs as f64 / df[ty] as f64).ln();
            let w = tf * idf;
            per_doc.insert((doc.doc_id.clone(), ty.clone()), w);
            *sums.get_mut(ty).expect("every bag type has a df entry") += w;
        }
    }
    let aggregate = sums
        .into_iter()
        .map(|(ty, sum)| (ty, sum / n_docs as f64))
        .collect();

    TypeWeights {
        n_docs,
        per_doc,
        aggregate,
        df,
        frequency,
    }
}

/// The selected top-n entity types.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeSet {
    pub types: Vec<String>,
    pub n: usize,
}

impl TypeSet {
    pub fn contains(&self, entity_type: &str) -> bool {
        self.types.iter().any(|t| t == entity_type)
    }

    pub fn is_empty(&self) -> bool {
        self.types.is_empty()
    }
}

/// Ranks types by aggregate weight (descending, ties by label) and keeps
/// the first `n`. If every aggregate weight is 0 the ranking falls back to
/// corpus-wide frequency.
pub fn select_top_types(weights: &TypeWeights, n: NonZeroUsize) -> TypeSet {
    let mut types: Vec<&String> = weights.aggregate.keys().collect();
    let degenerate = weights.aggregate.values().all(|&w| w == 0.0);
    if degenerate {
        types.sort_by(|a, b| {
            weights.frequency[*b]
                .cmp(&weights.frequency[*a])
                .then_with(|| a.cmp(b))
        });
    } else {
        types.sort_by(|a, b| {
            weights.aggregate[*b]
                .total_cmp(&weights.aggregate[*a])
                .then_with(|| a.cmp(b))
        });
    }
    types.truncate(n.get());
    TypeSet {
        types: types.into_iter().cloned().collect(),
        n: n.get(),
    }
}
