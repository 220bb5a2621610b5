//! Schema-free factual consistency scoring.
//!
//! Annotated source and target texts arrive as sets of
//! `(subject, predicate, object)` facts. Subject/object pairs are matched
//! exactly, predicates softly through a [`similarity::SimilarityProvider`],
//! and the resulting weighted true-positive mass, false positives
//! (hallucinated facts) and false negatives (omitted facts) give precision,
//! recall and F1 per document. Facts can be gated to the top-n entity types
//! by TF-IDF weight, and models are compared across a corpus with a
//! Friedman test and Nemenyi post-hoc p-values.

pub mod fact;
pub mod ingest;
pub mod scorer;
pub mod similarity;
pub mod stats;
pub mod weights;

pub use fact::{normalize_text, so_pairs, Fact, FactError, FactSet, Side, SoPair, TypedEntity};
pub use ingest::{assemble_corpus, parse_fact_file, Corpus, DocumentRecord, IngestError, ParsedFacts};
pub use scorer::{
    filter_facts, score_corpus, score_document, weighted_counts, Counts, MatchedFact, ScoreError,
    ScoreReport, ScoringMode,
};
pub use similarity::{SimilarityError, SimilarityProvider, TrigramProvider};
pub use stats::{compare, friedman, posthoc, rank_rows, top_rank_tally, ComparisonResult, ScoreMatrix, StatsError};
pub use weights::{select_top_types, tfidf_weights, TypeSet, TypeWeights};
