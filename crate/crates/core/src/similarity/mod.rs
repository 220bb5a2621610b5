//! Soft predicate similarity.
//!
//! Every provider returns scores in `[-1, 1]`, scores a non-empty string
//! against itself as exactly `1.0`, and is symmetric. The built-in
//! [`TrigramProvider`] is deterministic and needs no model; the
//! [`ExternalProvider`] delegates to an HTTP backend (for example a real
//! BERTScore service).

mod external;
mod trigram;

use thiserror::Error;

pub use external::{ExternalProvider, ExternalProviderConfig};
pub use trigram::{cosine, greedy_match_score, trigram_embed, TokenEmbedding, TrigramProvider, EMBEDDING_DIM};

#[derive(Debug, Error)]
pub enum SimilarityError {
    #[error("unscorable predicate {0:?}")]
    UnscorablePredicate(String),
    #[error("empty similarity batch")]
    EmptyBatch,
    #[error("provider transport failure: {0}")]
    Transport(String),
    #[error("provider timed out after {0} ms")]
    Timeout(u64),
    #[error("malformed provider response: {0}")]
    MalformedResponse(String),
    #[error("provider contract violation: {0}")]
    ContractViolation(String),
}

impl SimilarityError {
    /// Errors raised by a remote backend rather than by the inputs.
    pub fn is_provider_failure(&self) -> bool {
        !matches!(self, SimilarityError::UnscorablePredicate(_))
    }
}

pub trait SimilarityProvider: Send + Sync {
    fn name(&self) -> &str;

    fn score(&self, a: &str, b: &str) -> Result<f64, SimilarityError>;

    /// Hint that `pairs` will be scored soon, so batching backends can fetch
    /// them in bulk.
    fn prefetch(&self, _pairs: &[(String, String)]) -> Result<(), SimilarityError> {
        Ok(())
    }
}

impl<P: SimilarityProvider + ?Sized> SimilarityProvider for &P {
    fn name(&self) -> &str {
        (**self).name()
    }

    fn score(&self, a: &str, b: &str) -> Result<f64, SimilarityError> {
        (**self).score(a, b)
    }

    fn prefetch(&self, pairs: &[(String, String)]) -> Result<(), SimilarityError> {
        (**self).prefetch(pairs)
    }
}

impl<P: SimilarityProvider + ?Sized> SimilarityProvider for Box<P> {
    fn name(&self) -> &str {
        (**self).name()
    }

    fn score(&self, a: &str, b: &str) -> Result<f64, SimilarityError> {
        (**self).score(a, b)
    }

    fn prefetch(&self, pairs: &[(String, String)]) -> Result<(), SimilarityError> {
        (**self).prefetch(pairs)
    }
}
