//! HTTP client for an external similarity backend.
//!
//! Wire protocol: `POST {base}/similarity` with body
//! `{"pairs": [[a, b], ...]}`, answered by `{"scores": [s, ...]}` in the
//! same order. Scores outside `[-1, 1]` are clamped and counted; a pair of
//! identical strings must come back as `1.0`.

use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Duration;

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{SimilarityError, SimilarityProvider};

const IDENTITY_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct ExternalProviderConfig {
    pub base_url: String,
    pub timeout: Duration,
    pub batch_size: usize,
}

impl ExternalProviderConfig {
    pub fn new(base_url: impl Into<String>, timeout: Duration) -> Self {
        Self {
            base_url: base_url.into(),
            timeout,
            batch_size: 256,
        }
    }
}

#[derive(Serialize)]
struct Request<'a> {
    pairs: &'a [(&'a str, &'a str)],
}

#[derive(Deserialize)]
struct Response {
    scores: Vec<f64>,
}

pub struct ExternalProvider {
    client: reqwest::blocking::Client,
    endpoint: String,
    timeout_ms: u64,
    batch_size: usize,
    cache: Mutex<HashMap<(String, String), f64>>,
    clamped: AtomicUsize,
}

impl ExternalProvider {
    pub fn new(config: ExternalProviderConfig) -> Result<Self, SimilarityError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(config.timeout)
            .build()
            .map_err(|e| SimilarityError::Transport(e.to_string()))?;
        let base = config.base_url.trim_end_matches('/');
        let endpoint = if base.ends_with("/similarity") {
            base.to_string()
        } else {
            format!("{base}/similarity")
        };
        Ok(Self {
            client,
            endpoint,
            timeout_ms: config.timeout.as_millis() as u64,
            batch_size: config.batch_size.max(1),
            cache: Mutex::new(HashMap::new()),
            clamped: AtomicUsize::new(0),
        })
    }

    /// Builds the client and verifies the identity contract on a probe pair.
    pub fn connect(config: ExternalProviderConfig) -> Result<Self, SimilarityError> {
        let provider = Self::new(config)?;
        provider.external_batch_similarity(&[("x".to_string(), "x".to_string())])?;
        Ok(provider)
    }

    /// Number of response values that had to be clamped into `[-1, 1]`.
    pub fn clamped_count(&self) -> usize {
        self.clamped.load(Ordering::Relaxed)
    }

    /// Scores `pairs` in order, consulting the per-run cache first and
    /// sending the remaining distinct pairs in concurrent batches.
    pub fn external_batch_similarity(
        &self,
        pairs: &[(String, String)],
    ) -> Result<Vec<f64>, SimilarityError> {
        if pairs.is_empty() {
            return Err(SimilarityError::EmptyBatch);
        }
        let mut missing: Vec<(&str, &str)> = {
            let cache = self.cache.lock().expect("cache lock poisoned");
            pairs
                .iter()
                .filter(|(a, b)| !cache.contains_key(&(a.clone(), b.clone())))
                .map(|(a, b)| (a.as_str(), b.as_str()))
                .collect()
        };
        missing.sort_unstable();
        missing.dedup();

        missing
            .par_chunks(self.batch_size)
            .map(|chunk| {
                let scores = self.request(chunk)?;
                let mut cache = self.cache.lock().expect("cache lock poisoned");
                for (&(a, b), s) in chunk.iter().zip(scores) {
                    cache.insert((a.to_string(), b.to_string()), s);
                }
                Ok(())
            })
            .collect::<Result<(), SimilarityError>>()?;

        let cache = self.cache.lock().expect("cache lock poisoned");
        Ok(pairs
            .iter()
            .map(|(a, b)| cache[&(a.clone(), b.clone())])
            .collect())
    }

    fn request(&self, chunk: &[(&str, &str)]) -> Result<Vec<f64>, SimilarityError> {
        let body = serde_json::to_vec(&Request { pairs: chunk })
            .map_err(|e| SimilarityError::Transport(e.to_string()))?;
        let response = self
            .client
            .post(&self.endpoint)
            .header(reqwest::header::CONTENT_TYPE, "application/json")
            .body(body)
            .send()
            .map_err(|e| self.transport_error(e))?;
        let status = response.status();
        if !status.is_success() {
            return Err(SimilarityError::Transport(format!(
                "{} returned HTTP {status}",
                self.endpoint
            )));
        }
        let bytes = response.bytes().map_err(|e| self.transport_error(e))?;
        let parsed: Response = serde_json::from_slice(&bytes)
            .map_err(|e| SimilarityError::MalformedResponse(e.to_string()))?;
        if parsed.scores.len() != chunk.len() {
            return Err(SimilarityError::MalformedResponse(format!(
                "expected {} scores, got {}",
                chunk.len(),
                parsed.scores.len()
            )));
        }

        let mut out = Vec::with_capacity(chunk.len());
        for (&(a, b), raw) in chunk.iter().zip(parsed.scores) {
            if !raw.is_finite() {
                return Err(SimilarityError::MalformedResponse(format!(
                    "non-finite score for ({a:?}, {b:?})"
                )));
            }
            let mut s = raw;
            if !(-1.0..=1.0).contains(&raw) {
                self.clamped.fetch_add(1, Ordering::Relaxed);
                warn!("provider score {raw} for ({a:?}, {b:?}) clamped into [-1, 1]");
                s = raw.clamp(-1.0, 1.0);
            }
            if a == b {
                if (s - 1.0).abs() > IDENTITY_TOLERANCE {
                    return Err(SimilarityError::ContractViolation(format!(
                        "score({a:?}, {a:?}) = {raw}, expected 1.0"
                    )));
                }
                s = 1.0;
            }
            out.push(s);
        }
        Ok(out)
    }

    fn transport_error(&self, e: reqwest::Error) -> SimilarityError {
        if e.is_timeout() {
            SimilarityError::Timeout(self.timeout_ms)
        } else {
            SimilarityError::Transport(format!("{}: {e}", self.endpoint))
        }
    }
}

impl SimilarityProvider for ExternalProvider {
    fn name(&self) -> &str {
        "external"
    }

    fn score(&self, a: &str, b: &str) -> Result<f64, SimilarityError> {
        if a.split_whitespace().next().is_none() {
            return Err(SimilarityError::UnscorablePredicate(a.to_string()));
        }
        if b.split_whitespace().next().is_none() {
            return Err(SimilarityError::UnscorablePredicate(b.to_string()));
        }
        if let Some(&s) = self
            .cache
            .lock()
            .expect("cache lock poisoned")
            .get(&(a.to_string(), b.to_string()))
        {
            return Ok(s);
        }
        Ok(self.external_batch_similarity(&[(a.to_string(), b.to_string())])?[0])
    }

    fn prefetch(&self, pairs: &[(String, String)]) -> Result<(), SimilarityError> {
        if pairs.is_empty() {
            return Ok(());
        }
        self.external_batch_similarity(pairs).map(|_| ())
    }
}
