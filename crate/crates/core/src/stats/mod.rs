//! Rank-based comparison of k models scored on the same N documents:
//! Friedman omnibus test, Nemenyi post-hoc p-values and first-rank tally.

pub mod dist;

use std::collections::{BTreeMap, BTreeSet};

use log::info;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scorer::ScoreReport;

#[derive(Debug, Error, PartialEq)]
pub enum StatsError {
    #[error("need at least {needed} documents, got {got}")]
    TooFewDocuments { needed: usize, got: usize },
    #[error("need at least {needed} models, got {got}{hint}")]
    TooFewModels {
        needed: usize,
        got: usize,
        hint: &'static str,
    },
    #[error("row {row} has {got} scores, expected {expected}")]
    RaggedRow {
        row: usize,
        got: usize,
        expected: usize,
    },
    #[error("non-finite score at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },
    #[error("duplicate score for document `{doc_id}`, model `{model}`")]
    DuplicateScore { doc_id: String, model: String },
}

const SIGN_TEST_HINT: &str = "; compare two models with a sign test instead";

/// N documents × k models of scores, no missing cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreMatrix {
    pub doc_ids: Vec<String>,
    pub models: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl ScoreMatrix {
    pub fn new(doc_ids: Vec<String>, models: Vec<String>, rows: Vec<Vec<f64>>) -> Result<Self, StatsError> {
        if rows.len() < 2 {
            return Err(StatsError::TooFewDocuments { needed: 2, got: rows.len() });
        }
        if models.len() < 2 {
            return Err(StatsError::TooFewModels { needed: 2, got: models.len(), hint: "" });
        }
        for (r, row) in rows.iter().enumerate() {
            if row.len() != models.len() {
                return Err(StatsError::RaggedRow { row: r, got: row.len(), expected: models.len() });
            }
            if let Some(c) = row.iter().position(|v| !v.is_finite()) {
                return Err(StatsError::NonFinite { row: r, col: c });
            }
        }
        assert_eq!(doc_ids.len(), rows.len(), "one doc_id per row");
        Ok(Self { doc_ids, models, rows })
    }

    /// Builds the F1 matrix from per-document reports. Documents lacking a
    /// report for any model are dropped; rows follow `doc_id` order and
    /// columns the sorted model names.
    pub fn from_reports(reports: &[ScoreReport]) -> Result<Self, StatsError> {
        let models: BTreeSet<&str> = reports.iter().map(|r| r.model.as_str()).collect();
        let mut by_doc: BTreeMap<&str, BTreeMap<&str, f64>> = BTreeMap::new();
        for r in reports {
            let cells = by_doc.entry(r.doc_id.as_str()).or_default();
            if cells.insert(r.model.as_str(), r.f1).is_some() {
                return Err(StatsError::DuplicateScore {
                    doc_id: r.doc_id.clone(),
                    model: r.model.clone(),
                });
            }
        }
        let complete: Vec<(&str, Vec<f64>)> = by_doc
            .into_iter()
            .filter(|(_, cells)| cells.len() == models.len())
            .map(|(doc, cells)| (doc, cells.into_values().collect()))
            .collect();
        let dropped = reports
            .iter()
            .map(|r| r.doc_id.as_str())
            .collect::<BTreeSet<_>>()
            .len()
            - complete.len();
        if dropped > 0 {
            info!("excluded {dropped} document(s) not scored for every model");
        }
        let (doc_ids, rows) = complete
            .into_iter()
            .map(|(d, row)| (d.to_string(), row))
            .unzip();
        Self::new(doc_ids, models.into_iter().map(str::to_string).collect(), rows)
    }

    pub fn n_docs(&self) -> usize {
        self.rows.len()
    }

    pub fn n_models(&self) -> usize {
        self.models.len()
    }
}

/// Ranks each row descending (rank 1 = highest score); ties share the
/// average of the positions they span.
pub fn rank_rows(m: &ScoreMatrix) -> Vec<Vec<f64>> {
    m.rows.iter().map(|row| rank_desc(row)).collect()
}

fn rank_desc(row: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..row.len()).collect();
    order.sort_by(|&a, &b| row[b].total_cmp(&row[a]));
    let mut ranks = vec![0.0; row.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && row[order[end]] == row[order[start]] {
            end += 1;
        }
        // positions start+1 ..= end share their mean
        let shared = (start + 1 + end) as f64 / 2.0;
        for &idx in &order[start..end] {
            ranks[idx] = shared;
        }
        start = end;
    }
    ranks
}

fn tie_groups(row: &[f64]) -> Vec<usize> {
    let mut sorted = row.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted
        .chunk_by(|a, b| a == b)
        .map(<[f64]>::len)
        .filter(|&t| t > 1)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FriedmanResult {
    pub statistic: f64,
    pub p_value: f64,
}

fn require_omnibus(m: &ScoreMatrix) -> Result<(), StatsError> {
    if m.n_models() < 3 {
        return Err(StatsError::TooFewModels {
            needed: 3,
            got: m.n_models(),
            hint: SIGN_TEST_HINT,
        });
    }
    Ok(())
}

/// Tie-corrected Friedman chi-square with k − 1 degrees of freedom.
pub fn friedman(m: &ScoreMatrix) -> Result<FriedmanResult, StatsError> {
    require_omnibus(m)?;
    let n = m.n_docs() as f64;
    let k = m.n_models() as f64;
    let ranks = rank_rows(m);

    let mut rank_sums = vec![0.0; m.n_models()];
    for row in &ranks {
        for (sum, r) in rank_sums.iter_mut().zip(row) {
            *sum += r;
        }
    }
    let sum_sq: f64 = rank_sums.iter().map(|r| r * r).sum();
    let uncorrected = 12.0 * sum_sq / (n * k * (k + 1.0)) - 3.0 * n * (k + 1.0);

    let ties: f64 = m
        .rows
        .iter()
        .flat_map(|row| tie_groups(row))
        .map(|t| {
            let t = t as f64;
            t * t * t - t
        })
        .sum();
    let correction = 1.0 - ties / (n * (k * k * k - k));
    if correction <= 0.0 {
        return Ok(FriedmanResult { statistic: 0.0, p_value: 1.0 });
    }
    let statistic = (uncorrected / correction).max(0.0);
    Ok(FriedmanResult {
        statistic,
        p_value: dist::chi_square_sf(statistic, k - 1.0),
    })
}

/// Nemenyi post-hoc p-values for every pair of models.
///
/// The mean-rank difference is scaled by `sqrt(k(k+1)/(6N))` and referred
/// to the studentized range with k groups and infinite degrees of freedom
/// (evaluated at `q·√2`, the range being measured in units of a single
/// mean rank's standard error). Symmetric with unit diagonal.
pub fn posthoc(m: &ScoreMatrix) -> Result<Vec<Vec<f64>>, StatsError> {
    require_omnibus(m)?;
    let n = m.n_docs() as f64;
    let k = m.n_models();
    let ranks = rank_rows(m);
    let mean_ranks: Vec<f64> = (0..k)
        .map(|j| ranks.iter().map(|row| row[j]).sum::<f64>() / n)
        .collect();
    let se = (k as f64 * (k as f64 + 1.0) / (6.0 * n)).sqrt();

    let mut p = vec![vec![1.0; k]; k];
    for i in 0..k {
        for j in (i + 1)..k {
            let q = (mean_ranks[i] - mean_ranks[j]).abs() / se;
            let value = if q == 0.0 {
                1.0
            } else {
                dist::studentized_range_sf(q * std::f64::consts::SQRT_2, k)
            };
            p[i][j] = value;
            p[j][i] = value;
        }
    }
    Ok(p)
}

/// Share of documents on which each model scores highest; tied leaders
/// split the credit equally.
pub fn top_rank_tally(m: &ScoreMatrix) -> BTreeMap<String, f64> {
    let mut credit = vec![0.0; m.n_models()];
    for row in &m.rows {
        let best = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let leaders: Vec<usize> = (0..row.len()).filter(|&j| row[j] == best).collect();
        let share = 1.0 / leaders.len() as f64;
        for j in leaders {
            credit[j] += share;
        }
    }
    let n = m.n_docs() as f64;
    m.models
        .iter()
        .cloned()
        .zip(credit.into_iter().map(|c| c / n))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonResult {
    pub models: Vec<String>,
    pub doc_ids: Vec<String>,
    pub score_matrix: Vec<Vec<f64>>,
    pub friedman: FriedmanResult,
    pub posthoc: Vec<Vec<f64>>,
    pub top_rank: BTreeMap<String, f64>,
    pub alpha: f64,
    /// `posthoc[i][j] < alpha`, off the diagonal.
    pub significant: Vec<Vec<bool>>,
}

pub fn compare(m: &ScoreMatrix, alpha: f64) -> Result<ComparisonResult, StatsError> {
    let friedman = friedman(m)?;
    let posthoc = posthoc(m)?;
    let significant = posthoc
        .iter()
        .enumerate()
        .map(|(i, row)| row.iter().enumerate().map(|(j, &p)| i != j && p < alpha).collect())
        .collect();
    Ok(ComparisonResult {
        models: m.models.clone(),
        doc_ids: m.doc_ids.clone(),
        score_matrix: m.rows.clone(),
        friedman,
        top_rank: top_rank_tally(m),
        posthoc,
        alpha,
        significant,
    })
}
