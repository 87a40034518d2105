//! DPMF combination, system averaging and rank correlations.

use std::collections::HashMap;

use thiserror::Error;

use crate::corpus::{Preference, Winner};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("no segment scores to average")]
    NoSegments,
    #[error("rank correlation needs at least 2 systems, got {0}")]
    TooFewSystems(usize),
    #[error("rank lists differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("system {0} has no metric score")]
    MissingSystem(String),
    #[error("no score for system {system} on segment {segment}")]
    MissingScore { system: String, segment: usize },
    #[error("Kendall tau undefined: no concordant or discordant pairs")]
    UndefinedTau,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SegmentScore {
    pub segment_id: usize,
    pub dpm: f64,
    pub fscore: f64,
    pub dpmf: f64,
}

impl SegmentScore {
    pub fn new(segment_id: usize, dpm: f64, fscore: f64) -> Self {
        SegmentScore {
            segment_id,
            dpm,
            fscore,
            dpmf: dpmf(dpm, fscore),
        }
    }
}

pub fn dpmf(dpm: f64, fscore: f64) -> f64 {
    dpm * fscore
}

/// Mean DPMF over a system's segments.
pub fn system_score(scores: &[SegmentScore]) -> Result<f64, EvalError> {
    if scores.is_empty() {
        return Err(EvalError::NoSegments);
    }
    Ok(scores.iter().map(|s| s.dpmf).sum::<f64>() / scores.len() as f64)
}

/// Ranks scores from highest (rank 1) to lowest; tied scores share the
/// average of the ranks they span.
pub fn rank_descending(scores: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let mut ranks = vec![0.0; scores.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = avg;
        }
        i = j + 1;
    }
    ranks
}

/// ρ = 1 − 6 Σ d² / (n (n² − 1)) over paired ranks.
pub fn spearman(metric_ranks: &[f64], human_ranks: &[f64]) -> Result<f64, EvalError> {
    let n = metric_ranks.len();
    if n != human_ranks.len() {
        return Err(EvalError::LengthMismatch(n, human_ranks.len()));
    }
    if n < 2 {
        return Err(EvalError::TooFewSystems(n));
    }
    let sum_d2: f64 = metric_ranks
        .iter()
        .zip(human_ranks)
        .map(|(m, h)| (m - h).powi(2))
        .sum();
    let n = n as f64;
    Ok(1.0 - 6.0 * sum_d2 / (n * (n * n - 1.0)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SystemCorrelation {
    /// (system, metric score, metric rank, human rank), in judgment order.
    pub rows: Vec<(String, f64, f64, usize)>,
    pub rho: f64,
}

/// Spearman ρ between metric system scores and human ranks.
pub fn system_correlation(
    metric_scores: &HashMap<String, f64>,
    human: &[(String, usize)],
) -> Result<SystemCorrelation, EvalError> {
    if human.len() != metric_scores.len() {
        if let Some((sys, _)) = metric_scores
            .iter()
            .find(|(s, _)| !human.iter().any(|(h, _)| h == *s))
        {
            return Err(EvalError::MissingSystem(sys.clone()));
        }
    }
    let mut scores = Vec::with_capacity(human.len());
    for (sys, _) in human {
        let s = metric_scores
            .get(sys)
            .ok_or_else(|| EvalError::MissingSystem(sys.clone()))?;
        scores.push(*s);
    }
    let metric_ranks = rank_descending(&scores);
    let human_ranks: Vec<f64> = human.iter().map(|(_, r)| *r as f64).collect();
    let rho = spearman(&metric_ranks, &human_ranks)?;
    let rows = human
        .iter()
        .zip(scores.iter().zip(&metric_ranks))
        .map(|((sys, hr), (s, mr))| (sys.clone(), *s, *mr, *hr))
        .collect();
    Ok(SystemCorrelation { rows, rho })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PairCounts {
    pub concordant: usize,
    pub discordant: usize,
    pub ties: usize,
}

impl PairCounts {
    pub fn tau(&self) -> Result<f64, EvalError> {
        let total = self.concordant + self.discordant;
        if total == 0 {
            return Err(EvalError::UndefinedTau);
        }
        Ok((self.concordant as f64 - self.discordant as f64) / total as f64)
    }
}

/// Counts agreement between human pairwise preferences and segment scores.
/// `scores` is keyed by (system, segment id). Metric ties count in neither
/// bucket.
pub fn preference_counts(
    preferences: &[Preference],
    scores: &HashMap<(String, usize), f64>,
) -> Result<PairCounts, EvalError> {
    let lookup = |sys: &str, seg: usize| {
        scores
            .get(&(sys.to_string(), seg))
            .copied()
            .ok_or_else(|| EvalError::MissingScore {
                system: sys.to_string(),
                segment: seg,
            })
    };
    let mut counts = PairCounts::default();
    for p in preferences {
        let a = lookup(&p.system_a, p.segment_id)?;
        let b = lookup(&p.system_b, p.segment_id)?;
        let (better, worse) = match p.winner {
            Winner::A => (a, b),
            Winner::B => (b, a),
        };
        if better > worse {
            counts.concordant += 1;
        } else if better < worse {
            counts.discordant += 1;
        } else {
            counts.ties += 1;
        }
    }
    Ok(counts)
}

pub fn kendall(
    preferences: &[Preference],
    scores: &HashMap<(String, usize), f64>,
) -> Result<f64, EvalError> {
    preference_counts(preferences, scores)?.tau()
}
