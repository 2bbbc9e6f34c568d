//! Ranking metrics, the exact Wilcoxon signed-rank test and importance
//! aggregation.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::featurizer::{Column, FeatureGroup};
use crate::labels::{LabelMatrix, ScoreMatrix};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricError {
    #[error("length mismatch: {0} vs {1}")]
    Length(usize, usize),
    #[error("metric undefined: labels contain a single class")]
    SingleClass,
    #[error("metric undefined: no positive labels")]
    NoPositives,
    #[error("metric undefined for every task")]
    AllTasksUndefined,
    #[error("no non-zero differences to test")]
    NoDifferences,
    #[error("exact test supports at most {max} pairs, got {got}")]
    TooLarge { got: usize, max: usize },
    #[error("unknown metric {0:?}")]
    UnknownMetric(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Auroc,
    Ap,
}

impl Metric {
    pub fn name(self) -> &'static str {
        match self {
            Metric::Auroc => "auroc",
            Metric::Ap => "ap",
        }
    }

    pub fn compute(self, scores: &[f64], labels: &[f64]) -> Result<f64, MetricError> {
        match self {
            Metric::Auroc => auroc(scores, labels),
            Metric::Ap => average_precision(scores, labels),
        }
    }
}

impl std::str::FromStr for Metric {
    type Err = MetricError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "auroc" => Ok(Metric::Auroc),
            "ap" => Ok(Metric::Ap),
            other => Err(MetricError::UnknownMetric(other.to_string())),
        }
    }
}

/// Area under the ROC curve as the probability that a random positive
/// outscores a random negative, ties counting one half.
///
/// Sort-based, `O(n log n)`; equal scores form one block.
pub fn auroc(scores: &[f64], labels: &[f64]) -> Result<f64, MetricError> {
    if scores.len() != labels.len() {
        return Err(MetricError::Length(scores.len(), labels.len()));
    }
    let mut pairs: Vec<(f64, bool)> = scores.iter().zip(labels).map(|(&s, &l)| (s, l == 1.0)).collect();
    let n_pos = pairs.iter().filter(|p| p.1).count() as u64;
    let n_neg = pairs.len() as u64 - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(MetricError::SingleClass);
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    // twice the concordant count plus the tied count, kept integral
    let mut twice: u64 = 0;
    let mut neg_below = 0u64;
    let mut i = 0;
    while i < pairs.len() {
        let mut j = i;
        let (mut pos, mut neg) = (0u64, 0u64);
        while j < pairs.len() && pairs[j].0 == pairs[i].0 {
            if pairs[j].1 {
                pos += 1;
            } else {
                neg += 1;
            }
            j += 1;
        }
        twice += 2 * pos * neg_below + pos * neg;
        neg_below += neg;
        i = j;
    }
    Ok(twice as f64 / (2 * n_pos * n_neg) as f64)
}

/// Average precision: mean over positives of the precision at each
/// positive's rank, by descending score with ties kept in input order.
pub fn average_precision(scores: &[f64], labels: &[f64]) -> Result<f64, MetricError> {
    if scores.len() != labels.len() {
        return Err(MetricError::Length(scores.len(), labels.len()));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let mut hits = 0usize;
    let mut sum = 0.0;
    for (rank, &i) in order.iter().enumerate() {
        if labels[i] == 1.0 {
            hits += 1;
            sum += hits as f64 / (rank + 1) as f64;
        }
    }
    if hits == 0 {
        return Err(MetricError::NoPositives);
    }
    Ok(sum / hits as f64)
}

/// Per-task metric values (`None` where undefined) and their mean over the
/// defined tasks. Masked rows are left out of each task.
pub fn multitask_scores(
    scores: &ScoreMatrix,
    labels: &LabelMatrix,
    metric: Metric,
) -> Result<(Vec<Option<f64>>, f64), MetricError> {
    if scores.n_rows != labels.n_rows || scores.n_tasks != labels.n_tasks {
        return Err(MetricError::Length(
            scores.n_rows * scores.n_tasks,
            labels.n_rows * labels.n_tasks,
        ));
    }
    let per_task: Vec<Option<f64>> = (0..labels.n_tasks)
        .map(|t| {
            let (mut s, mut l) = (Vec::new(), Vec::new());
            for r in 0..labels.n_rows {
                if !labels.is_missing(r, t) {
                    s.push(scores.get(r, t));
                    l.push(labels.value(r, t));
                }
            }
            let positives = l.iter().filter(|&&v| v == 1.0).count();
            if positives == 0 || positives == l.len() {
                None
            } else {
                metric.compute(&s, &l).ok()
            }
        })
        .collect();
    let defined: Vec<f64> = per_task.iter().flatten().copied().collect();
    if defined.is_empty() {
        return Err(MetricError::AllTasksUndefined);
    }
    let mean = defined.iter().sum::<f64>() / defined.len() as f64;
    Ok((per_task, mean))
}

pub fn multitask_auroc(scores: &ScoreMatrix, labels: &LabelMatrix) -> Result<f64, MetricError> {
    multitask_scores(scores, labels, Metric::Auroc).map(|(_, m)| m)
}

/// Largest sample size handled by exact enumeration.
pub const WILCOXON_EXACT_MAX: usize = 25;

/// Exact two-sided p-value of the Wilcoxon signed-rank test on paired
/// samples. Zero differences are dropped; tied absolute differences get
/// average ranks. The statistic is the positive rank sum; the p-value is the
/// fraction of the `2^n` sign assignments at least as far from the null mean.
pub fn wilcoxon_signed_rank(a: &[f64], b: &[f64]) -> Result<f64, MetricError> {
    if a.len() != b.len() {
        return Err(MetricError::Length(a.len(), b.len()));
    }
    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).filter(|d| *d != 0.0).collect();
    let n = diffs.len();
    if n == 0 {
        return Err(MetricError::NoDifferences);
    }
    if n > WILCOXON_EXACT_MAX {
        return Err(MetricError::TooLarge {
            got: n,
            max: WILCOXON_EXACT_MAX,
        });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| diffs[i].abs().total_cmp(&diffs[j].abs()));
    // doubled ranks stay integral under averaging of ties
    let mut rank2 = vec![0u64; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && diffs[order[j + 1]].abs() == diffs[order[i]].abs() {
            j += 1;
        }
        for &k in &order[i..=j] {
            rank2[k] = (i + j + 2) as u64;
        }
        i = j + 1;
    }

    let total: u64 = rank2.iter().sum();
    let observed: u64 = (0..n).filter(|&k| diffs[k] > 0.0).map(|k| rank2[k]).sum();
    // compare 2*|2W - total| in doubled units
    let dev = |w: u64| (2 * w).abs_diff(total);
    let target = dev(observed);

    // distribution of the doubled rank sum over all sign assignments
    let mut counts = vec![0u64; total as usize + 1];
    counts[0] = 1;
    for &r in &rank2 {
        for w in (r as usize..=total as usize).rev() {
            counts[w] += counts[w - r as usize];
        }
    }
    let extreme: u64 = counts
        .iter()
        .enumerate()
        .filter(|&(w, _)| dev(w as u64) >= target)
        .map(|(_, &c)| c)
        .sum();
    Ok((extreme as f64 / (1u64 << n) as f64).min(1.0))
}

/// Sums per-column importances into the ten feature groups, in
/// [`FeatureGroup::ALL`] order.
pub fn aggregate_importance(importance: &[f64], columns: &[Column]) -> Result<Vec<f64>, MetricError> {
    if importance.len() != columns.len() {
        return Err(MetricError::Length(importance.len(), columns.len()));
    }
    let mut groups = vec![0.0; FeatureGroup::ALL.len()];
    for (x, c) in importance.iter().zip(columns) {
        groups[c.group.index()] += x;
    }
    Ok(groups)
}

/// Elementwise mean of equally long vectors.
pub fn mean_vector(vectors: &[Vec<f64>]) -> Vec<f64> {
    let Some(first) = vectors.first() else {
        return Vec::new();
    };
    let mut out = vec![0.0; first.len()];
    for v in vectors {
        for (o, x) in out.iter_mut().zip(v) {
            *o += x;
        }
    }
    out.iter_mut().for_each(|o| *o /= vectors.len() as f64);
    out
}

pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedResult {
    pub seed: u64,
    /// Per-task values, `null` where the metric is undefined.
    pub valid_tasks: Vec<Option<f64>>,
    pub test_tasks: Vec<Option<f64>>,
    pub valid: f64,
    pub test: f64,
}

/// Metric values of a multi-seed evaluation with population std over seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub metric: Metric,
    pub seeds: Vec<u64>,
    pub per_seed: Vec<SeedResult>,
    pub valid_mean: f64,
    pub valid_std: f64,
    pub test_mean: f64,
    pub test_std: f64,
}

impl EvalReport {
    pub fn from_seeds(metric: Metric, per_seed: Vec<SeedResult>) -> Self {
        let valid: Vec<f64> = per_seed.iter().map(|s| s.valid).collect();
        let test: Vec<f64> = per_seed.iter().map(|s| s.test).collect();
        let (valid_mean, valid_std) = mean_std(&valid);
        let (test_mean, test_std) = mean_std(&test);
        Self {
            metric,
            seeds: per_seed.iter().map(|s| s.seed).collect(),
            per_seed,
            valid_mean,
            valid_std,
            test_mean,
            test_std,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }

    pub fn from_json(s: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }
}
