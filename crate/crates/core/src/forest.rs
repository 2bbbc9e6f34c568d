//! Multitask random forest with entropy splits and soft voting.
//!
//! Every tree is grown on a bootstrap sample of `N` draws, kept as per-row
//! multiplicities. Node impurity is the mean over tasks of the binary entropy
//! of the weighted positive fraction.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::featurizer::FeatureMatrix;
use crate::labels::{LabelMatrix, ScoreMatrix};

pub const MODEL_MAGIC: &str = "moltop-forest";
pub const MODEL_VERSION: u32 = 1;

/// Minimum impurity decrease accepted for a split.
const MIN_GAIN: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum ForestError {
    #[error("feature matrix has {x} rows but labels have {y}")]
    RowMismatch { x: usize, y: usize },
    #[error("feature matrix width {got} does not match the model ({expected})")]
    WidthMismatch { expected: usize, got: usize },
    #[error("at least one task is required")]
    NoTasks,
    #[error("cannot train on zero samples")]
    NoSamples,
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("corrupt model payload: {0}")]
    Corrupt(String),
    #[error("model format version {found} is not supported (expected {expected})")]
    Version { found: u32, expected: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaxFeatures {
    Sqrt,
    Log2,
    All,
    Count(usize),
}

impl MaxFeatures {
    pub fn resolve(self, n_features: usize) -> usize {
        let k = match self {
            MaxFeatures::Sqrt => (n_features as f64).sqrt().floor() as usize,
            MaxFeatures::Log2 => (n_features as f64).log2().floor() as usize,
            MaxFeatures::All => n_features,
            MaxFeatures::Count(k) => k,
        };
        k.clamp(1, n_features.max(1))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestConfig {
    pub n_trees: usize,
    pub min_samples_split: usize,
    pub min_samples_leaf: usize,
    pub max_features: MaxFeatures,
    pub max_depth: Option<usize>,
    pub seed: u64,
}

impl Default for ForestConfig {
    fn default() -> Self {
        Self {
            n_trees: 1000,
            min_samples_split: 10,
            min_samples_leaf: 1,
            max_features: MaxFeatures::Sqrt,
            max_depth: None,
            seed: 0,
        }
    }
}

impl ForestConfig {
    /// Library-default forest: 100 trees, splits down to two samples.
    pub fn untuned() -> Self {
        Self {
            n_trees: 100,
            min_samples_split: 2,
            ..Self::default()
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<(), ForestError> {
        if self.n_trees == 0 {
            return Err(ForestError::Config("n_trees must be at least 1".into()));
        }
        if self.min_samples_split < 2 {
            return Err(ForestError::Config("min_samples_split must be at least 2".into()));
        }
        if self.min_samples_leaf == 0 {
            return Err(ForestError::Config("min_samples_leaf must be at least 1".into()));
        }
        if self.max_features == MaxFeatures::Count(0) {
            return Err(ForestError::Config("max_features must be positive".into()));
        }
        Ok(())
    }
}

/// Row-major dense feature rows borrowed from a matrix or a plain slice.
#[derive(Debug, Clone, Copy)]
pub struct Samples<'a> {
    pub data: &'a [f64],
    pub n_rows: usize,
    pub n_features: usize,
}

impl<'a> Samples<'a> {
    pub fn new(data: &'a [f64], n_features: usize) -> Self {
        let n_rows = data.len().checked_div(n_features).unwrap_or(0);
        Self {
            data,
            n_rows,
            n_features,
        }
    }

    fn row(&self, i: usize) -> &'a [f64] {
        &self.data[i * self.n_features..(i + 1) * self.n_features]
    }
}

impl<'a> From<&'a FeatureMatrix> for Samples<'a> {
    fn from(m: &'a FeatureMatrix) -> Self {
        Self {
            data: &m.data,
            n_rows: m.n_rows,
            n_features: m.n_cols(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TreeNode {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    /// Per task `[negatives, positives]`, counted with bootstrap multiplicity.
    Leaf { counts: Vec<[u32; 2]> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<TreeNode>,
    /// Weighted impurity decrease per feature, normalized to sum 1.
    pub importances: Vec<f64>,
}

impl Tree {
    fn leaf(&self, row: &[f64]) -> &[[u32; 2]] {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if row[*feature] <= *threshold { *left } else { *right },
                TreeNode::Leaf { counts } => return counts,
            }
        }
    }

    pub fn depth(&self) -> usize {
        let mut best = 0;
        let mut stack = vec![(0usize, 0usize)];
        while let Some((i, d)) = stack.pop() {
            best = best.max(d);
            if let TreeNode::Split { left, right, .. } = self.nodes[i] {
                stack.push((left, d + 1));
                stack.push((right, d + 1));
            }
        }
        best
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forest {
    pub trees: Vec<Tree>,
    pub n_tasks: usize,
    pub n_features: usize,
    pub config: ForestConfig,
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    magic: String,
    version: u32,
    forest: Forest,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of tree `index` in a forest seeded with `seed`.
pub fn tree_seed(seed: u64, index: usize) -> u64 {
    splitmix64(seed ^ splitmix64(index as u64))
}

fn binary_entropy(pos: f64, total: f64) -> f64 {
    if pos <= 0.0 || pos >= total {
        return 0.0;
    }
    let p = pos / total;
    -(p * p.log2() + (1.0 - p) * (1.0 - p).log2())
}

fn impurity(pos: &[f64], total: f64) -> f64 {
    pos.iter().map(|&p| binary_entropy(p, total)).sum::<f64>() / pos.len() as f64
}

struct Builder<'a> {
    x: Samples<'a>,
    y: &'a [u8],
    n_tasks: usize,
    cfg: &'a ForestConfig,
    max_features: usize,
}

struct Split {
    feature: usize,
    threshold: f64,
    gain: f64,
    left_weight: f64,
}

impl Builder<'_> {
    fn node_stats(&self, rows: &[(usize, u32)]) -> (f64, Vec<f64>) {
        let mut pos = vec![0.0; self.n_tasks];
        let mut total = 0.0;
        for &(i, w) in rows {
            let w = f64::from(w);
            total += w;
            for (t, p) in pos.iter_mut().enumerate() {
                if self.y[i * self.n_tasks + t] == 1 {
                    *p += w;
                }
            }
        }
        (total, pos)
    }

    fn leaf(&self, rows: &[(usize, u32)]) -> TreeNode {
        let mut counts = vec![[0u32; 2]; self.n_tasks];
        for &(i, w) in rows {
            for (t, c) in counts.iter_mut().enumerate() {
                c[usize::from(self.y[i * self.n_tasks + t])] += w;
            }
        }
        TreeNode::Leaf { counts }
    }

    /// Best split over up to `max_features` randomly drawn features that are
    /// not constant in this node. Constant features do not count towards the
    /// budget, so drawing continues until enough usable ones are seen.
    fn best_split(
        &self,
        rows: &[(usize, u32)],
        total: f64,
        parent: f64,
        rng: &mut ChaCha8Rng,
        order: &mut Vec<usize>,
    ) -> Option<Split> {
        let nf = self.x.n_features;
        order.clear();
        order.extend(0..nf);
        let mut candidates = Vec::with_capacity(self.max_features);
        let mut drawn = 0;
        while candidates.len() < self.max_features && drawn < nf {
            let j = rng.gen_range(drawn..nf);
            order.swap(drawn, j);
            let f = order[drawn];
            drawn += 1;
            let first = self.x.row(rows[0].0)[f];
            if rows.iter().any(|&(i, _)| self.x.row(i)[f] != first) {
                candidates.push(f);
            }
        }
        candidates.sort_unstable();

        let min_leaf = self.cfg.min_samples_leaf as f64;
        let mut best: Option<Split> = None;
        let mut sorted: Vec<(f64, usize, u32)> = Vec::with_capacity(rows.len());
        let mut left_pos = vec![0.0; self.n_tasks];
        let mut right_pos = vec![0.0; self.n_tasks];
        let (_, node_pos) = self.node_stats(rows);

        for &f in &candidates {
            sorted.clear();
            sorted.extend(rows.iter().map(|&(i, w)| (self.x.row(i)[f], i, w)));
            sorted.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
            left_pos.iter_mut().for_each(|p| *p = 0.0);
            let mut left_w = 0.0;
            for k in 0..sorted.len() - 1 {
                let (v, i, w) = sorted[k];
                let w = f64::from(w);
                left_w += w;
                for (t, p) in left_pos.iter_mut().enumerate() {
                    if self.y[i * self.n_tasks + t] == 1 {
                        *p += w;
                    }
                }
                let next = sorted[k + 1].0;
                if next <= v {
                    continue;
                }
                let right_w = total - left_w;
                if left_w < min_leaf || right_w < min_leaf {
                    continue;
                }
                for t in 0..self.n_tasks {
                    right_pos[t] = node_pos[t] - left_pos[t];
                }
                let child = (left_w * impurity(&left_pos, left_w) + right_w * impurity(&right_pos, right_w)) / total;
                let gain = parent - child;
                if best.as_ref().is_none_or(|b| gain > b.gain) {
                    let mut threshold = v + (next - v) / 2.0;
                    if threshold >= next {
                        threshold = v;
                    }
                    best = Some(Split {
                        feature: f,
                        threshold,
                        gain,
                        left_weight: left_w,
                    });
                }
            }
        }
        best.filter(|b| b.gain > MIN_GAIN)
    }

    fn grow(&self, seed: u64) -> Tree {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let multiplicity = bootstrap_multiplicities(&mut rng, self.x.n_rows);
        let root: Vec<(usize, u32)> = multiplicity
            .iter()
            .enumerate()
            .filter(|&(_, &w)| w > 0)
            .map(|(i, &w)| (i, w))
            .collect();

        let mut nodes = Vec::new();
        let mut importances = vec![0.0; self.x.n_features];
        let mut order = Vec::new();
        // (node slot, rows, depth)
        let mut stack = vec![(0usize, root, 0usize)];
        nodes.push(TreeNode::Leaf { counts: Vec::new() });

        while let Some((slot, rows, depth)) = stack.pop() {
            let (total, pos) = self.node_stats(&rows);
            let parent = impurity(&pos, total);
            let can_split = total >= self.cfg.min_samples_split as f64
                && parent > 0.0
                && self.cfg.max_depth.is_none_or(|d| depth < d);
            let split = if can_split {
                self.best_split(&rows, total, parent, &mut rng, &mut order)
            } else {
                None
            };
            match split {
                None => nodes[slot] = self.leaf(&rows),
                Some(s) => {
                    importances[s.feature] += total * s.gain;
                    debug_assert!(s.left_weight > 0.0);
                    let (left, right): (Vec<_>, Vec<_>) = rows
                        .into_iter()
                        .partition(|&(i, _)| self.x.row(i)[s.feature] <= s.threshold);
                    let l = nodes.len();
                    nodes.push(TreeNode::Leaf { counts: Vec::new() });
                    nodes.push(TreeNode::Leaf { counts: Vec::new() });
                    nodes[slot] = TreeNode::Split {
                        feature: s.feature,
                        threshold: s.threshold,
                        left: l,
                        right: l + 1,
                    };
                    stack.push((l + 1, right, depth + 1));
                    stack.push((l, left, depth + 1));
                }
            }
        }

        normalize(&mut importances);
        Tree { nodes, importances }
    }
}

/// How often each of `n` rows appears in a bootstrap sample of size `n`.
pub fn bootstrap_multiplicities(rng: &mut ChaCha8Rng, n: usize) -> Vec<u32> {
    let mut multiplicity = vec![0u32; n];
    for _ in 0..n {
        multiplicity[rng.gen_range(0..n)] += 1;
    }
    multiplicity
}

fn normalize(v: &mut [f64]) {
    let s: f64 = v.iter().sum();
    if s > 0.0 {
        v.iter_mut().for_each(|x| *x /= s);
    }
}

/// Trains a forest. Missing labels count as negatives.
pub fn train<'a>(
    x: impl Into<Samples<'a>>,
    y: &LabelMatrix,
    cfg: &ForestConfig,
) -> Result<Forest, ForestError> {
    let x = x.into();
    cfg.validate()?;
    if x.n_rows != y.n_rows {
        return Err(ForestError::RowMismatch {
            x: x.n_rows,
            y: y.n_rows,
        });
    }
    if y.n_tasks == 0 {
        return Err(ForestError::NoTasks);
    }
    if x.n_rows == 0 {
        return Err(ForestError::NoSamples);
    }
    if x.n_features == 0 {
        return Err(ForestError::Config("feature matrix has no columns".into()));
    }
    let labels: Vec<u8> = y.zero_filled().iter().map(|&v| u8::from(v == 1.0)).collect();
    let builder = Builder {
        x,
        y: &labels,
        n_tasks: y.n_tasks,
        cfg,
        max_features: cfg.max_features.resolve(x.n_features),
    };
    let trees = (0..cfg.n_trees)
        .into_par_iter()
        .map(|t| builder.grow(tree_seed(cfg.seed, t)))
        .collect();
    Ok(Forest {
        trees,
        n_tasks: y.n_tasks,
        n_features: x.n_features,
        config: cfg.clone(),
    })
}

impl Forest {
    /// Mean over trees of the leaf positive fraction, per task.
    pub fn predict_proba<'a>(&self, x: impl Into<Samples<'a>>) -> Result<ScoreMatrix, ForestError> {
        let x = x.into();
        if x.n_features != self.n_features {
            return Err(ForestError::WidthMismatch {
                expected: self.n_features,
                got: x.n_features,
            });
        }
        let t = self.n_tasks;
        let rows: Vec<Vec<f64>> = (0..x.n_rows)
            .into_par_iter()
            .map(|r| {
                let row = x.row(r);
                let mut acc = vec![0.0; t];
                for tree in &self.trees {
                    for (a, c) in acc.iter_mut().zip(tree.leaf(row)) {
                        let n = c[0] + c[1];
                        if n > 0 {
                            *a += f64::from(c[1]) / f64::from(n);
                        }
                    }
                }
                let k = self.trees.len() as f64;
                acc.iter_mut().for_each(|a| *a /= k);
                acc
            })
            .collect();
        Ok(ScoreMatrix {
            n_rows: x.n_rows,
            n_tasks: t,
            values: rows.concat(),
        })
    }

    /// Mean decrease in impurity per feature, summing to 1 unless no tree
    /// ever split.
    pub fn feature_importance(&self) -> Vec<f64> {
        let mut imp = vec![0.0; self.n_features];
        for tree in &self.trees {
            for (a, b) in imp.iter_mut().zip(&tree.importances) {
                *a += b;
            }
        }
        imp.iter_mut().for_each(|a| *a /= self.trees.len() as f64);
        normalize(&mut imp);
        imp
    }

    pub fn to_json(&self) -> String {
        let file = ModelFile {
            magic: MODEL_MAGIC.to_string(),
            version: MODEL_VERSION,
            forest: self.clone(),
        };
        serde_json::to_string(&file).expect("forest serialization cannot fail")
    }

    pub fn save(&self) -> Vec<u8> {
        self.to_json().into_bytes()
    }

    pub fn load(bytes: &[u8]) -> Result<Self, ForestError> {
        #[derive(Deserialize)]
        struct Header {
            magic: String,
            version: u32,
        }
        let header: Header = serde_json::from_slice(bytes).map_err(|e| ForestError::Corrupt(e.to_string()))?;
        if header.magic != MODEL_MAGIC {
            return Err(ForestError::Corrupt(format!("unexpected magic {:?}", header.magic)));
        }
        if header.version != MODEL_VERSION {
            return Err(ForestError::Version {
                found: header.version,
                expected: MODEL_VERSION,
            });
        }
        let file: ModelFile = serde_json::from_slice(bytes).map_err(|e| ForestError::Corrupt(e.to_string()))?;
        file.forest.check()?;
        Ok(file.forest)
    }

    fn check(&self) -> Result<(), ForestError> {
        if self.trees.is_empty() {
            return Err(ForestError::Corrupt("forest has no trees".into()));
        }
        for (ti, tree) in self.trees.iter().enumerate() {
            let n = tree.nodes.len();
            if n == 0 || tree.importances.len() != self.n_features {
                return Err(ForestError::Corrupt(format!("tree {ti} is malformed")));
            }
            for node in &tree.nodes {
                let ok = match node {
                    TreeNode::Split {
                        feature, left, right, ..
                    } => *feature < self.n_features && *left < n && *right < n && *left > 0 && *right > 0,
                    TreeNode::Leaf { counts } => counts.len() == self.n_tasks,
                };
                if !ok {
                    return Err(ForestError::Corrupt(format!("tree {ti} has an invalid node")));
                }
            }
        }
        Ok(())
    }
}
