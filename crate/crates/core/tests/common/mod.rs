#![allow(dead_code)]

use std::collections::{BTreeSet, HashSet, VecDeque};
use std::fs;
use std::path::{Path, PathBuf};

use moltop::graph::MolecularGraph;
use moltop::synthetic::random_molecule;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn data_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join(name)
}

pub fn graph(n: usize, edges: &[(usize, usize)]) -> MolecularGraph {
    MolecularGraph::from_topology(n, edges).unwrap()
}

fn bfs_dist(g: &MolecularGraph, s: usize) -> Vec<Option<usize>> {
    let mut dist = vec![None; g.node_count()];
    dist[s] = Some(0);
    let mut q = VecDeque::from([s]);
    while let Some(v) = q.pop_front() {
        for &w in g.neighbors(v) {
            if dist[w].is_none() {
                dist[w] = Some(dist[v].unwrap() + 1);
                q.push_back(w);
            }
        }
    }
    dist
}

/// Lists every shortest path explicitly and credits each edge on it with
/// `1 / (number of shortest paths)`, over all ordered pairs.
pub fn ebc_by_path_enumeration(g: &MolecularGraph) -> Vec<f64> {
    let n = g.node_count();
    let index: std::collections::HashMap<(usize, usize), usize> = g
        .edges()
        .iter()
        .enumerate()
        .map(|(i, &(u, v, _))| ((u, v), i))
        .collect();
    let mut score = vec![0.0; g.edge_count()];
    if n < 2 {
        return score;
    }
    let dists: Vec<Vec<Option<usize>>> = (0..n).map(|s| bfs_dist(g, s)).collect();
    for s in 0..n {
        for t in 0..n {
            let Some(d) = dists[s][t] else { continue };
            if s == t {
                continue;
            }
            let mut paths: Vec<Vec<usize>> = Vec::new();
            let mut stack = vec![vec![s]];
            while let Some(path) = stack.pop() {
                let v = *path.last().unwrap();
                if v == t {
                    paths.push(path);
                    continue;
                }
                for &w in g.neighbors(v) {
                    if dists[s][w] == Some(path.len()) && dists[w][t] == Some(d - path.len()) {
                        let mut p = path.clone();
                        p.push(w);
                        stack.push(p);
                    }
                }
            }
            let share = 1.0 / paths.len() as f64;
            for p in &paths {
                for w in p.windows(2) {
                    score[index[&(w[0].min(w[1]), w[0].max(w[1]))]] += share;
                }
            }
        }
    }
    let norm = (n * (n - 1)) as f64;
    score.iter().map(|x| x / norm).collect()
}

fn open_set(g: &MolecularGraph, v: usize) -> HashSet<usize> {
    g.neighbors(v).iter().copied().collect()
}

/// ARI from literal set operations on `N(u) \ {v}` and `N(v) \ {u}`.
pub fn ari_by_sets(g: &MolecularGraph) -> Vec<f64> {
    let all: HashSet<usize> = (0..g.node_count()).collect();
    g.edges()
        .iter()
        .map(|&(u, v, _)| {
            let mut nu = open_set(g, u);
            nu.remove(&v);
            let mut nv = open_set(g, v);
            nv.remove(&u);
            let a = nu.intersection(&nv).count() as f64;
            let b = nu.difference(&nv).count() as f64;
            let c = nv.difference(&nu).count() as f64;
            let covered: HashSet<usize> = nu.union(&nv).copied().chain([u, v]).collect();
            let d = all.difference(&covered).count() as f64;
            let den = (a + b) * (b + d) + (a + c) * (c + d);
            if den == 0.0 {
                0.0
            } else {
                2.0 * (a * d - b * c) / den
            }
        })
        .collect()
}

pub fn scan_by_sets(g: &MolecularGraph) -> Vec<f64> {
    g.edges()
        .iter()
        .map(|&(u, v, _)| {
            let mut cu = open_set(g, u);
            cu.insert(u);
            let mut cv = open_set(g, v);
            cv.insert(v);
            // closed neighborhoods of adjacent nodes share u and v themselves
            let common = cu.intersection(&cv).count() as f64 - 1.0;
            common / ((cu.len() * cv.len()) as f64).sqrt()
        })
        .collect()
}

pub fn auroc_by_pairs(scores: &[f64], labels: &[f64]) -> Option<f64> {
    let (mut num, mut pairs) = (0.0, 0.0);
    for i in 0..scores.len() {
        for j in 0..scores.len() {
            if labels[i] == 1.0 && labels[j] == 0.0 {
                pairs += 1.0;
                if scores[i] > scores[j] {
                    num += 1.0;
                } else if scores[i] == scores[j] {
                    num += 0.5;
                }
            }
        }
    }
    (pairs > 0.0).then(|| num / pairs)
}

/// Precision at each positive's position in a stable descending sort.
pub fn ap_by_definition(scores: &[f64], labels: &[f64]) -> Option<f64> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    // insertion sort keeps equal scores in input order
    for i in 1..order.len() {
        let mut j = i;
        while j > 0 && scores[order[j - 1]] < scores[order[j]] {
            order.swap(j - 1, j);
            j -= 1;
        }
    }
    let mut precisions = Vec::new();
    for (k, &i) in order.iter().enumerate() {
        if labels[i] == 1.0 {
            let hits = order[..=k].iter().filter(|&&x| labels[x] == 1.0).count();
            precisions.push(hits as f64 / (k + 1) as f64);
        }
    }
    (!precisions.is_empty()).then(|| precisions.iter().sum::<f64>() / precisions.len() as f64)
}

/// Two-sided exact Wilcoxon p-value by listing all sign assignments.
pub fn wilcoxon_by_enumeration(a: &[f64], b: &[f64]) -> f64 {
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).filter(|x| *x != 0.0).collect();
    let n = d.len();
    let ranks: Vec<f64> = (0..n)
        .map(|i| {
            let below = d.iter().filter(|x| x.abs() < d[i].abs()).count() as f64;
            let equal = d.iter().filter(|x| x.abs() == d[i].abs()).count() as f64;
            below + (equal + 1.0) / 2.0
        })
        .collect();
    let total: f64 = ranks.iter().sum();
    let w: f64 = (0..n).filter(|&i| d[i] > 0.0).map(|i| ranks[i]).sum();
    let dev = (w - total / 2.0).abs();
    let mut extreme = 0u64;
    for mask in 0u64..(1 << n) {
        let s: f64 = (0..n).filter(|&i| mask >> i & 1 == 1).map(|i| ranks[i]).sum();
        if (s - total / 2.0).abs() >= dev - 1e-9 {
            extreme += 1;
        }
    }
    extreme as f64 / (1u64 << n) as f64
}

/// graph6 encoder for graphs below 63 nodes.
pub fn encode_graph6(g: &MolecularGraph) -> String {
    let n = g.node_count();
    assert!(n < 63);
    let mut bits = Vec::new();
    for v in 1..n {
        for u in 0..v {
            bits.push(g.has_edge(u, v));
        }
    }
    while bits.len() % 6 != 0 {
        bits.push(false);
    }
    let mut s = String::new();
    s.push((n as u8 + 63) as char);
    for chunk in bits.chunks(6) {
        let v = chunk.iter().fold(0u8, |acc, &b| (acc << 1) | u8::from(b));
        s.push((v + 63) as char);
    }
    s
}

pub fn random_permutation<R: Rng>(rng: &mut R, n: usize) -> Vec<usize> {
    use rand::seq::SliceRandom;
    let mut p: Vec<usize> = (0..n).collect();
    p.shuffle(rng);
    p
}

pub fn edge_key(g: &MolecularGraph) -> BTreeSet<(usize, usize)> {
    g.edges().iter().map(|&(u, v, _)| (u, v)).collect()
}

/// A small labeled molecule dataset on disk: `data.csv` with a SMILES column
/// and two tasks, plus a split directory.
pub struct TempDataset {
    pub dir: tempfile::TempDir,
    pub csv: PathBuf,
    pub split_dir: PathBuf,
    pub n: usize,
}

const FRAGMENTS: [&str; 12] = [
    "CCO", "c1ccccc1", "CC(=O)O", "C1CCCCC1", "CCN", "c1ccncc1", "CC#N", "C=CC", "OCCO", "c1ccc2ccccc2c1", "CCCl",
    "C1CC1",
];

/// Writes `n` molecules built from fragments. Task `a` is positive for
/// aromatic molecules, task `b` is noisy and partly missing.
pub fn temp_dataset(n: usize, seed: u64) -> TempDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("data.csv");
    let mut text = String::from("smiles,a,b\n");
    for _ in 0..n {
        let k = rng.gen_range(1..4);
        let parts: Vec<&str> = (0..k).map(|_| FRAGMENTS[rng.gen_range(0..FRAGMENTS.len())]).collect();
        let smiles = parts.join(".");
        let a = u8::from(smiles.contains('c'));
        let b = if rng.gen_bool(0.1) {
            String::new()
        } else {
            u8::from(smiles.contains('O') ^ rng.gen_bool(0.1)).to_string()
        };
        text.push_str(&format!("{smiles},{a},{b}\n"));
    }
    fs::write(&csv, text).unwrap();
    let split_dir = dir.path().join("split");
    fs::create_dir_all(&split_dir).unwrap();
    let train_end = n * 8 / 10;
    let valid_end = n * 9 / 10;
    let lines = |r: std::ops::Range<usize>| r.map(|i| format!("{i}\n")).collect::<String>();
    fs::write(split_dir.join("train.csv"), lines(0..train_end)).unwrap();
    fs::write(split_dir.join("valid.csv"), lines(train_end..valid_end)).unwrap();
    fs::write(split_dir.join("test.csv"), lines(valid_end..n)).unwrap();
    TempDataset { dir, csv, split_dir, n }
}

/// Molecule-like graphs with sizes drawn from `sizes`.
pub fn random_molecules(seed: u64, count: usize, sizes: std::ops::Range<usize>) -> Vec<MolecularGraph> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let n = rng.gen_range(sizes.clone());
            random_molecule(&mut rng, n, 0.2)
        })
        .collect()
}

/// Per-dataset mean test AUROC rows (BACE, BBBP, HIV, ClinTox, MUV, SIDER,
/// Tox21, ToxCast) for five models.
pub const MOLTOP_ROW: [f64; 8] = [82.9, 68.9, 80.8, 73.6, 66.7, 66.0, 76.3, 64.4];
pub const GIN_PRETRAINED_ROW: [f64; 8] = [84.5, 68.7, 79.9, 81.3, 72.6, 62.7, 78.1, 65.7];
pub const DMPNN_ROW: [f64; 8] = [80.9, 71.0, 77.1, 90.6, 78.6, 57.0, 75.9, 65.5];
pub const GEM_ROW: [f64; 8] = [85.6, 72.4, 80.6, 90.1, 81.7, 67.2, 78.1, 69.2];
pub const GRAPHMVP_ROW: [f64; 8] = [76.8, 68.5, 74.8, 79.0, 75.0, 62.3, 74.5, 62.7];
