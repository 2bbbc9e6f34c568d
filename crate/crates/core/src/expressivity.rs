//! Distinguishing power of the topological features: fingerprints, pair
//! counting over graph collections and a 1-WL color refinement oracle.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::descriptors::{degree_profile, edge_betweenness, edge_neighborhood_overlaps, edge_scores};
use crate::featurizer::HistogramSpec;
use crate::graph::MolecularGraph;

/// EBC values are compared after rounding to this many decimals.
pub const EBC_DECIMALS: i32 = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FingerprintMode {
    /// Eight histograms with `n_bins` bins each.
    Histogram { n_bins: usize },
    /// Sorted multisets of the raw values, kept as reduced fractions where
    /// the value is rational (variance and squared SCAN stand in for std and
    /// SCAN, which preserves equality).
    Exact,
}

/// Integer encoding of the eight topological features of a graph.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TopoFingerprint {
    pub mode: FingerprintMode,
    pub values: Vec<i64>,
}

fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn fraction(num: i64, den: i64) -> [i64; 2] {
    if den == 0 || num == 0 {
        return [0, 1];
    }
    let g = gcd(num, den);
    let s = if den < 0 { -1 } else { 1 };
    [s * num / g, s * den / g]
}

fn push_multiset<const K: usize>(out: &mut Vec<i64>, mut items: Vec<[i64; K]>) {
    items.sort_unstable();
    out.push(items.len() as i64);
    for it in items {
        out.extend_from_slice(&it);
    }
}

fn exact_fingerprint(g: &MolecularGraph) -> Vec<i64> {
    let deg: Vec<i64> = g.degrees().into_iter().map(|d| d as i64).collect();
    let mut out = Vec::new();

    let nbr = |v: usize| g.neighbors(v).iter().map(|&u| deg[u]);
    push_multiset(&mut out, deg.iter().map(|&d| [d]).collect());
    push_multiset(&mut out, (0..g.node_count()).map(|v| [nbr(v).min().unwrap_or(0)]).collect());
    push_multiset(&mut out, (0..g.node_count()).map(|v| [nbr(v).max().unwrap_or(0)]).collect());
    push_multiset(
        &mut out,
        (0..g.node_count()).map(|v| fraction(nbr(v).sum(), deg[v])).collect(),
    );
    push_multiset(
        &mut out,
        (0..g.node_count())
            .map(|v| {
                let (s, sq) = nbr(v).fold((0, 0), |(s, sq), d| (s + d, sq + d * d));
                fraction(deg[v] * sq - s * s, deg[v] * deg[v])
            })
            .collect(),
    );

    let scale = 10f64.powi(EBC_DECIMALS);
    push_multiset(
        &mut out,
        edge_betweenness(g).into_iter().map(|x| [(x * scale).round() as i64]).collect(),
    );

    let n = g.node_count() as i64;
    let overlaps = edge_neighborhood_overlaps(g);
    push_multiset(
        &mut out,
        overlaps
            .iter()
            .map(|&(a, b, c)| {
                let (a, b, c) = (a as i64, b as i64, c as i64);
                let d = n - (2 + a + b + c);
                fraction(2 * (a * d - b * c), (a + b) * (b + d) + (a + c) * (c + d))
            })
            .collect(),
    );
    push_multiset(
        &mut out,
        g.edges()
            .iter()
            .zip(&overlaps)
            .map(|(&(u, v, _), &(a, _, _))| {
                let a = a as i64 + 1;
                fraction(a * a, (deg[u] + 1) * (deg[v] + 1))
            })
            .collect(),
    );
    out
}

fn histogram_fingerprint(g: &MolecularGraph, n_bins: usize) -> Vec<i64> {
    let n_bins = n_bins.max(1);
    let hi = (n_bins as f64 - 1.0).max(1.0);
    let int = HistogramSpec::integer(n_bins);
    let profile = degree_profile(g);
    let scores = edge_scores(g);

    let series: [(HistogramSpec, Vec<f64>); 8] = [
        (int, profile.iter().map(|s| s.deg as f64).collect()),
        (int, profile.iter().map(|s| s.dn_min as f64).collect()),
        (int, profile.iter().map(|s| s.dn_max as f64).collect()),
        (HistogramSpec::uniform(n_bins, 0.0, hi), profile.iter().map(|s| s.dn_mean).collect()),
        (HistogramSpec::uniform(n_bins, 0.0, hi), profile.iter().map(|s| s.dn_std).collect()),
        (HistogramSpec::uniform(n_bins, 0.0, 1.0), scores.ebc),
        (HistogramSpec::uniform(n_bins, -1.0, 1.0), scores.ari),
        (HistogramSpec::uniform(n_bins, 0.0, 1.0), scores.scan),
    ];
    let mut out = Vec::with_capacity(8 * n_bins);
    let mut counts = vec![0.0; n_bins];
    for (spec, values) in series {
        counts.iter_mut().for_each(|c| *c = 0.0);
        spec.accumulate(values, &mut counts);
        out.extend(counts.iter().map(|&c| c as i64));
    }
    out
}

/// In histogram mode the degree features use integer bins `0..n_bins - 1`
/// with overflow, mean and std of neighbor degrees span `[0, n_bins - 1]`,
/// EBC and SCAN `[0, 1]` and ARI `[-1, 1]`.
pub fn topo_fingerprint(g: &MolecularGraph, mode: FingerprintMode) -> TopoFingerprint {
    let values = match mode {
        FingerprintMode::Exact => exact_fingerprint(g),
        FingerprintMode::Histogram { n_bins } => histogram_fingerprint(g, n_bins),
    };
    TopoFingerprint { mode, values }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairReport {
    pub graphs: usize,
    pub total_pairs: u64,
    pub indistinguishable_pairs: u64,
    /// Number of fingerprint classes of each size.
    pub bucket_sizes: BTreeMap<usize, usize>,
}

/// Groups graphs by fingerprint and counts pairs sharing one.
pub fn indistinguishability_report(graphs: &[MolecularGraph], mode: FingerprintMode) -> PairReport {
    let fingerprints: Vec<Vec<i64>> = graphs
        .par_iter()
        .map(|g| {
            let mut key = vec![g.node_count() as i64];
            key.extend(topo_fingerprint(g, mode).values);
            key
        })
        .collect();
    let mut groups: HashMap<&[i64], usize> = HashMap::new();
    for f in &fingerprints {
        *groups.entry(f.as_slice()).or_default() += 1;
    }
    let mut bucket_sizes = BTreeMap::new();
    let mut pairs = 0u64;
    for &k in groups.values() {
        *bucket_sizes.entry(k).or_default() += 1;
        pairs += (k as u64) * (k as u64 - 1) / 2;
    }
    let n = graphs.len() as u64;
    PairReport {
        graphs: graphs.len(),
        total_pairs: n * n.saturating_sub(1) / 2,
        indistinguishable_pairs: pairs,
        bucket_sizes,
    }
}

pub fn count_indistinguishable(graphs: &[MolecularGraph], mode: FingerprintMode) -> u64 {
    indistinguishability_report(graphs, mode).indistinguishable_pairs
}

/// Stable 1-WL coloring of a graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WlColoring {
    pub colors: Vec<u32>,
    pub rounds: usize,
}

impl WlColoring {
    pub fn color_count(&self) -> usize {
        let mut c = self.colors.clone();
        c.sort_unstable();
        c.dedup();
        c.len()
    }

    pub fn multiset(&self) -> Vec<u32> {
        let mut c = self.colors.clone();
        c.sort_unstable();
        c
    }
}

/// One refinement round over a disjoint union given as adjacency lists.
/// New colors are ranks of `(color, sorted neighbor colors)` signatures, so
/// they do not depend on node numbering.
fn refine_round(adjacency: &[&[usize]], colors: &[u32]) -> Vec<u32> {
    let signatures: Vec<(u32, Vec<u32>)> = adjacency
        .iter()
        .enumerate()
        .map(|(v, nbrs)| {
            let mut s: Vec<u32> = nbrs.iter().map(|&u| colors[u]).collect();
            s.sort_unstable();
            (colors[v], s)
        })
        .collect();
    let mut distinct: Vec<&(u32, Vec<u32>)> = signatures.iter().collect();
    distinct.sort_unstable();
    distinct.dedup();
    signatures
        .iter()
        .map(|s| distinct.binary_search(&s).expect("signature present") as u32)
        .collect()
}

fn distinct(colors: &[u32]) -> usize {
    let mut c = colors.to_vec();
    c.sort_unstable();
    c.dedup();
    c.len()
}

fn refine(adjacency: &[&[usize]], max_rounds: usize) -> WlColoring {
    let mut colors = vec![0u32; adjacency.len()];
    let mut rounds = 0;
    while rounds < max_rounds {
        let next = refine_round(adjacency, &colors);
        rounds += 1;
        let done = distinct(&next) == distinct(&colors);
        colors = next;
        if done {
            break;
        }
    }
    WlColoring { colors, rounds }
}

/// Refines a uniform initial coloring until a round adds no new classes or
/// `max_rounds` is reached.
pub fn wl1_refine(g: &MolecularGraph, max_rounds: usize) -> WlColoring {
    let adj: Vec<&[usize]> = (0..g.node_count()).map(|v| g.neighbors(v)).collect();
    refine(&adj, max_rounds.max(1))
}

/// Whether 1-WL tells the graphs apart. Both are refined together as a
/// disjoint union so their colors share one palette.
pub fn wl1_distinguishes(a: &MolecularGraph, b: &MolecularGraph) -> bool {
    if a.node_count() != b.node_count() || a.edge_count() != b.edge_count() {
        return true;
    }
    let n = a.node_count();
    let shifted: Vec<Vec<usize>> = (0..n)
        .map(|v| b.neighbors(v).iter().map(|&u| u + n).collect())
        .collect();
    let adj: Vec<&[usize]> = (0..n)
        .map(|v| a.neighbors(v))
        .chain(shifted.iter().map(Vec::as_slice))
        .collect();
    let coloring = refine(&adj, 2 * n + 1);
    let mut left = coloring.colors[..n].to_vec();
    let mut right = coloring.colors[n..].to_vec();
    left.sort_unstable();
    right.sort_unstable();
    left != right
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph(n: usize, edges: &[(usize, usize)]) -> MolecularGraph {
        MolecularGraph::from_topology(n, edges).unwrap()
    }

    fn cycle(n: usize) -> MolecularGraph {
        let e: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        graph(n, &e)
    }

    #[test]
    fn regular_graph_single_color() {
        let c = wl1_refine(&cycle(7), 7);
        assert_eq!(c.color_count(), 1);
    }

    #[test]
    fn path_two_colors() {
        let c = wl1_refine(&graph(3, &[(0, 1), (1, 2)]), 1);
        assert_eq!(c.color_count(), 2);
        assert_eq!(c.colors[0], c.colors[2]);
        assert_ne!(c.colors[0], c.colors[1]);
    }

    #[test]
    fn wl_sizes_and_isomorphs() {
        assert!(wl1_distinguishes(&cycle(5), &cycle(6)));
        let g = graph(5, &[(0, 1), (1, 2), (2, 3), (1, 4)]);
        let h = g.permuted(&[4, 2, 0, 1, 3]).unwrap();
        assert!(!wl1_distinguishes(&g, &h));
        // C6 vs two triangles: both 2-regular
        let two_c3 = graph(6, &[(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)]);
        assert!(!wl1_distinguishes(&cycle(6), &two_c3));
    }

    #[test]
    fn identical_graphs_pair_count() {
        let gs = vec![cycle(5); 4];
        for mode in [FingerprintMode::Exact, FingerprintMode::Histogram { n_bins: 5 }] {
            assert_eq!(count_indistinguishable(&gs, mode), 6);
        }
        assert_eq!(count_indistinguishable(&gs[..1], FingerprintMode::Exact), 0);
    }

    #[test]
    fn histogram_spans_sum() {
        let g = graph(6, &[(0, 1), (1, 2), (2, 3), (3, 4), (1, 5)]);
        let f = topo_fingerprint(&g, FingerprintMode::Histogram { n_bins: 6 });
        assert_eq!(f.values.len(), 48);
        for (i, span) in f.values.chunks(6).enumerate() {
            let expected = if i < 5 { g.node_count() } else { g.edge_count() };
            assert_eq!(span.iter().sum::<i64>(), expected as i64);
        }
    }

    #[test]
    fn fractions_reduce() {
        assert_eq!(fraction(4, 8), [1, 2]);
        assert_eq!(fraction(-2, -6), [1, 3]);
        assert_eq!(fraction(3, -9), [-1, 3]);
        assert_eq!(fraction(0, 5), [0, 1]);
    }
}
