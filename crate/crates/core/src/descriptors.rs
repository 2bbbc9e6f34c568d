//! Topological descriptors: degree statistics per node and EBC, ARI and SCAN
//! scores per edge.
//!
//! Edge outputs follow the canonical edge order of [`MolecularGraph::edges`].

use std::collections::VecDeque;

use crate::graph::MolecularGraph;

/// Degree of a node together with min/max/mean/std of its neighbors' degrees.
///
/// Isolated nodes get zeros for all four neighbor statistics; `dn_std` is the
/// population standard deviation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DegreeStats {
    pub deg: usize,
    pub dn_min: usize,
    pub dn_max: usize,
    pub dn_mean: f64,
    pub dn_std: f64,
}

pub type NodeDegreeProfile = Vec<DegreeStats>;

pub fn degree_profile(g: &MolecularGraph) -> NodeDegreeProfile {
    let degrees = g.degrees();
    (0..g.node_count())
        .map(|v| {
            let nbrs = g.neighbors(v);
            if nbrs.is_empty() {
                return DegreeStats {
                    deg: 0,
                    dn_min: 0,
                    dn_max: 0,
                    dn_mean: 0.0,
                    dn_std: 0.0,
                };
            }
            let dn = nbrs.iter().map(|&u| degrees[u]);
            let k = nbrs.len() as f64;
            let sum: usize = dn.clone().sum();
            let mean = sum as f64 / k;
            let var = dn.clone().map(|d| (d as f64 - mean).powi(2)).sum::<f64>() / k;
            DegreeStats {
                deg: nbrs.len(),
                dn_min: dn.clone().min().unwrap_or(0),
                dn_max: dn.max().unwrap_or(0),
                dn_mean: mean,
                dn_std: var.sqrt(),
            }
        })
        .collect()
}

/// Per-edge descriptor values, in canonical edge order.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeScores {
    pub ebc: Vec<f64>,
    pub ari: Vec<f64>,
    pub scan: Vec<f64>,
}

pub fn edge_scores(g: &MolecularGraph) -> EdgeScores {
    EdgeScores {
        ebc: edge_betweenness(g),
        ari: adjusted_rand_index(g),
        scan: scan_scores(g),
    }
}

/// Adjacency with edge ids, so accumulation can address edges directly.
fn incidence(g: &MolecularGraph) -> Vec<Vec<(usize, usize)>> {
    let mut inc = vec![Vec::new(); g.node_count()];
    for (id, &(u, v, _)) in g.edges().iter().enumerate() {
        inc[u].push((v, id));
        inc[v].push((u, id));
    }
    inc
}

/// Edge betweenness centrality normalized by `2 / (|V| (|V| - 1))`.
///
/// Brandes dependency accumulation from every source over unweighted BFS.
/// Every unordered pair is visited twice (once from each end), which the
/// normalization accounts for. `|V|` is the whole graph, so pairs in
/// different components contribute nothing but still count in the divisor.
pub fn edge_betweenness(g: &MolecularGraph) -> Vec<f64> {
    let n = g.node_count();
    let m = g.edge_count();
    let mut scores = vec![0.0; m];
    if n < 2 || m == 0 {
        return scores;
    }
    let inc = incidence(g);

    let mut sigma = vec![0.0f64; n];
    let mut dist = vec![usize::MAX; n];
    let mut delta = vec![0.0f64; n];
    let mut order = Vec::with_capacity(n);
    let mut queue = VecDeque::with_capacity(n);

    for s in 0..n {
        sigma.iter_mut().for_each(|x| *x = 0.0);
        dist.iter_mut().for_each(|x| *x = usize::MAX);
        delta.iter_mut().for_each(|x| *x = 0.0);
        order.clear();

        sigma[s] = 1.0;
        dist[s] = 0;
        queue.push_back(s);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            for &(w, _) in &inc[v] {
                if dist[w] == usize::MAX {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
                if dist[w] == dist[v] + 1 {
                    sigma[w] += sigma[v];
                }
            }
        }

        // predecessors of w are the neighbors one step closer to s
        for &w in order.iter().rev() {
            let coeff = (1.0 + delta[w]) / sigma[w];
            for &(v, id) in &inc[w] {
                if dist[v] != usize::MAX && dist[v] + 1 == dist[w] {
                    let c = sigma[v] * coeff;
                    scores[id] += c;
                    delta[v] += c;
                }
            }
        }
    }

    let norm = 1.0 / (n as f64 * (n as f64 - 1.0));
    scores.iter_mut().for_each(|x| *x *= norm);
    scores
}

/// Sizes of `N(u) ∩ N(v)`, `N(u) \ N(v)`, `N(v) \ N(u)` over sorted lists,
/// excluding `u` and `v` themselves.
fn overlap(nu: &[usize], nv: &[usize], u: usize, v: usize) -> (usize, usize, usize) {
    let (mut i, mut j) = (0, 0);
    let (mut common, mut only_u, mut only_v) = (0, 0, 0);
    while i < nu.len() || j < nv.len() {
        let a = nu.get(i).copied().unwrap_or(usize::MAX);
        let b = nv.get(j).copied().unwrap_or(usize::MAX);
        if a == b {
            if a != u && a != v {
                common += 1;
            }
            i += 1;
            j += 1;
        } else if a < b {
            if a != v {
                only_u += 1;
            }
            i += 1;
        } else {
            if b != u {
                only_v += 1;
            }
            j += 1;
        }
    }
    (common, only_u, only_v)
}

/// Per edge, the sizes of common / u-only / v-only neighborhoods with the
/// endpoints excluded.
pub fn edge_neighborhood_overlaps(g: &MolecularGraph) -> Vec<(usize, usize, usize)> {
    g.edges()
        .iter()
        .map(|&(u, v, _)| overlap(g.neighbors(u), g.neighbors(v), u, v))
        .collect()
}

/// Adjusted Rand Index of the endpoint neighborhoods of every edge.
///
/// `a`, `b`, `c` count common / u-only / v-only neighbors (endpoints
/// excluded), `d` the vertices adjacent to neither endpoint. A zero
/// denominator yields 0.
pub fn adjusted_rand_index(g: &MolecularGraph) -> Vec<f64> {
    let n = g.node_count() as i64;
    g.edges()
        .iter()
        .map(|&(u, v, _)| {
            let (a, b, c) = overlap(g.neighbors(u), g.neighbors(v), u, v);
            let (a, b, c) = (a as i64, b as i64, c as i64);
            let d = n - (2 + a + b + c);
            let num = 2 * (a * d - b * c);
            let den = (a + b) * (b + d) + (a + c) * (c + d);
            if den == 0 {
                0.0
            } else {
                num as f64 / den as f64
            }
        })
        .collect()
}

/// SCAN structural similarity `(|N(u) ∩ N(v)| + 1) / sqrt((deg u + 1)(deg v + 1))`.
pub fn scan_scores(g: &MolecularGraph) -> Vec<f64> {
    g.edges()
        .iter()
        .map(|&(u, v, _)| {
            let (nu, nv) = (g.neighbors(u), g.neighbors(v));
            let (common, _, _) = overlap(nu, nv, u, v);
            (common as f64 + 1.0) / (((nu.len() + 1) * (nv.len() + 1)) as f64).sqrt()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph(n: usize, edges: &[(usize, usize)]) -> MolecularGraph {
        MolecularGraph::from_topology(n, edges).unwrap()
    }

    fn assert_all(values: &[f64], expected: f64) {
        assert!(!values.is_empty());
        for &x in values {
            assert!((x - expected).abs() < 1e-12, "{x} != {expected}");
        }
    }

    #[test]
    fn degree_profile_path_and_star() {
        let p3 = degree_profile(&graph(3, &[(0, 1), (1, 2)]));
        assert_eq!(
            p3[1],
            DegreeStats {
                deg: 2,
                dn_min: 1,
                dn_max: 1,
                dn_mean: 1.0,
                dn_std: 0.0
            }
        );
        let star = degree_profile(&graph(4, &[(0, 1), (0, 2), (0, 3)]));
        assert_eq!((star[0].deg, star[0].dn_min, star[0].dn_max), (3, 1, 1));
        assert_eq!(star[0].dn_mean, 1.0);
        for leaf in &star[1..] {
            assert_eq!((leaf.deg, leaf.dn_min, leaf.dn_max), (1, 3, 3));
            assert_eq!((leaf.dn_mean, leaf.dn_std), (3.0, 0.0));
        }
        let iso = degree_profile(&graph(1, &[]));
        assert_eq!(
            iso[0],
            DegreeStats {
                deg: 0,
                dn_min: 0,
                dn_max: 0,
                dn_mean: 0.0,
                dn_std: 0.0
            }
        );
    }

    #[test]
    fn neighbor_degree_std_is_population() {
        // center of a path 0-1-2-3: neighbors 0 (deg 1) and 2 (deg 2)
        let p = degree_profile(&graph(4, &[(0, 1), (1, 2), (2, 3)]));
        assert!((p[1].dn_std - 0.5).abs() < 1e-15);
        assert!((p[1].dn_mean - 1.5).abs() < 1e-15);
    }

    #[test]
    fn small_graph_values() {
        let p2 = graph(2, &[(0, 1)]);
        let p3 = graph(3, &[(0, 1), (1, 2)]);
        let k3 = graph(3, &[(0, 1), (1, 2), (0, 2)]);
        let c4 = graph(4, &[(0, 1), (1, 2), (2, 3), (0, 3)]);

        assert_all(&edge_betweenness(&p2), 1.0);
        assert_all(&edge_betweenness(&p3), 2.0 / 3.0);
        assert_all(&edge_betweenness(&k3), 1.0 / 3.0);

        assert_all(&adjusted_rand_index(&p2), 0.0);
        assert_all(&adjusted_rand_index(&k3), 0.0);
        assert_all(&adjusted_rand_index(&c4), -1.0);

        assert_all(&scan_scores(&p2), 0.5);
        assert_all(&scan_scores(&k3), 2.0 / 3.0);
        assert_all(&scan_scores(&c4), 1.0 / 3.0);
    }

    #[test]
    fn disconnected_pairs_count_in_normalization() {
        // two disjoint edges: each edge carries one pair out of 4*3/2 = 6
        let g = graph(4, &[(0, 1), (2, 3)]);
        assert_all(&edge_betweenness(&g), 1.0 / 6.0);
    }

    #[test]
    fn empty_and_edgeless() {
        let g = graph(3, &[]);
        assert!(edge_betweenness(&g).is_empty());
        assert!(adjusted_rand_index(&g).is_empty());
        assert!(scan_scores(&g).is_empty());
        assert!(degree_profile(&graph(0, &[])).is_empty());
    }
}
