//! Random molecule-like graphs for examples, benchmarks and property tests.

use rand::Rng;

use crate::graph::{BondType, MolecularGraph};

const ELEMENTS: [(u32, u32); 6] = [(6, 60), (7, 12), (8, 12), (9, 3), (16, 4), (17, 4)];
const MAX_VALENCE: usize = 4;

fn pick_element<R: Rng>(rng: &mut R) -> u32 {
    let total: u32 = ELEMENTS.iter().map(|e| e.1).sum();
    let mut x = rng.gen_range(0..total);
    for &(z, w) in &ELEMENTS {
        if x < w {
            return z;
        }
        x -= w;
    }
    6
}

/// A connected molecule-like graph: a random tree with degree at most four,
/// closed into rings with probability `ring_rate` per extra edge attempt.
pub fn random_molecule<R: Rng>(rng: &mut R, n_atoms: usize, ring_rate: f64) -> MolecularGraph {
    let n = n_atoms.max(1);
    let atoms: Vec<u32> = (0..n).map(|_| pick_element(rng)).collect();
    let mut degree = vec![0usize; n];
    let mut edges = Vec::with_capacity(n + n / 4);
    for v in 1..n {
        let mut u = rng.gen_range(0..v);
        while degree[u] >= MAX_VALENCE {
            u = rng.gen_range(0..v);
        }
        degree[u] += 1;
        degree[v] += 1;
        let bond = match rng.gen_range(0..10) {
            0 => BondType::Double,
            1 if n > 2 => BondType::Aromatic,
            _ => BondType::Single,
        };
        edges.push((u, v, bond));
    }
    let attempts = (n as f64 * ring_rate).round() as usize;
    for _ in 0..attempts {
        let (u, v) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if u == v || degree[u] >= MAX_VALENCE || degree[v] >= MAX_VALENCE {
            continue;
        }
        if edges.iter().any(|&(a, b, _)| (a, b) == (u, v) || (a, b) == (v, u)) {
            continue;
        }
        degree[u] += 1;
        degree[v] += 1;
        edges.push((u, v, BondType::Aromatic));
    }
    MolecularGraph::new(n, &atoms, &edges).expect("generated edges are valid")
}

/// Any simple graph on `n` nodes with edge probability `p`.
pub fn random_graph<R: Rng>(rng: &mut R, n: usize, p: f64) -> MolecularGraph {
    let mut edges = Vec::new();
    for v in 1..n {
        for u in 0..v {
            if rng.gen_bool(p) {
                edges.push((u, v));
            }
        }
    }
    MolecularGraph::from_topology(n, &edges).expect("generated edges are valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn molecules_are_connected_and_valence_bounded() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in [1, 2, 5, 40] {
            let g = random_molecule(&mut rng, n, 0.2);
            assert_eq!(g.node_count(), n);
            assert_eq!(g.component_count(), 1);
            assert!(g.degrees().iter().all(|&d| d <= MAX_VALENCE));
        }
    }
}
