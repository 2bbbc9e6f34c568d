//! Heavy-atom molecular graph.
//!
//! Nodes carry atomic numbers (0 for unknown), edges carry one of five bond
//! categories. Edges are stored once as `(u, v)` with `u < v`, sorted, so
//! every per-edge descriptor has a deterministic order.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest atomic number accepted by [`MolecularGraph::new`].
pub const MAX_ATOMIC_NUMBER: u8 = 118;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BondType {
    Single,
    Double,
    Triple,
    Aromatic,
    Misc,
}

impl BondType {
    pub const ALL: [BondType; 5] = [
        BondType::Single,
        BondType::Double,
        BondType::Triple,
        BondType::Aromatic,
        BondType::Misc,
    ];

    /// Position of this bond type in [`BondType::ALL`].
    pub fn index(self) -> usize {
        match self {
            BondType::Single => 0,
            BondType::Double => 1,
            BondType::Triple => 2,
            BondType::Aromatic => 3,
            BondType::Misc => 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("atomic number list has {got} entries, expected {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("edge {index} ({u}, {v}) is a self-loop")]
    SelfLoop { index: usize, u: usize, v: usize },
    #[error("edge {index} ({u}, {v}) duplicates an earlier edge")]
    DuplicateEdge { index: usize, u: usize, v: usize },
    #[error("edge {index} ({u}, {v}) references a node outside 0..{node_count}")]
    EdgeOutOfRange {
        index: usize,
        u: usize,
        v: usize,
        node_count: usize,
    },
    #[error("atom {index} has atomic number {value}, outside 0..={max}", max = MAX_ATOMIC_NUMBER)]
    AtomicNumberOutOfRange { index: usize, value: u32 },
    #[error("node {node} is outside 0..{node_count}")]
    NodeOutOfRange { node: usize, node_count: usize },
}

/// Undirected, simple, labeled graph of a molecule.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MolecularGraph {
    atomic_numbers: Vec<u8>,
    edges: Vec<(usize, usize, BondType)>,
    adjacency: Vec<Vec<usize>>,
}

/// Ordered graph collection.
pub type GraphCollection = Vec<MolecularGraph>;

impl MolecularGraph {
    /// Builds a graph, canonicalizing edges to `u < v` sorted by `(u, v)`.
    pub fn new(
        node_count: usize,
        atomic_numbers: &[u32],
        edges: &[(usize, usize, BondType)],
    ) -> Result<Self, GraphError> {
        if atomic_numbers.len() != node_count {
            return Err(GraphError::LengthMismatch {
                expected: node_count,
                got: atomic_numbers.len(),
            });
        }
        let mut atoms = Vec::with_capacity(node_count);
        for (index, &z) in atomic_numbers.iter().enumerate() {
            if z > u32::from(MAX_ATOMIC_NUMBER) {
                return Err(GraphError::AtomicNumberOutOfRange { index, value: z });
            }
            atoms.push(z as u8);
        }

        let mut seen = BTreeSet::new();
        let mut canon = Vec::with_capacity(edges.len());
        for (index, &(u, v, bond)) in edges.iter().enumerate() {
            if u >= node_count || v >= node_count {
                return Err(GraphError::EdgeOutOfRange {
                    index,
                    u,
                    v,
                    node_count,
                });
            }
            if u == v {
                return Err(GraphError::SelfLoop { index, u, v });
            }
            let key = (u.min(v), u.max(v));
            if !seen.insert(key) {
                return Err(GraphError::DuplicateEdge { index, u, v });
            }
            canon.push((key.0, key.1, bond));
        }
        canon.sort_unstable_by_key(|&(u, v, _)| (u, v));

        let mut adjacency = vec![Vec::new(); node_count];
        for &(u, v, _) in &canon {
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        for nbrs in &mut adjacency {
            nbrs.sort_unstable();
        }

        Ok(Self {
            atomic_numbers: atoms,
            edges: canon,
            adjacency,
        })
    }

    /// Unlabeled graph: atomic numbers 0 and all bonds [`BondType::Misc`].
    pub fn from_topology(node_count: usize, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        let typed: Vec<_> = edges.iter().map(|&(u, v)| (u, v, BondType::Misc)).collect();
        Self::new(node_count, &vec![0; node_count], &typed)
    }

    pub fn node_count(&self) -> usize {
        self.atomic_numbers.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn atomic_numbers(&self) -> &[u8] {
        &self.atomic_numbers
    }

    /// Canonical edge list, `u < v`, sorted.
    pub fn edges(&self) -> &[(usize, usize, BondType)] {
        &self.edges
    }

    /// Sorted neighbor list of `v`. Panics if `v` is out of range.
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> Result<usize, GraphError> {
        self.adjacency
            .get(v)
            .map(Vec::len)
            .ok_or(GraphError::NodeOutOfRange {
                node: v,
                node_count: self.node_count(),
            })
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.adjacency.iter().map(Vec::len).collect()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.node_count() && self.adjacency[u].binary_search(&v).is_ok()
    }

    /// Number of connected components; an empty graph has none.
    pub fn component_count(&self) -> usize {
        let n = self.node_count();
        let mut seen = vec![false; n];
        let mut stack = Vec::new();
        let mut components = 0;
        for start in 0..n {
            if seen[start] {
                continue;
            }
            components += 1;
            seen[start] = true;
            stack.push(start);
            while let Some(v) = stack.pop() {
                for &w in &self.adjacency[v] {
                    if !seen[w] {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
        }
        components
    }

    /// Relabels nodes so that old node `i` becomes `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self, GraphError> {
        let n = self.node_count();
        if perm.len() != n {
            return Err(GraphError::LengthMismatch {
                expected: n,
                got: perm.len(),
            });
        }
        let mut atoms = vec![0u32; n];
        for (old, &new) in perm.iter().enumerate() {
            if new >= n {
                return Err(GraphError::NodeOutOfRange {
                    node: new,
                    node_count: n,
                });
            }
            atoms[new] = u32::from(self.atomic_numbers[old]);
        }
        let edges: Vec<_> = self
            .edges
            .iter()
            .map(|&(u, v, b)| (perm[u], perm[v], b))
            .collect();
        Self::new(n, &atoms, &edges)
    }
}
