//! Randomized `(ε, Δ)` graph decompositions.
//!
//! A random set `B` of nodes (or edges) is an `(ε, Δ)` decomposition when every
//! element lands in `B` with probability at most `ε` and every connected
//! component left after removing `B` has at most `Δ` nodes. Three schemes are
//! provided:
//!
//! * ball carving for graphs of low doubling dimension ([`db_dim_vertex`],
//!   [`db_dim_edge`]),
//! * BFS-layer cutting for minor-excluded graphs ([`minor_v`], [`minor_e`]),
//! * the deterministic slab cut of a square grid ([`grid_decomp`]).

mod dbdim;
mod grid;
mod minor;

pub use dbdim::{db_dim_carve, db_dim_edge, db_dim_vertex, k_param, CarveStep, Carving, RadiusLaw};
pub use grid::{grid_decomp, grid_decomp_layout};
pub use minor::{minor_e, minor_e_with_levels, minor_v, minor_v_with_levels};

use crate::graph::Graph;

/// Parameters a decomposition was produced with.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DecompParams {
    /// Nothing removed.
    None,
    DbDim {
        eps: f64,
        k: usize,
        seed: u64,
    },
    MinorV {
        r: usize,
        lambda: usize,
        seed: u64,
    },
    MinorE {
        r: usize,
        lambda: usize,
        seed: u64,
    },
    Grid {
        k: usize,
        l1: usize,
        l2: usize,
    },
}

impl DecompParams {
    /// The per-element removal probability the scheme guarantees: `2ε` for
    /// ball carving, `r/Λ` for layer cutting, `1/k` for grid slabs.
    pub fn target_eps(&self) -> f64 {
        match *self {
            DecompParams::None => 0.0,
            DecompParams::DbDim { eps, .. } => (2.0 * eps).min(1.0),
            DecompParams::MinorV { r, lambda, .. } | DecompParams::MinorE { r, lambda, .. } => {
                (r as f64 / lambda as f64).min(1.0)
            }
            DecompParams::Grid { k, .. } => 1.0 / k as f64,
        }
    }
}

/// Removed node set and the components of the remaining induced graph.
#[derive(Debug, Clone, PartialEq)]
pub struct VertexDecomposition {
    pub removed: Vec<usize>,
    pub components: Vec<Vec<usize>>,
    pub params: DecompParams,
}

impl VertexDecomposition {
    pub(crate) fn from_mask(graph: &Graph, mask: &[bool], params: DecompParams) -> Self {
        VertexDecomposition {
            removed: (0..graph.n()).filter(|&v| mask[v]).collect(),
            components: graph.components_without_nodes(mask),
            params,
        }
    }

    pub fn max_component(&self) -> usize {
        self.components.iter().map(Vec::len).max().unwrap_or(0)
    }
}

/// What a run can certify: the scheme's target `ε` and the observed `Δ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Certificate {
    pub target_eps: f64,
    pub max_component: usize,
}

/// Removed edge set (edge ids, ascending) and the components of `(V, E \ B)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeDecomposition {
    pub removed_edges: Vec<usize>,
    pub components: Vec<Vec<usize>>,
    pub params: DecompParams,
    pub certificate: Certificate,
}

impl EdgeDecomposition {
    /// Decomposition from a removal mask over edge ids.
    pub fn from_mask(graph: &Graph, mask: &[bool], params: DecompParams) -> Self {
        let components = graph.components_without_edges(mask);
        let max_component = components.iter().map(Vec::len).max().unwrap_or(0);
        EdgeDecomposition {
            removed_edges: (0..graph.num_edges()).filter(|&e| mask[e]).collect(),
            components,
            params,
            certificate: Certificate {
                target_eps: params.target_eps(),
                max_component,
            },
        }
    }

    /// Removes nothing: the components are those of the graph itself.
    pub fn none(graph: &Graph) -> Self {
        Self::from_mask(graph, &vec![false; graph.num_edges()], DecompParams::None)
    }

    /// Removes every edge whose endpoints lie in different parts of `parts`,
    /// a partition of the node set. This lifts a decomposition computed on a
    /// spanning subgraph (e.g. the grid inside a cris-cross graph) to `graph`.
    pub fn from_partition(graph: &Graph, parts: &[Vec<usize>], params: DecompParams) -> Self {
        let mut label = vec![usize::MAX; graph.n()];
        for (i, p) in parts.iter().enumerate() {
            for &v in p {
                label[v] = i;
            }
        }
        let mask: Vec<bool> = graph.edges().iter().map(|&(u, v)| label[u] != label[v]).collect();
        Self::from_mask(graph, &mask, params)
    }

    pub fn removed_mask(&self, num_edges: usize) -> Vec<bool> {
        let mut mask = vec![false; num_edges];
        for &e in &self.removed_edges {
            mask[e] = true;
        }
        mask
    }

    pub fn max_component(&self) -> usize {
        self.certificate.max_component
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn none_keeps_components() {
        let g = Graph::new(4, [(0, 1), (2, 3)]).unwrap();
        let d = EdgeDecomposition::none(&g);
        assert!(d.removed_edges.is_empty());
        assert_eq!(d.components, vec![vec![0, 1], vec![2, 3]]);
        assert_eq!(d.certificate.target_eps, 0.0);
    }

    #[test]
    fn partition_lift_cuts_crossing_edges() {
        let g = Graph::new(4, [(0, 1), (1, 2), (2, 3), (0, 3), (0, 2)]).unwrap();
        let d = EdgeDecomposition::from_partition(&g, &[vec![0, 1], vec![2, 3]], DecompParams::None);
        let cut: Vec<_> = d.removed_edges.iter().map(|&e| g.edge(e)).collect();
        assert_eq!(cut, vec![(0, 2), (0, 3), (1, 2)]);
        assert_eq!(d.components, vec![vec![0, 1], vec![2, 3]]);
    }

    #[test]
    fn target_eps_values() {
        assert_eq!(DecompParams::Grid { k: 4, l1: 0, l2: 0 }.target_eps(), 0.25);
        assert_eq!(
            DecompParams::MinorE {
                r: 3,
                lambda: 4,
                seed: 0
            }
            .target_eps(),
            0.75
        );
        assert_eq!(
            DecompParams::DbDim {
                eps: 0.3,
                k: 5,
                seed: 0
            }
            .target_eps(),
            0.6
        );
    }
}
