//! Experiment harness: graph and potential generators, trial runner with
//! per-record invariant checks, a-priori bound curves and the free-energy
//! sequence of uniform grid models.

mod curves;
mod limit;
mod run;
mod spec;

pub use curves::{bound_curves, BoundRow, CurveSpec};
pub use limit::{free_energy_sequence, lattice_alpha, uniform_grid_mrf, FreeEnergyRow};
pub use run::{read_records_csv, run_experiment, summarize, write_csv, CellSummary, TrialRecord};
pub use spec::{DecompFamily, ExperimentSpec, Topology};

use rand::Rng as _;

use crate::graph::Graph;
use crate::mrf::PairwiseMrf;
use crate::rng;

/// Erdős–Rényi graph: each pair `(i, j)`, `i < j`, in lexicographic order is
/// an edge with probability `p`.
pub fn gen_random(n: usize, p: f64, seed: u64) -> Graph {
    let mut r = rng::main_stream(seed);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if r.gen_bool(p.clamp(0.0, 1.0)) {
                edges.push((i, j));
            }
        }
    }
    Graph::new(n, edges).expect("pairs are distinct")
}

/// Which Ising parameters the strength `α` scales.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PotentialMode {
    /// `θ_i ~ U[-0.05, 0.05]`, `θ_ij ~ U[-α, α]`.
    VaryingInteraction,
    /// `θ_i ~ U[-α, α]`, `θ_ij ~ U[-0.5, 0.5]`.
    VaryingField,
}

impl PotentialMode {
    /// Half-widths `(field, interaction)` of the uniform laws.
    pub fn ranges(&self, alpha: f64) -> (f64, f64) {
        match self {
            PotentialMode::VaryingInteraction => (0.05, alpha),
            PotentialMode::VaryingField => (alpha, 0.5),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            PotentialMode::VaryingInteraction => "interaction",
            PotentialMode::VaryingField => "field",
        }
    }
}

/// An Ising model `H(x) = Σ θ_i x_i + Σ θ_ij x_i x_j` and its shifted,
/// non-negative pairwise form.
#[derive(Debug, Clone, PartialEq)]
pub struct IsingSample {
    pub theta_node: Vec<f64>,
    /// By edge id.
    pub theta_edge: Vec<f64>,
    pub mrf: PairwiseMrf,
    pub shift: f64,
}

/// Ising model with `φ_i = (0, θ_i)` and `ψ_ij = (0, 0, 0, θ_ij)`, then
/// shifted to non-negative tables. Node parameters are drawn first, then
/// edge parameters in edge id order.
pub fn sample_potentials(graph: &Graph, mode: PotentialMode, alpha: f64, seed: u64) -> IsingSample {
    let (field, inter) = mode.ranges(alpha);
    let mut r = rng::main_stream(seed);
    let mut uniform = |a: f64| if a > 0.0 { r.gen_range(-a..=a) } else { 0.0 };
    let theta_node: Vec<f64> = (0..graph.n()).map(|_| uniform(field)).collect();
    let theta_edge: Vec<f64> = (0..graph.num_edges()).map(|_| uniform(inter)).collect();
    let raw = PairwiseMrf::new(
        graph.clone(),
        2,
        theta_node.iter().map(|&t| vec![0.0, t]).collect(),
        theta_edge.iter().map(|&t| vec![0.0, 0.0, 0.0, t]).collect(),
    )
    .expect("uniform draws are finite");
    let shifted = raw.affine_shift();
    IsingSample {
        theta_node,
        theta_edge,
        mrf: shifted.mrf,
        shift: shifted.shift,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::gen_grid;

    #[test]
    fn interaction_ranges() {
        let s = sample_potentials(&gen_grid(5), PotentialMode::VaryingInteraction, 0.2, 3);
        assert!(s.theta_edge.iter().all(|t| t.abs() <= 0.2));
        assert!(s.theta_node.iter().all(|t| t.abs() <= 0.05));
        assert!(s.mrf.is_nonnegative());
    }

    #[test]
    fn field_ranges() {
        let s = sample_potentials(&gen_grid(5), PotentialMode::VaryingField, 2.0, 3);
        assert!(s.theta_node.iter().all(|t| t.abs() <= 2.0));
        assert!(s.theta_edge.iter().all(|t| t.abs() <= 0.5));
    }

    #[test]
    fn deterministic_and_shift_consistent() {
        let g = gen_grid(3);
        let a = sample_potentials(&g, PotentialMode::VaryingField, 1.0, 8);
        assert_eq!(a, sample_potentials(&g, PotentialMode::VaryingField, 1.0, 8));
        let x = [1, 0, 1, 1, 1, 0, 0, 1, 1];
        let ising: f64 = (0..9).map(|v| a.theta_node[v] * x[v] as f64).sum::<f64>()
            + g.edges()
                .iter()
                .zip(&a.theta_edge)
                .map(|(&(u, v), t)| t * (x[u] * x[v]) as f64)
                .sum::<f64>();
        assert!((a.mrf.energy(&x) - a.shift - ising).abs() < 1e-12);
    }

    #[test]
    fn random_graph_density() {
        let g = gen_random(40, 0.25, 1);
        let m = g.num_edges() as f64;
        assert!((m / 780.0 - 0.25).abs() < 0.05);
        assert_eq!(gen_random(6, 0.0, 0).num_edges(), 0);
        assert_eq!(gen_random(6, 1.0, 0).num_edges(), 15);
    }
}
