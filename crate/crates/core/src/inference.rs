//! Certified log-partition bounds and MAP estimates from an edge decomposition.
//!
//! Given removed edges `B` and the components `S_1..S_K` of `(V, E \ B)`, each
//! component is solved exactly. Then
//!
//! * `Σ_j log Z_j + Σ_B ψ^L  <=  log Z  <=  Σ_j log Z_j + Σ_B ψ^U`, and
//! * stitching the per-component MAPs gives `x̂` with
//!   `H(x*) - Σ_B (ψ^U - ψ^L)  <=  H(x̂)  <=  H(x*)`.

use rayon::prelude::*;

use crate::decomp::EdgeDecomposition;
use crate::error::{Error, Result};
use crate::exact::{ExactConfig, ExactResult};
use crate::mrf::{Assignment, PairwiseMrf};
use crate::saw::{saw_component_map, SawConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct InferenceBounds {
    pub log_z_lb: f64,
    pub log_z_ub: f64,
    /// `Σ_B (ψ^U - ψ^L)`.
    pub gap: f64,
    pub removed_edges: Vec<usize>,
    pub component_log_z: Vec<(Vec<usize>, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MapEstimate {
    pub assignment: Assignment,
    pub energy: f64,
    /// `Σ_B (ψ^U - ψ^L)`: `H(x*) - energy` never exceeds this.
    pub guarantee_gap: f64,
    pub removed_edges: Vec<usize>,
}

/// How components are solved for the MAP estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ComponentSolver {
    /// Enumeration; also yields `log Z_j`.
    Exact(ExactConfig),
    /// Sequential conditioning on SAW trees; binary models only.
    Saw(SawConfig),
}

impl Default for ComponentSolver {
    fn default() -> Self {
        ComponentSolver::Exact(ExactConfig::default())
    }
}

fn check_decomposition(mrf: &PairwiseMrf, decomp: &EdgeDecomposition) -> Result<Vec<bool>> {
    let g = mrf.graph();
    let mismatch = |what: &str| Error::InvalidModel(format!("decomposition does not fit the model: {what}"));
    if decomp.removed_edges.iter().any(|&e| e >= g.num_edges()) {
        return Err(mismatch("removed edge out of range"));
    }
    let mut label = vec![usize::MAX; g.n()];
    for (j, comp) in decomp.components.iter().enumerate() {
        for &v in comp {
            if v >= g.n() || label[v] != usize::MAX {
                return Err(mismatch("components are not a partition of the nodes"));
            }
            label[v] = j;
        }
    }
    if label.contains(&usize::MAX) {
        return Err(mismatch("a node is in no component"));
    }
    let removed = decomp.removed_mask(g.num_edges());
    let crossing = g
        .edges()
        .iter()
        .enumerate()
        .any(|(e, &(u, v))| !removed[e] && label[u] != label[v]);
    if crossing {
        return Err(mismatch("a kept edge joins two components"));
    }
    Ok(removed)
}

/// `(Σ_B ψ^L, Σ_B ψ^U, Σ_B (ψ^U - ψ^L))` summed in edge id order.
fn removed_sums(mrf: &PairwiseMrf, removed: &[usize]) -> (f64, f64, f64) {
    removed.iter().fold((0.0, 0.0, 0.0), |(l, u, g), &e| {
        (l + mrf.psi_min(e), u + mrf.psi_max(e), g + mrf.psi_range(e))
    })
}

/// Components are solved on `(V, E \ B)`: a removed edge inside a
/// component contributes only through `ψ^L` / `ψ^U`.
fn solve_components(
    mrf: &PairwiseMrf,
    decomp: &EdgeDecomposition,
    removed: &[bool],
    cfg: &ExactConfig,
) -> Result<Vec<ExactResult>> {
    let kept = mrf.without_edges(removed);
    decomp
        .components
        .par_iter()
        .map(|comp| cfg.component_solve(&kept, comp))
        .collect()
}

fn bounds_from(mrf: &PairwiseMrf, decomp: &EdgeDecomposition, sols: &[ExactResult]) -> InferenceBounds {
    let (lo, hi, gap) = removed_sums(mrf, &decomp.removed_edges);
    let sum_log_z: f64 = sols.iter().map(|s| s.log_z).sum();
    InferenceBounds {
        log_z_lb: sum_log_z + lo,
        log_z_ub: sum_log_z + hi,
        gap,
        removed_edges: decomp.removed_edges.clone(),
        component_log_z: decomp
            .components
            .iter()
            .zip(sols)
            .map(|(c, s)| (c.clone(), s.log_z))
            .collect(),
    }
}

fn stitch<'a>(mrf: &PairwiseMrf, decomp: &EdgeDecomposition, parts: impl Iterator<Item = &'a [usize]>) -> MapEstimate {
    let mut x = vec![0; mrf.n()];
    for (comp, local) in decomp.components.iter().zip(parts) {
        for (&v, &s) in comp.iter().zip(local) {
            x[v] = s;
        }
    }
    let energy = mrf.energy(&x);
    let (_, _, gap) = removed_sums(mrf, &decomp.removed_edges);
    MapEstimate {
        assignment: Assignment::new(mrf, x).expect("stitched states come from the model"),
        energy,
        guarantee_gap: gap,
        removed_edges: decomp.removed_edges.clone(),
    }
}

/// Lower and upper bounds on `log Z` from exact component solves.
pub fn log_partition_bounds(mrf: &PairwiseMrf, decomp: &EdgeDecomposition) -> Result<InferenceBounds> {
    log_partition_bounds_with(mrf, decomp, &ExactConfig::default())
}

pub fn log_partition_bounds_with(
    mrf: &PairwiseMrf,
    decomp: &EdgeDecomposition,
    cfg: &ExactConfig,
) -> Result<InferenceBounds> {
    let removed = check_decomposition(mrf, decomp)?;
    let sols = solve_components(mrf, decomp, &removed, cfg)?;
    Ok(bounds_from(mrf, decomp, &sols))
}

/// MAP estimate by stitching exact component MAPs.
pub fn mode_estimate(mrf: &PairwiseMrf, decomp: &EdgeDecomposition) -> Result<MapEstimate> {
    mode_estimate_with(mrf, decomp, &ComponentSolver::default())
}

pub fn mode_estimate_with(
    mrf: &PairwiseMrf,
    decomp: &EdgeDecomposition,
    solver: &ComponentSolver,
) -> Result<MapEstimate> {
    let removed = check_decomposition(mrf, decomp)?;
    let parts: Vec<Vec<usize>> = match solver {
        ComponentSolver::Exact(cfg) => solve_components(mrf, decomp, &removed, cfg)?
            .into_iter()
            .map(|s| s.map_assignment.into_vec())
            .collect(),
        ComponentSolver::Saw(cfg) => {
            let kept = mrf.without_edges(&removed);
            decomp
                .components
                .par_iter()
                .map(|comp| {
                    let (sub, _) = kept.induced(comp)?;
                    saw_component_map(&sub, cfg).map(Assignment::into_vec)
                })
                .collect::<Result<_>>()?
        }
    };
    Ok(stitch(mrf, decomp, parts.iter().map(Vec::as_slice)))
}

/// Bounds and MAP estimate from a single exact solve per component.
pub fn solve_decomposed(
    mrf: &PairwiseMrf,
    decomp: &EdgeDecomposition,
    cfg: &ExactConfig,
) -> Result<(InferenceBounds, MapEstimate)> {
    let removed = check_decomposition(mrf, decomp)?;
    let sols = solve_components(mrf, decomp, &removed, cfg)?;
    let bounds = bounds_from(mrf, decomp, &sols);
    let map = stitch(mrf, decomp, sols.iter().map(|s| &s.map_assignment[..]));
    Ok((bounds, map))
}

/// What a single run certifies about its relative error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelativeError {
    /// `gap / log_z_lb`, or the absolute gap when `absolute_only`.
    pub observed: f64,
    /// Set when `log_z_lb <= 0`, so no relative statement is possible.
    pub absolute_only: bool,
    /// `ε (d* + 1)` from the decomposition's target `ε`: the bound on the
    /// expected gap relative to `log Z` for non-negative potentials.
    pub a_priori: f64,
}

pub fn relative_error_bound(mrf: &PairwiseMrf, decomp: &EdgeDecomposition, bounds: &InferenceBounds) -> RelativeError {
    let a_priori = decomp.certificate.target_eps * (mrf.graph().max_degree() + 1) as f64;
    if bounds.gap == 0.0 {
        return RelativeError {
            observed: 0.0,
            absolute_only: false,
            a_priori,
        };
    }
    if bounds.log_z_lb <= 0.0 {
        RelativeError {
            observed: bounds.gap,
            absolute_only: true,
            a_priori,
        }
    } else {
        RelativeError {
            observed: bounds.gap / bounds.log_z_lb,
            absolute_only: false,
            a_priori,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decomp::{grid_decomp_layout, minor_e, DecompParams};
    use crate::exact::{brute_log_z, brute_map, grid_transfer_log_z};
    use crate::graph::Graph;
    use crate::lattice::GridLayout;
    use crate::rng;
    use rand::Rng as _;

    fn pair() -> PairwiseMrf {
        PairwiseMrf::from_edge_list(2, 2, vec![vec![0.0; 2]; 2], vec![(0, 1, vec![0.0, 0.0, 0.0, 1.0])]).unwrap()
    }

    fn random(graph: Graph, seed: u64) -> PairwiseMrf {
        let mut r = rng::main_stream(seed);
        let nodes = (0..graph.n()).map(|_| vec![0.0, r.gen_range(-1.0..1.0)]).collect();
        let edges = (0..graph.num_edges())
            .map(|_| vec![0.0, 0.0, 0.0, r.gen_range(-1.0..1.0)])
            .collect();
        PairwiseMrf::new(graph, 2, nodes, edges).unwrap().affine_shift().mrf
    }

    #[test]
    fn empty_removal_is_exact() {
        let m = random(crate::lattice::gen_grid(3), 1);
        let d = EdgeDecomposition::none(m.graph());
        let b = log_partition_bounds(&m, &d).unwrap();
        let z = brute_log_z(&m).unwrap();
        assert_eq!((b.log_z_lb, b.log_z_ub, b.gap), (z, z, 0.0));
        let x = mode_estimate(&m, &d).unwrap();
        assert_eq!(x.assignment, brute_map(&m).unwrap().0);
    }

    #[test]
    fn two_node_example() {
        let m = pair();
        let d = EdgeDecomposition::from_mask(m.graph(), &[true], DecompParams::None);
        let b = log_partition_bounds(&m, &d).unwrap();
        assert_eq!(b.log_z_lb, 2.0 * 2f64.ln());
        assert_eq!(b.log_z_ub, 2.0 * 2f64.ln() + 1.0);
        let z = (3.0 + 1f64.exp()).ln();
        assert!(b.log_z_lb <= z && z <= b.log_z_ub);
        let r = relative_error_bound(&m, &d, &b);
        assert!((r.observed - 1.0 / 4f64.ln()).abs() < 1e-15);
        assert!(!r.absolute_only);
        let x = mode_estimate(&m, &d).unwrap();
        let (_, h) = brute_map(&m).unwrap();
        assert!(h - x.guarantee_gap <= x.energy && x.energy <= h);
    }

    #[test]
    fn removed_edge_inside_a_component() {
        // triangle with positive tables; dropping one edge keeps it connected
        let m = PairwiseMrf::from_edge_list(
            3,
            2,
            vec![vec![0.0, 0.3]; 3],
            vec![
                (0, 1, vec![1.0, 1.5, 2.0, 3.0]),
                (0, 2, vec![0.5, 0.0, 0.0, 0.5]),
                (1, 2, vec![0.2, 0.4, 0.1, 0.9]),
            ],
        )
        .unwrap();
        let d = EdgeDecomposition::from_mask(m.graph(), &[true, false, false], DecompParams::None);
        assert_eq!(d.components, vec![vec![0, 1, 2]]);
        let b = log_partition_bounds(&m, &d).unwrap();
        let z = brute_log_z(&m).unwrap();
        assert!(b.log_z_lb <= z && z <= b.log_z_ub);
        let kept = brute_log_z(&m.without_edges(&[true, false, false])).unwrap();
        assert_eq!(b.log_z_lb, kept + 1.0);
        let x = mode_estimate_with(&m, &d, &ComponentSolver::Saw(SawConfig::default())).unwrap();
        let (_, h) = brute_map(&m).unwrap();
        assert!(h - x.guarantee_gap <= x.energy && x.energy <= h);
    }

    #[test]
    fn gap_zero_relative() {
        let m = pair();
        let d = EdgeDecomposition::none(m.graph());
        let b = log_partition_bounds(&m, &d).unwrap();
        assert_eq!(relative_error_bound(&m, &d, &b).observed, 0.0);
    }

    #[test]
    fn bracket_on_grid_with_minor_e() {
        let layout = GridLayout::grid(5, 5);
        let m = random(layout.graph(), 7);
        let z = grid_transfer_log_z(&m, &layout).unwrap();
        for seed in 0..50 {
            let d = minor_e(m.graph(), 3, 4, seed).unwrap();
            let (b, x) = solve_decomposed(&m, &d, &ExactConfig::default()).unwrap();
            assert!(b.log_z_lb <= z * (1.0 + 1e-12) && z <= b.log_z_ub * (1.0 + 1e-12));
            let gap = b.log_z_ub - b.log_z_lb;
            assert!((gap - b.gap).abs() <= 1e-12 * b.gap.max(1.0));
            assert_eq!(x.energy, m.energy(&x.assignment));
        }
    }

    #[test]
    fn criscross_sandwich_all_offsets() {
        let layout = GridLayout::criscross(4, 4);
        let m = random(layout.graph(), 3);
        let (_, h) = brute_map(&m).unwrap();
        for l1 in 0..2 {
            for l2 in 0..2 {
                let d = grid_decomp_layout(&layout, 2, l1, l2).unwrap();
                let x = mode_estimate(&m, &d).unwrap();
                assert!(h - x.guarantee_gap <= x.energy + 1e-12 && x.energy <= h + 1e-12);
                let s = mode_estimate_with(&m, &d, &ComponentSolver::Saw(SawConfig::default())).unwrap();
                assert_eq!(s.assignment, x.assignment);
            }
        }
    }

    #[test]
    fn rejects_foreign_decomposition() {
        let m = pair();
        let other = Graph::new(2, []).unwrap();
        let d = EdgeDecomposition::none(&other);
        assert!(log_partition_bounds(&m, &d).is_err());
    }
}
