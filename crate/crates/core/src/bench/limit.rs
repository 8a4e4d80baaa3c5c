//! The free-energy sequence `a_n = log Z_n / n²` of translation-invariant
//! grid models.

use serde::{Deserialize, Serialize};

use crate::decomp::grid_decomp;
use crate::error::{Error, Result};
use crate::exact::ExactConfig;
use crate::inference::log_partition_bounds_with;
use crate::lattice::GridLayout;
use crate::mrf::PairwiseMrf;

/// The `n x n` grid with the same `q`-state node table on every node and the
/// same `q x q` edge table (row-major, smaller id first) on every edge.
pub fn uniform_grid_mrf(n: usize, phi: &[f64], psi: &[f64]) -> Result<PairwiseMrf> {
    let q = phi.len();
    if q < 2 || psi.len() != q * q {
        return Err(Error::InvalidModel(format!(
            "need a node table of q >= 2 entries and a q x q edge table, got {} and {}",
            phi.len(),
            psi.len()
        )));
    }
    if n < 2 {
        return Err(Error::Domain("grid side must be at least 2".into()));
    }
    let g = GridLayout::grid(n, n).graph();
    let m = g.num_edges();
    PairwiseMrf::new(g, q, vec![phi.to_vec(); n * n], vec![psi.to_vec(); m])
}

/// `ln q + φ* + 4ψ*`, the per-node upper constant for non-negative tables.
pub fn lattice_alpha(phi: &[f64], psi: &[f64]) -> f64 {
    let max = |t: &[f64]| t.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (phi.len() as f64).ln() + max(phi) + 4.0 * max(psi)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FreeEnergyRow {
    pub n: usize,
    pub log_z: f64,
    pub a_n: f64,
    /// `|a_n - a_{n-1}|` when the previous side was also evaluated.
    pub delta: Option<f64>,
    /// `n² ln q`.
    pub lower: f64,
    /// `n² (ln q + φ* + 4ψ*)`.
    pub upper: f64,
    /// Slab bounds on `a_n` from the width-`k` grid decomposition.
    pub slab_lb: f64,
    pub slab_ub: f64,
}

/// Exact `a_n` for every side in `sides` via the transfer matrix, together
/// with the trivial sandwich and the slab bounds for width `k` (clamped to
/// `n`). Tables are shifted to be non-negative first.
pub fn free_energy_sequence(
    phi: &[f64],
    psi: &[f64],
    sides: &[usize],
    k: usize,
    cfg: &ExactConfig,
) -> Result<Vec<FreeEnergyRow>> {
    if k == 0 {
        return Err(Error::Domain("slab width must be at least 1".into()));
    }
    let lo = |t: &[f64]| t.iter().copied().fold(f64::INFINITY, f64::min).min(0.0);
    let (sp, ss) = (lo(phi), lo(psi));
    let phi: Vec<f64> = phi.iter().map(|x| x - sp).collect();
    let psi: Vec<f64> = psi.iter().map(|x| x - ss).collect();
    let alpha = lattice_alpha(&phi, &psi);
    let ln_q = (phi.len() as f64).ln();
    let mut rows: Vec<FreeEnergyRow> = Vec::with_capacity(sides.len());
    for &n in sides {
        let mrf = uniform_grid_mrf(n, &phi, &psi)?;
        let log_z = cfg.transfer_log_z(&mrf, &GridLayout::grid(n, n))?;
        let nn = (n * n) as f64;
        let a_n = log_z / nn;
        let slab = log_partition_bounds_with(&mrf, &grid_decomp(n, k.min(n), 0, 0)?, cfg)?;
        let delta = rows.last().filter(|r| r.n + 1 == n).map(|r| (a_n - r.a_n).abs());
        rows.push(FreeEnergyRow {
            n,
            log_z,
            a_n,
            delta,
            lower: nn * ln_q,
            upper: nn * alpha,
            slab_lb: slab.log_z_lb / nn,
            slab_ub: slab.log_z_ub / nn,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn independent_nodes() {
        let rows = free_energy_sequence(&[0.0, 0.0], &[0.0; 4], &[2, 3, 4], 2, &ExactConfig::default()).unwrap();
        for r in rows {
            assert!((r.a_n - 2f64.ln()).abs() < 1e-12);
            assert!((r.slab_lb - r.a_n).abs() < 1e-12 && (r.slab_ub - r.a_n).abs() < 1e-12);
        }
    }

    #[test]
    fn sandwich_and_trend() {
        let psi = [0.4, 0.0, 0.0, 0.4];
        let rows = free_energy_sequence(
            &[0.0, 0.1],
            &psi,
            &(3..=8).collect::<Vec<_>>(),
            2,
            &ExactConfig::default(),
        )
        .unwrap();
        for r in &rows {
            assert!(r.lower <= r.log_z && r.log_z <= r.upper);
            assert!(r.slab_lb <= r.a_n + 1e-12 && r.a_n <= r.slab_ub + 1e-12);
        }
        let d: Vec<f64> = rows.iter().filter_map(|r| r.delta).collect();
        assert_eq!(d.len(), 5);
        assert!(d.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn rejects_bad_tables() {
        assert!(uniform_grid_mrf(3, &[0.0, 0.0], &[0.0; 3]).is_err());
        assert!(uniform_grid_mrf(1, &[0.0, 0.0], &[0.0; 4]).is_err());
    }
}
