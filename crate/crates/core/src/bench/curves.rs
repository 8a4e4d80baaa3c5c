//! A-priori bounds on the expected certified gap per node.
//!
//! For an Ising edge `ψ = (0, 0, 0, θ)` with `θ ~ U[-a, a]` the range is
//! `|θ|`, with mean `a/2`. Every axis edge is removed with probability at most
//! `ε` and, on a cris-cross lattice decomposed through its grid, every
//! diagonal with probability at most `2ε`. Hence
//!
//! ```text
//! E[gap] / N <= ε (a/2) (m_axis + 2 m_diag) / N
//! ```
//!
//! which tends to `ε (a/2) (2 + 4·[cris-cross])` as the side grows.

use serde::{Deserialize, Serialize};

use super::spec::DecompFamily;
use super::PotentialMode;
use crate::decomp::DecompParams;

#[derive(Debug, Clone, PartialEq)]
pub struct CurveSpec {
    pub side: usize,
    pub criscross: bool,
    pub mode: PotentialMode,
    pub alphas: Vec<f64>,
    pub decomp: DecompFamily,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundRow {
    pub side: usize,
    pub criscross: bool,
    pub mode: String,
    pub alpha: f64,
    pub decomp: String,
    pub param: usize,
    pub eps: f64,
    /// Bound on `E[gap] / N` at this side length.
    pub bound: f64,
    /// The same bound as the side tends to infinity.
    pub limit: f64,
    /// `limit - bound`, the share of missing boundary edges.
    pub boundary: f64,
}

fn eps_of(decomp: &DecompFamily, param: usize) -> f64 {
    let p = match *decomp {
        DecompFamily::MinorE { r, .. } => DecompParams::MinorE {
            r,
            lambda: param,
            seed: 0,
        },
        DecompFamily::DbDim { eps, .. } => DecompParams::DbDim { eps, k: param, seed: 0 },
        DecompFamily::Grid { .. } => DecompParams::Grid { k: param, l1: 0, l2: 0 },
        DecompFamily::None => DecompParams::None,
    };
    p.target_eps()
}

/// One row per `(α, parameter)`, `α` outermost.
pub fn bound_curves(spec: &CurveSpec) -> Vec<BoundRow> {
    let n = spec.side as f64;
    let nodes = n * n;
    let axis = 2.0 * n * (n - 1.0);
    let diag = if spec.criscross {
        2.0 * (n - 1.0) * (n - 1.0)
    } else {
        0.0
    };
    let mut rows = Vec::new();
    for &alpha in &spec.alphas {
        let (_, inter) = spec.mode.ranges(alpha);
        let mean_range = inter / 2.0;
        for param in spec.decomp.params() {
            let eps = eps_of(&spec.decomp, param);
            let weight = |e: f64| (e * mean_range).min(mean_range);
            let bound = (weight(eps) * axis + weight(2.0 * eps) * diag) / nodes;
            let limit = weight(eps) * 2.0 + if spec.criscross { weight(2.0 * eps) * 2.0 } else { 0.0 };
            rows.push(BoundRow {
                side: spec.side,
                criscross: spec.criscross,
                mode: spec.mode.name().into(),
                alpha,
                decomp: spec.decomp.name().into(),
                param,
                eps,
                bound,
                limit,
                boundary: limit - bound,
            });
        }
    }
    rows
}
