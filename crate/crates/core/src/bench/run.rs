use std::io::{Read, Write};
use std::time::Instant;

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::sample_potentials;
use super::spec::{DecompFamily, ExperimentSpec};
use crate::decomp::{db_dim_edge, grid_decomp_layout, minor_e, EdgeDecomposition};
use crate::error::{Error, Result};
use crate::exact::ExactConfig;
use crate::graph::Graph;
use crate::inference::solve_decomposed;
use crate::lattice::GridLayout;
use crate::mrf::PairwiseMrf;
use crate::rng;

const BRACKET_TOL: f64 = 1e-9;
const IDENTITY_TOL: f64 = 1e-12;

/// One trial: inputs, certified outputs, oracle comparison and checks.
///
/// Energies and `log Z` refer to the shifted, non-negative model. Errors are
/// per node: `error_lb = |lb - log Z| / N`, `error_ub = |ub - log Z| / N`,
/// `error_map = (H* - H_hat) / N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub topology: String,
    pub nodes: usize,
    pub mode: String,
    pub alpha: f64,
    pub decomp: String,
    /// `Λ`, `K` or `k`.
    pub param: usize,
    pub target_eps: f64,
    pub trial: usize,
    pub model_seed: u64,
    pub decomp_seed: u64,
    pub removed: usize,
    pub max_component: usize,
    pub lb: f64,
    pub ub: f64,
    pub gap: f64,
    pub exact_log_z: Option<f64>,
    pub h_hat: f64,
    pub h_star: Option<f64>,
    pub error_lb: Option<f64>,
    pub error_ub: Option<f64>,
    pub error_map: Option<f64>,
    pub gap_per_node: f64,
    /// `transfer`, `brute`, `elimination`, `infeasible` or `off`.
    pub oracle: String,
    pub bracket_ok: Option<bool>,
    pub sandwich_ok: Option<bool>,
    pub gap_identity_ok: bool,
    pub wall_ms: f64,
}

impl TrialRecord {
    /// Every invariant that could be checked held.
    pub fn ok(&self) -> bool {
        self.gap_identity_ok && self.bracket_ok != Some(false) && self.sandwich_ok != Some(false)
    }
}

struct Oracle {
    kind: &'static str,
    log_z: Option<f64>,
    h_star: Option<f64>,
}

fn oracle(mrf: &PairwiseMrf, layout: Option<&GridLayout>, spec: &ExperimentSpec) -> Oracle {
    if !spec.exact {
        return Oracle {
            kind: "off",
            log_z: None,
            h_star: None,
        };
    }
    let cfg = ExactConfig::with_max_states(spec.max_states);
    let found = match layout {
        Some(l) => cfg
            .transfer_log_z(mrf, l)
            .and_then(|z| Ok((z, cfg.transfer_map(mrf, l)?.1)))
            .map(|r| ("transfer", r)),
        None => cfg
            .solve(mrf)
            .map(|s| ("brute", (s.log_z, s.map_energy)))
            .or_else(|_| cfg.eliminate(mrf).map(|s| ("elimination", (s.log_z, s.map_energy)))),
    };
    match found {
        Ok((kind, (z, h))) => Oracle {
            kind,
            log_z: Some(z),
            h_star: Some(h),
        },
        Err(_) => Oracle {
            kind: "infeasible",
            log_z: None,
            h_star: None,
        },
    }
}

fn decompose(
    graph: &Graph,
    layout: Option<&GridLayout>,
    family: &DecompFamily,
    param: usize,
    seed: u64,
) -> Result<EdgeDecomposition> {
    // cris-cross graphs are decomposed through their grid subgraph
    let lift = layout.filter(|l| l.criscross);
    let sub = lift.map(|l| GridLayout::grid(l.width, l.height).graph());
    let base = sub.as_ref().unwrap_or(graph);
    let d = match *family {
        DecompFamily::MinorE { r, .. } => minor_e(base, r, param, seed)?,
        DecompFamily::DbDim { eps, .. } => db_dim_edge(base, eps, param, seed)?,
        DecompFamily::Grid { .. } => {
            let l = layout.ok_or_else(|| Error::UnsupportedTopology("slab decomposition needs a lattice".into()))?;
            let mut r = rng::main_stream(seed);
            let (l1, l2) = (r.gen_range(0..param), r.gen_range(0..param));
            return grid_decomp_layout(l, param, l1, l2);
        }
        DecompFamily::None => EdgeDecomposition::none(base),
    };
    Ok(match lift {
        Some(_) => EdgeDecomposition::from_partition(graph, &d.components, d.params),
        None => d,
    })
}

fn within(lo: f64, x: f64, hi: f64, tol: f64) -> bool {
    let slack = tol * x.abs().max(1.0);
    lo <= x + slack && x <= hi + slack
}

/// Runs every `(α, parameter, trial)` cell. Each `(α, trial)` pair draws one
/// model that is shared by all parameter values, so parameter sweeps are
/// paired. Records come back ordered by `α`, then parameter, then trial.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Vec<TrialRecord>> {
    spec.validate()?;
    let graph = spec.topology.graph(spec.seed)?;
    let layout = spec.topology.layout();
    let n = graph.n();
    let params = spec.decomp.params();
    let cfg = ExactConfig::with_max_states(spec.max_states);
    let jobs: Vec<(usize, usize)> = (0..spec.alphas.len())
        .flat_map(|a| (0..spec.trials).map(move |t| (a, t)))
        .collect();
    let per_job: Vec<Vec<TrialRecord>> = jobs
        .par_iter()
        .map(|&(ai, trial)| {
            let alpha = spec.alphas[ai];
            let mut seeds = rng::stream(spec.seed, ai as u32, trial as u32);
            let model_seed: u64 = seeds.gen();
            let sample = sample_potentials(&graph, spec.mode, alpha, model_seed);
            let mrf = &sample.mrf;
            let orc = oracle(mrf, layout.as_ref(), spec);
            params
                .iter()
                .map(|&param| {
                    let decomp_seed: u64 = seeds.gen();
                    let start = Instant::now();
                    let d = decompose(&graph, layout.as_ref(), &spec.decomp, param, decomp_seed)?;
                    let (b, map) = solve_decomposed(mrf, &d, &cfg)?;
                    let wall_ms = start.elapsed().as_secs_f64() * 1e3;
                    let per = |x: f64| x / n as f64;
                    let gap_identity_ok =
                        ((b.log_z_ub - b.log_z_lb) - b.gap).abs() <= IDENTITY_TOL * b.log_z_ub.abs().max(1.0);
                    Ok(TrialRecord {
                        topology: spec.topology.label(),
                        nodes: n,
                        mode: spec.mode.name().into(),
                        alpha,
                        decomp: spec.decomp.name().into(),
                        param,
                        target_eps: d.params.target_eps(),
                        trial,
                        model_seed,
                        decomp_seed,
                        removed: d.removed_edges.len(),
                        max_component: d.max_component(),
                        lb: b.log_z_lb,
                        ub: b.log_z_ub,
                        gap: b.gap,
                        exact_log_z: orc.log_z,
                        h_hat: map.energy,
                        h_star: orc.h_star,
                        error_lb: orc.log_z.map(|z| per((b.log_z_lb - z).abs())),
                        error_ub: orc.log_z.map(|z| per((b.log_z_ub - z).abs())),
                        error_map: orc.h_star.map(|h| per(h - map.energy)),
                        gap_per_node: per(b.gap),
                        oracle: orc.kind.into(),
                        bracket_ok: orc.log_z.map(|z| within(b.log_z_lb, z, b.log_z_ub, BRACKET_TOL)),
                        sandwich_ok: orc
                            .h_star
                            .map(|h| within(h - map.guarantee_gap, map.energy, h, IDENTITY_TOL)),
                        gap_identity_ok,
                        wall_ms,
                    })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let mut out = Vec::with_capacity(jobs.len() * params.len());
    for cell in per_job.chunks(spec.trials) {
        for pi in 0..params.len() {
            out.extend(cell.iter().map(|job| job[pi].clone()));
        }
    }
    Ok(out)
}

/// Means over the trials of one `(α, parameter)` cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub alpha: f64,
    pub param: usize,
    pub trials: usize,
    pub mean_gap_per_node: f64,
    pub mean_error_lb: Option<f64>,
    pub mean_error_ub: Option<f64>,
    pub mean_error_map: Option<f64>,
    pub mean_max_component: f64,
    pub all_ok: bool,
}

fn mean_of(xs: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let v: Option<Vec<f64>> = xs.collect();
    v.filter(|v| !v.is_empty())
        .map(|v| v.iter().sum::<f64>() / v.len() as f64)
}

/// Groups consecutive records by `(α, param)` in first-seen order. Means are
/// summed in record order, so the result does not depend on scheduling.
pub fn summarize(records: &[TrialRecord]) -> Vec<CellSummary> {
    let mut keys: Vec<(f64, usize)> = Vec::new();
    for r in records {
        if !keys.iter().any(|&(a, p)| a == r.alpha && p == r.param) {
            keys.push((r.alpha, r.param));
        }
    }
    keys.into_iter()
        .map(|(alpha, param)| {
            let cell: Vec<&TrialRecord> = records
                .iter()
                .filter(|r| r.alpha == alpha && r.param == param)
                .collect();
            let k = cell.len() as f64;
            CellSummary {
                alpha,
                param,
                trials: cell.len(),
                mean_gap_per_node: cell.iter().map(|r| r.gap_per_node).sum::<f64>() / k,
                mean_error_lb: mean_of(cell.iter().map(|r| r.error_lb)),
                mean_error_ub: mean_of(cell.iter().map(|r| r.error_ub)),
                mean_error_map: mean_of(cell.iter().map(|r| r.error_map)),
                mean_max_component: cell.iter().map(|r| r.max_component as f64).sum::<f64>() / k,
                all_ok: cell.iter().all(|r| r.ok()),
            }
        })
        .collect()
}

fn csv_err(e: csv::Error) -> Error {
    if e.is_io_error() {
        return Error::Io(e.to_string());
    }
    Error::Parse {
        line: e.position().map_or(0, |p| p.line() as usize),
        msg: e.to_string(),
    }
}

/// Writes rows with a header line; column order is the field order.
pub fn write_csv<T: Serialize, W: Write>(rows: &[T], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_records_csv<R: Read>(input: R) -> Result<Vec<TrialRecord>> {
    csv::Reader::from_reader(input)
        .deserialize()
        .map(|r| r.map_err(csv_err))
        .collect()
}
