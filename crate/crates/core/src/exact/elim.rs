//! Variable elimination along a greedy min-fill order.

use std::collections::BTreeSet;

use super::{saturating_pow, LseAcc};
use crate::mrf::PairwiseMrf;

/// Elimination order and the number of table entries it touches.
pub(crate) struct Plan {
    pub(crate) order: Vec<usize>,
    pub(crate) cost: u128,
}

/// Repeatedly removes the node adding the fewest fill edges, breaking ties by
/// degree and then by id.
pub(crate) fn plan(mrf: &PairwiseMrf) -> Plan {
    let g = mrf.graph();
    let q = mrf.states() as u128;
    let mut adj: Vec<BTreeSet<usize>> = (0..g.n()).map(|v| g.neighbors(v).iter().copied().collect()).collect();
    let mut alive: BTreeSet<usize> = (0..g.n()).collect();
    let mut order = Vec::with_capacity(g.n());
    let mut cost = 0u128;
    let fill = |adj: &[BTreeSet<usize>], v: usize| -> usize {
        let nb: Vec<usize> = adj[v].iter().copied().collect();
        let mut missing = 0;
        for (i, &a) in nb.iter().enumerate() {
            missing += nb[i + 1..].iter().filter(|&&b| !adj[a].contains(&b)).count();
        }
        missing
    };
    while let Some(v) = alive.iter().copied().min_by_key(|&v| (fill(&adj, v), adj[v].len(), v)) {
        let nb: Vec<usize> = adj[v].iter().copied().collect();
        cost = cost.saturating_add(saturating_pow(q, nb.len() + 1));
        for &a in &nb {
            adj[a].remove(&v);
            for &b in &nb {
                if a != b {
                    adj[a].insert(b);
                }
            }
        }
        adj[v].clear();
        alive.remove(&v);
        order.push(v);
    }
    Plan { order, cost }
}

/// Log-domain table over ascending `vars`, row-major with `vars[0]` most
/// significant.
struct Table {
    vars: Vec<usize>,
    vals: Vec<f64>,
}

fn initial_tables(mrf: &PairwiseMrf) -> Vec<Table> {
    let mut t: Vec<Table> = (0..mrf.n())
        .map(|v| Table {
            vars: vec![v],
            vals: mrf.phi_table(v).to_vec(),
        })
        .collect();
    for (e, &(u, v)) in mrf.graph().edges().iter().enumerate() {
        t.push(Table {
            vars: vec![u, v],
            vals: mrf.psi_table(e).to_vec(),
        });
    }
    t
}

/// Eliminated variable, the scope it was eliminated over, and its best state
/// for every scope assignment.
struct Trace {
    var: usize,
    scope: Vec<usize>,
    best: Vec<usize>,
}

/// Sums (`max == false`) or maximizes out every variable in `order`. Returns
/// the resulting constant and, when maximizing, the traceback.
fn run(mrf: &PairwiseMrf, order: &[usize], max: bool) -> (f64, Vec<Trace>) {
    let q = mrf.states();
    let mut tables = initial_tables(mrf);
    let mut traces = Vec::new();
    for &v in order {
        let (hit, rest): (Vec<Table>, Vec<Table>) = tables.into_iter().partition(|t| t.vars.contains(&v));
        tables = rest;
        let scope: Vec<usize> = hit
            .iter()
            .flat_map(|t| t.vars.iter().copied())
            .filter(|&u| u != v)
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        // stride of each scope position and of v inside every factor
        let strides: Vec<(Vec<usize>, usize)> = hit
            .iter()
            .map(|t| {
                let stride = |u: usize| {
                    t.vars
                        .iter()
                        .position(|&w| w == u)
                        .map_or(0, |p| q.pow((t.vars.len() - 1 - p) as u32))
                };
                (scope.iter().map(|&u| stride(u)).collect(), stride(v))
            })
            .collect();
        let size = q.pow(scope.len() as u32);
        let mut vals = Vec::with_capacity(size);
        let mut best = Vec::with_capacity(if max { size } else { 0 });
        let mut digits = vec![0usize; scope.len()];
        for i in 0..size {
            let mut rem = i;
            for d in digits.iter_mut().rev() {
                *d = rem % q;
                rem /= q;
            }
            let base: Vec<usize> = strides
                .iter()
                .map(|(s, _)| s.iter().zip(&digits).map(|(a, b)| a * b).sum())
                .collect();
            let term = |s: usize| -> f64 {
                hit.iter()
                    .zip(&strides)
                    .zip(&base)
                    .map(|((t, (_, sv)), b)| t.vals[b + s * sv])
                    .sum()
            };
            if max {
                let (mut arg, mut top) = (0, f64::NEG_INFINITY);
                for s in 0..q {
                    let h = term(s);
                    if h > top {
                        (arg, top) = (s, h);
                    }
                }
                vals.push(top);
                best.push(arg);
            } else {
                let mut acc = LseAcc::new();
                (0..q).for_each(|s| acc.add(term(s)));
                vals.push(acc.value());
            }
        }
        if max {
            traces.push(Trace {
                var: v,
                scope: scope.clone(),
                best,
            });
        }
        tables.push(Table { vars: scope, vals });
    }
    let constant = tables.iter().map(|t| t.vals[0]).sum();
    (constant, traces)
}

pub(crate) fn log_z(mrf: &PairwiseMrf, order: &[usize]) -> f64 {
    run(mrf, order, false).0
}

/// A MAP assignment. Ties go to the smallest state of each variable, decided
/// in reverse elimination order.
pub(crate) fn map(mrf: &PairwiseMrf, order: &[usize]) -> Vec<usize> {
    let q = mrf.states();
    let (_, traces) = run(mrf, order, true);
    let mut x = vec![0; mrf.n()];
    for t in traces.iter().rev() {
        let idx = t.scope.iter().fold(0, |acc, &u| acc * q + x[u]);
        x[t.var] = t.best[idx];
    }
    x
}
