//! Exact inference by enumeration, variable elimination and row transfer
//! matrices.
//!
//! Every exhaustive routine checks its work against [`ExactConfig::max_states`]
//! first and refuses with [`Error::CapExceeded`] rather than truncating.
//! MAP ties are always broken towards the lexicographically smallest
//! assignment (node 0 most significant).

mod elim;

use crate::error::{Error, Result};
use crate::lattice::GridLayout;
use crate::mrf::{Assignment, PairwiseMrf};

/// Default enumeration budget, `2^24` assignments.
pub const DEFAULT_MAX_STATES: u128 = 1 << 24;

/// Components with at most this many joint states are always enumerated.
const SMALL_COMPONENT: u128 = 1 << 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExactConfig {
    /// Largest number of joint assignments (or transfer-matrix entries per
    /// row pair) an exhaustive routine may visit.
    pub max_states: u128,
}

impl Default for ExactConfig {
    fn default() -> Self {
        ExactConfig {
            max_states: DEFAULT_MAX_STATES,
        }
    }
}

/// Exact log-partition value and MAP of a model.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactResult {
    pub log_z: f64,
    pub map_assignment: Assignment,
    pub map_energy: f64,
}

/// Streaming log-sum-exp.
#[derive(Debug, Clone, Copy)]
pub(crate) struct LseAcc {
    max: f64,
    sum: f64,
}

impl LseAcc {
    pub(crate) fn new() -> Self {
        LseAcc {
            max: f64::NEG_INFINITY,
            sum: 0.0,
        }
    }

    pub(crate) fn add(&mut self, x: f64) {
        if x == f64::NEG_INFINITY {
            return;
        }
        if x > self.max {
            self.sum = self.sum * (self.max - x).exp() + 1.0;
            self.max = x;
        } else {
            self.sum += (x - self.max).exp();
        }
    }

    pub(crate) fn value(&self) -> f64 {
        if self.max == f64::NEG_INFINITY {
            self.max
        } else {
            self.max + self.sum.ln()
        }
    }
}

fn saturating_pow(base: u128, exp: usize) -> u128 {
    (0..exp).fold(1u128, |acc, _| acc.saturating_mul(base))
}

/// Depth-first enumeration in lexicographic order with incremental energies.
struct Enumerator<'a> {
    mrf: &'a PairwiseMrf,
    // for each v: (u, edge id) over neighbors u < v
    back: Vec<Vec<(usize, usize)>>,
}

impl<'a> Enumerator<'a> {
    fn new(mrf: &'a PairwiseMrf) -> Self {
        let g = mrf.graph();
        let back = (0..g.n())
            .map(|v| {
                g.neighbors(v)
                    .iter()
                    .zip(g.incident_edges(v))
                    .filter(|(&u, _)| u < v)
                    .map(|(&u, &e)| (u, e))
                    .collect()
            })
            .collect();
        Enumerator { mrf, back }
    }

    fn walk(&self, allowed: &[Option<usize>], visit: &mut dyn FnMut(&[usize], f64)) {
        let mut x = vec![0; self.mrf.n()];
        self.rec(0, 0.0, &mut x, allowed, visit);
    }

    fn rec(&self, v: usize, h: f64, x: &mut [usize], allowed: &[Option<usize>], visit: &mut dyn FnMut(&[usize], f64)) {
        if v == x.len() {
            visit(x, h);
            return;
        }
        let range = match allowed[v] {
            Some(s) => s..s + 1,
            None => 0..self.mrf.states(),
        };
        for s in range {
            x[v] = s;
            let mut hv = h + self.mrf.phi(v, s);
            for &(u, e) in &self.back[v] {
                hv += self.mrf.psi_edge(e, x[u], s);
            }
            self.rec(v + 1, hv, x, allowed, visit);
        }
    }
}

impl ExactConfig {
    pub fn with_max_states(max_states: u128) -> Self {
        ExactConfig { max_states }
    }

    fn check(&self, what: &str, needed: u128) -> Result<()> {
        if needed > self.max_states {
            return Err(Error::CapExceeded {
                what: what.to_string(),
                needed,
                cap: self.max_states,
            });
        }
        Ok(())
    }

    fn check_enum(&self, mrf: &PairwiseMrf, allowed: &[Option<usize>]) -> Result<()> {
        let free = allowed.iter().filter(|a| a.is_none()).count();
        self.check("exhaustive enumeration", saturating_pow(mrf.states() as u128, free))
    }

    /// Exact `log Z` and lexicographically smallest MAP in one pass.
    pub fn solve(&self, mrf: &PairwiseMrf) -> Result<ExactResult> {
        let allowed = vec![None; mrf.n()];
        self.check_enum(mrf, &allowed)?;
        let mut acc = LseAcc::new();
        let mut best = f64::NEG_INFINITY;
        let mut arg = vec![0; mrf.n()];
        Enumerator::new(mrf).walk(&allowed, &mut |x, h| {
            acc.add(h);
            if h > best {
                best = h;
                arg.copy_from_slice(x);
            }
        });
        let map_energy = mrf.energy(&arg);
        Ok(ExactResult {
            log_z: acc.value(),
            map_assignment: Assignment::from_vec_unchecked(arg),
            map_energy,
        })
    }

    pub fn log_z(&self, mrf: &PairwiseMrf) -> Result<f64> {
        let allowed = vec![None; mrf.n()];
        self.check_enum(mrf, &allowed)?;
        let mut acc = LseAcc::new();
        Enumerator::new(mrf).walk(&allowed, &mut |_, h| acc.add(h));
        Ok(acc.value())
    }

    pub fn map(&self, mrf: &PairwiseMrf) -> Result<(Assignment, f64)> {
        let r = self.solve(mrf)?;
        Ok((r.map_assignment, r.map_energy))
    }

    /// `(max H over x_v = 0, max H over x_v = 1)` among assignments agreeing
    /// with `evidence` (`Some(s)` clamps a node). A side with no consistent
    /// assignment is `-inf`.
    pub fn max_marginal_with(&self, mrf: &PairwiseMrf, v: usize, evidence: &[Option<usize>]) -> Result<[f64; 2]> {
        if mrf.states() != 2 {
            return Err(Error::NotBinary(mrf.states()));
        }
        if evidence.len() != mrf.n() || v >= mrf.n() {
            return Err(Error::InvalidModel("evidence length or node out of range".into()));
        }
        self.check_enum(mrf, evidence)?;
        let mut best = [f64::NEG_INFINITY; 2];
        Enumerator::new(mrf).walk(evidence, &mut |x, h| {
            let b = &mut best[x[v]];
            *b = b.max(h);
        });
        Ok(best)
    }

    pub fn max_marginal(&self, mrf: &PairwiseMrf, v: usize) -> Result<[f64; 2]> {
        self.max_marginal_with(mrf, v, &vec![None; mrf.n()])
    }

    /// Exact solution of the sub-model induced by `nodes`. The MAP assignment
    /// lists states for `nodes` in ascending node order.
    ///
    /// Small components are enumerated. Larger ones use
    /// [`ExactConfig::eliminate`] whenever its order is cheaper than
    /// enumeration or enumeration would exceed the budget.
    pub fn component_solve(&self, mrf: &PairwiseMrf, nodes: &[usize]) -> Result<ExactResult> {
        let (sub, _) = mrf.induced(nodes)?;
        let states = saturating_pow(mrf.states() as u128, nodes.len());
        if states <= SMALL_COMPONENT {
            return self.solve(&sub);
        }
        let plan = elim::plan(&sub);
        if states <= self.max_states && states <= plan.cost {
            self.solve(&sub)
        } else {
            self.eliminate_with(&sub, &plan)
        }
    }

    /// Exact `log Z` and a MAP by variable elimination along a greedy
    /// min-fill order. The budget bounds the total number of intermediate
    /// table entries. MAP ties go to the smallest state of each variable,
    /// decided in reverse elimination order, so the assignment can differ from
    /// the lexicographically smallest one when several maximizers exist.
    pub fn eliminate(&self, mrf: &PairwiseMrf) -> Result<ExactResult> {
        self.eliminate_with(mrf, &elim::plan(mrf))
    }

    fn eliminate_with(&self, mrf: &PairwiseMrf, plan: &elim::Plan) -> Result<ExactResult> {
        self.check("variable elimination", plan.cost)?;
        let log_z = elim::log_z(mrf, &plan.order);
        let x = elim::map(mrf, &plan.order);
        let map_energy = mrf.energy(&x);
        Ok(ExactResult {
            log_z,
            map_assignment: Assignment::from_vec_unchecked(x),
            map_energy,
        })
    }

    /// Exact `log Z` of a grid or cris-cross model by a row-by-row sweep.
    pub fn transfer_log_z(&self, mrf: &PairwiseMrf, layout: &GridLayout) -> Result<f64> {
        let tm = Transfer::new(self, mrf, layout)?;
        let rows = layout.height;
        let mut alpha: Vec<f64> = (0..tm.size).map(|s| tm.intra(0, s)).collect();
        let mut acc = vec![LseAcc::new(); tm.size];
        for y in 1..rows {
            acc.iter_mut().for_each(|a| *a = LseAcc::new());
            for (p, &ap) in alpha.iter().enumerate() {
                for (s, a) in acc.iter_mut().enumerate() {
                    a.add(ap + tm.between(y, p, s));
                }
            }
            alpha = (0..tm.size).map(|s| tm.intra(y, s) + acc[s].value()).collect();
        }
        let mut total = LseAcc::new();
        alpha.iter().for_each(|&a| total.add(a));
        Ok(total.value())
    }

    /// Exact lexicographically smallest MAP of a grid or cris-cross model.
    pub fn transfer_map(&self, mrf: &PairwiseMrf, layout: &GridLayout) -> Result<(Assignment, f64)> {
        let tm = Transfer::new(self, mrf, layout)?;
        let rows = layout.height;
        // beta[y][s]: best energy of rows y.. given row y in state s
        let mut beta = vec![Vec::new(); rows];
        beta[rows - 1] = (0..tm.size).map(|s| tm.intra(rows - 1, s)).collect();
        for y in (0..rows - 1).rev() {
            beta[y] = (0..tm.size)
                .map(|s| {
                    let best = (0..tm.size)
                        .map(|t| tm.between(y + 1, s, t) + beta[y + 1][t])
                        .fold(f64::NEG_INFINITY, f64::max);
                    tm.intra(y, s) + best
                })
                .collect();
        }
        let mut chosen = Vec::with_capacity(rows);
        chosen.push(argmax_first((0..tm.size).map(|s| beta[0][s])));
        for y in 1..rows {
            let p = chosen[y - 1];
            chosen.push(argmax_first((0..tm.size).map(|t| tm.between(y, p, t) + beta[y][t])));
        }
        let x: Vec<usize> = chosen.iter().flat_map(|&s| tm.digits(s)).collect();
        let h = mrf.energy(&x);
        Ok((Assignment::from_vec_unchecked(x), h))
    }
}

fn argmax_first(it: impl Iterator<Item = f64>) -> usize {
    let mut best = f64::NEG_INFINITY;
    let mut arg = 0;
    for (i, v) in it.enumerate() {
        if v > best {
            best = v;
            arg = i;
        }
    }
    arg
}

/// Row transfer structure. Row state `s` encodes `(x_0, ..., x_{w-1})` with
/// `x_0` as the most significant base-`q` digit, so numeric order on states
/// is lexicographic order on rows.
struct Transfer<'a> {
    mrf: &'a PairwiseMrf,
    layout: GridLayout,
    size: usize,
    digits: Vec<usize>,
    // edge ids by the coordinates of their lower endpoint's cell; usize::MAX
    // where absent
    horizontal: Vec<usize>,
    vertical: Vec<usize>,
    diagonal: Vec<usize>,
    anti: Vec<usize>,
}

impl<'a> Transfer<'a> {
    fn new(cfg: &ExactConfig, mrf: &'a PairwiseMrf, layout: &GridLayout) -> Result<Self> {
        layout.check(mrf.graph())?;
        if layout.n() == 0 {
            return Err(Error::UnsupportedTopology("empty lattice".into()));
        }
        let q = mrf.states();
        let w = layout.width;
        let size = saturating_pow(q as u128, w);
        cfg.check("transfer matrix", size.saturating_mul(size))?;
        let size = size as usize;
        let mut digits = vec![0; size * w];
        for s in 0..size {
            let mut r = s;
            for x in (0..w).rev() {
                digits[s * w + x] = r % q;
                r /= q;
            }
        }
        let g = mrf.graph();
        let id = |a: usize, b: usize| g.edge_id(a, b).unwrap_or(usize::MAX);
        let n = layout.n();
        let (mut horizontal, mut vertical) = (vec![usize::MAX; n], vec![usize::MAX; n]);
        let (mut diagonal, mut anti) = (vec![usize::MAX; n], vec![usize::MAX; n]);
        for y in 0..layout.height {
            for x in 0..w {
                let i = layout.id(x, y);
                if x + 1 < w {
                    horizontal[i] = id(i, layout.id(x + 1, y));
                }
                if y + 1 < layout.height {
                    vertical[i] = id(i, layout.id(x, y + 1));
                    if x + 1 < w && layout.criscross {
                        diagonal[i] = id(i, layout.id(x + 1, y + 1));
                        anti[i] = id(layout.id(x + 1, y), layout.id(x, y + 1));
                    }
                }
            }
        }
        Ok(Transfer {
            mrf,
            layout: *layout,
            size,
            digits,
            horizontal,
            vertical,
            diagonal,
            anti,
        })
    }

    fn digits(&self, s: usize) -> impl Iterator<Item = usize> + '_ {
        let w = self.layout.width;
        self.digits[s * w..(s + 1) * w].iter().copied()
    }

    fn row(&self, s: usize) -> &[usize] {
        let w = self.layout.width;
        &self.digits[s * w..(s + 1) * w]
    }

    /// Node and horizontal-edge energy of row `y` in state `s`.
    fn intra(&self, y: usize, s: usize) -> f64 {
        let l = &self.layout;
        let d = self.row(s);
        let mut h = 0.0;
        for (x, &dx) in d.iter().enumerate().take(l.width) {
            h += self.mrf.phi(l.id(x, y), dx);
        }
        for x in 0..l.width - 1 {
            h += self.mrf.psi_edge(self.horizontal[l.id(x, y)], d[x], d[x + 1]);
        }
        h
    }

    /// Energy of edges between row `y - 1` (state `p`) and row `y` (state `s`).
    fn between(&self, y: usize, p: usize, s: usize) -> f64 {
        let l = &self.layout;
        let (a, b) = (self.row(p), self.row(s));
        let mut h = 0.0;
        for x in 0..l.width {
            let i = l.id(x, y - 1);
            h += self.mrf.psi_edge(self.vertical[i], a[x], b[x]);
            if l.criscross && x + 1 < l.width {
                h += self.mrf.psi_edge(self.diagonal[i], a[x], b[x + 1]);
                h += self.mrf.psi_edge(self.anti[i], a[x + 1], b[x]);
            }
        }
        h
    }
}

/// `log Σ_x exp(H(x))` by enumeration, default cap.
pub fn brute_log_z(mrf: &PairwiseMrf) -> Result<f64> {
    ExactConfig::default().log_z(mrf)
}

/// Lexicographically smallest maximizer of `H` and its energy, default cap.
pub fn brute_map(mrf: &PairwiseMrf) -> Result<(Assignment, f64)> {
    ExactConfig::default().map(mrf)
}

/// Max-marginals of a binary model at `v` in energy form, default cap.
pub fn brute_max_marginal(mrf: &PairwiseMrf, v: usize) -> Result<[f64; 2]> {
    ExactConfig::default().max_marginal(mrf, v)
}

/// Exact solution of the sub-model induced by `nodes`, default cap.
pub fn component_solve(mrf: &PairwiseMrf, nodes: &[usize]) -> Result<ExactResult> {
    ExactConfig::default().component_solve(mrf, nodes)
}

pub fn grid_transfer_log_z(mrf: &PairwiseMrf, layout: &GridLayout) -> Result<f64> {
    ExactConfig::default().transfer_log_z(mrf, layout)
}

pub fn grid_transfer_map(mrf: &PairwiseMrf, layout: &GridLayout) -> Result<(Assignment, f64)> {
    ExactConfig::default().transfer_map(mrf, layout)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;
    use crate::rng;
    use rand::Rng as _;

    fn single(phi: [f64; 2]) -> PairwiseMrf {
        PairwiseMrf::new(Graph::empty(1), 2, vec![phi.to_vec()], vec![]).unwrap()
    }

    fn pair(psi11: f64) -> PairwiseMrf {
        PairwiseMrf::from_edge_list(2, 2, vec![vec![0.0; 2]; 2], vec![(0, 1, vec![0.0, 0.0, 0.0, psi11])]).unwrap()
    }

    pub(crate) fn random_on(graph: Graph, q: usize, seed: u64) -> PairwiseMrf {
        let mut r = rng::main_stream(seed);
        let nodes = (0..graph.n())
            .map(|_| (0..q).map(|_| r.gen_range(0.0..1.0)).collect())
            .collect();
        let edges = (0..graph.num_edges())
            .map(|_| (0..q * q).map(|_| r.gen_range(0.0..1.0)).collect())
            .collect();
        PairwiseMrf::new(graph, q, nodes, edges).unwrap()
    }

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * a.abs().max(b.abs()).max(1.0)
    }

    #[test]
    fn tiny_log_z() {
        assert!(close(brute_log_z(&single([0.0, 0.0])).unwrap(), 2f64.ln(), 1e-15));
        assert!(close(
            brute_log_z(&single([0.0, 1.0])).unwrap(),
            (1.0 + 1f64.exp()).ln(),
            1e-15
        ));
        assert!(close(brute_log_z(&pair(1.0)).unwrap(), (3.0 + 1f64.exp()).ln(), 1e-15));
    }

    #[test]
    fn tiny_map() {
        let (x, h) = brute_map(&single([0.0, 2.0])).unwrap();
        assert_eq!((x.to_vec(), h), (vec![1], 2.0));
        let flat = random_on(Graph::new(3, [(0, 1), (1, 2)]).unwrap(), 2, 0);
        let zero = PairwiseMrf::new(flat.graph().clone(), 2, vec![vec![0.0; 2]; 3], vec![vec![0.0; 4]; 2]).unwrap();
        let (x, h) = brute_map(&zero).unwrap();
        assert_eq!((x.to_vec(), h), (vec![0, 0, 0], 0.0));
    }

    #[test]
    fn max_marginals() {
        assert_eq!(brute_max_marginal(&single([0.0, 0.0]), 0).unwrap(), [0.0, 0.0]);
        assert_eq!(brute_max_marginal(&pair(2.0), 0).unwrap(), [0.0, 2.0]);
        let tri = random_on(Graph::new(3, [(0, 1), (1, 2), (0, 2)]).unwrap(), 2, 4);
        let (_, h) = brute_map(&tri).unwrap();
        let mm = brute_max_marginal(&tri, 1).unwrap();
        assert_eq!(mm[0].max(mm[1]), h);
        let three = random_on(Graph::empty(2), 3, 1);
        assert_eq!(brute_max_marginal(&three, 0), Err(Error::NotBinary(3)));
    }

    #[test]
    fn evidence_clamps() {
        let m = pair(2.0);
        let mm = ExactConfig::default()
            .max_marginal_with(&m, 0, &[None, Some(0)])
            .unwrap();
        assert_eq!(mm, [0.0, 0.0]);
        let mm = ExactConfig::default()
            .max_marginal_with(&m, 0, &[Some(1), None])
            .unwrap();
        assert_eq!(mm, [f64::NEG_INFINITY, 2.0]);
    }

    #[test]
    fn map_matches_reverse_enumeration() {
        let g = crate::lattice::gen_grid(3);
        for seed in 0..5 {
            let m = random_on(g.clone(), 2, seed);
            let (x, h) = brute_map(&m).unwrap();
            // independent oracle: scan assignments from the largest index down,
            // keeping ties, so the last kept is the lexicographically smallest
            let mut best = (f64::NEG_INFINITY, vec![]);
            for idx in (0..1usize << 9).rev() {
                let y: Vec<usize> = (0..9).map(|v| (idx >> (8 - v)) & 1).collect();
                let e = m.energy(&y);
                if e >= best.0 {
                    best = (e, y);
                }
            }
            assert_eq!(h, best.0);
            assert_eq!(x.to_vec(), best.1);
        }
    }

    #[test]
    fn cap_refusal() {
        let m = random_on(Graph::empty(5), 2, 0);
        let cfg = ExactConfig::with_max_states(16);
        assert!(matches!(cfg.log_z(&m), Err(Error::CapExceeded { needed: 32, .. })));
        assert!(cfg.component_solve(&m, &[0, 1, 2, 3]).is_ok());
    }

    #[test]
    fn component_solve_singleton_and_pair() {
        let m = random_on(Graph::new(3, [(0, 1), (1, 2)]).unwrap(), 2, 9);
        let r = component_solve(&m, &[2]).unwrap();
        let t = m.phi_table(2);
        assert!(close(r.log_z, crate::mrf::log_sum_exp(t), 1e-15));
        assert_eq!(r.map_assignment.to_vec(), vec![usize::from(t[1] > t[0])]);
        let (sub, _) = m.induced(&[0, 1]).unwrap();
        let r = component_solve(&m, &[0, 1]).unwrap();
        assert_eq!(r.log_z, brute_log_z(&sub).unwrap());
        assert!(r.log_z >= r.map_energy);
    }

    #[test]
    fn transfer_matches_brute() {
        for (w, h) in [(2, 2), (3, 2), (2, 3), (4, 4), (1, 3)] {
            for cc in [false, true] {
                let layout = GridLayout {
                    width: w,
                    height: h,
                    criscross: cc,
                };
                for seed in 0..3 {
                    let m = random_on(layout.graph(), 2, seed);
                    let exact = ExactConfig::default().solve(&m).unwrap();
                    let lz = grid_transfer_log_z(&m, &layout).unwrap();
                    assert!(close(lz, exact.log_z, 1e-12), "{w}x{h} {cc}: {lz} vs {}", exact.log_z);
                    let (x, e) = grid_transfer_map(&m, &layout).unwrap();
                    assert_eq!(x, exact.map_assignment);
                    assert_eq!(e, exact.map_energy);
                }
            }
        }
    }

    #[test]
    fn transfer_ternary() {
        let layout = GridLayout::criscross(3, 3);
        let m = random_on(layout.graph(), 3, 2);
        let lz = grid_transfer_log_z(&m, &layout).unwrap();
        assert!(close(lz, brute_log_z(&m).unwrap(), 1e-12));
    }

    #[test]
    fn transfer_independent_nodes() {
        let layout = GridLayout::grid(4, 4);
        let mut m = random_on(layout.graph(), 2, 5);
        m = PairwiseMrf::new(
            m.graph().clone(),
            2,
            (0..16).map(|v| m.phi_table(v).to_vec()).collect(),
            vec![vec![0.0; 4]; 24],
        )
        .unwrap();
        let expect: f64 = (0..16).map(|v| crate::mrf::log_sum_exp(m.phi_table(v))).sum();
        assert!(close(grid_transfer_log_z(&m, &layout).unwrap(), expect, 1e-12));
    }

    #[test]
    fn transfer_rejects_other_graphs() {
        let m = random_on(Graph::new(4, [(0, 1), (1, 2), (2, 3)]).unwrap(), 2, 0);
        assert!(matches!(
            grid_transfer_log_z(&m, &GridLayout::grid(2, 2)),
            Err(Error::UnsupportedTopology(_))
        ));
    }

    #[test]
    fn elimination_matches_enumeration() {
        let mut r = rng::main_stream(91);
        for seed in 0..40u64 {
            let n = r.gen_range(1..10);
            let q = r.gen_range(2..4);
            let mut edges = Vec::new();
            for u in 0..n {
                for v in u + 1..n {
                    if r.gen_bool(0.4) {
                        edges.push((u, v));
                    }
                }
            }
            let mrf = random_on(Graph::new(n, edges).unwrap(), q, seed);
            let cfg = ExactConfig::default();
            let e = cfg.eliminate(&mrf).unwrap();
            let (_, h) = brute_map(&mrf).unwrap();
            assert!(close(e.log_z, brute_log_z(&mrf).unwrap(), 1e-12));
            assert!(close(e.map_energy, h, 1e-12));
        }
    }

    #[test]
    fn component_solve_falls_back_to_elimination() {
        let g = GridLayout::grid(6, 6).graph();
        let mrf = random_on(g, 2, 3);
        let cfg = ExactConfig { max_states: 1 << 12 };
        let all: Vec<usize> = (0..36).collect();
        let r = cfg.component_solve(&mrf, &all).unwrap();
        let z = ExactConfig::default()
            .transfer_log_z(&mrf, &GridLayout::grid(6, 6))
            .unwrap();
        assert!(close(r.log_z, z, 1e-12));
        let (_, h) = ExactConfig::default()
            .transfer_map(&mrf, &GridLayout::grid(6, 6))
            .unwrap();
        assert!(close(r.map_energy, h, 1e-12));
        let tight = ExactConfig { max_states: 16 };
        assert!(tight.component_solve(&mrf, &all).is_err());
    }
}
