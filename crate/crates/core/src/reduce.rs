//! MAP on discrete factor models through maximum-weight independent set.
//!
//! A factor model scores `y` by `Σ_α θ_α(y_α)`. The conflict graph has one
//! node per factor and local assignment, weighted `c + θ_α(y_α)`, with an edge
//! between any two nodes that disagree on a shared variable. Maximal
//! independent sets are exactly the global assignments, so an MWIS is a MAP.
//! The conflict graph can in turn be written as a binary pairwise model whose
//! MAP is the MWIS.
//!
//! Factor-model text format:
//!
//! ```text
//! factors <nvars> <dom_1> ... <dom_nvars>
//! factor <arity> <var_1> ... <var_arity> <table>
//! ```
//!
//! Tables are row-major over the listed variables, the first one most
//! significant.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::format::{fmt_f64, parse_floats, parse_num, perr};
use crate::graph::Graph;
use crate::mrf::PairwiseMrf;

/// Default limit on conflict-graph nodes.
pub const DEFAULT_MAX_MWIS_NODES: usize = 4096;

#[derive(Debug, Clone, PartialEq)]
pub struct Factor {
    pub vars: Vec<usize>,
    pub table: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FactorModel {
    domains: Vec<usize>,
    factors: Vec<Factor>,
}

/// Local assignments of a factor in row-major order.
fn local_assignments(doms: &[usize]) -> impl Iterator<Item = Vec<usize>> + '_ {
    let total: usize = doms.iter().product();
    (0..total).map(move |mut i| {
        let mut y = vec![0; doms.len()];
        for k in (0..doms.len()).rev() {
            y[k] = i % doms[k];
            i /= doms[k];
        }
        y
    })
}

impl FactorModel {
    pub fn new(domains: Vec<usize>, factors: Vec<Factor>) -> Result<Self> {
        if let Some(i) = domains.iter().position(|&d| d == 0) {
            return Err(Error::InvalidModel(format!("variable {i} has an empty domain")));
        }
        let mut covered = vec![false; domains.len()];
        for (a, f) in factors.iter().enumerate() {
            if f.vars.is_empty() {
                return Err(Error::InvalidModel(format!("factor {a} has no variables")));
            }
            for (i, &v) in f.vars.iter().enumerate() {
                if v >= domains.len() || f.vars[..i].contains(&v) {
                    return Err(Error::InvalidModel(format!(
                        "factor {a} has an invalid or repeated variable {v}"
                    )));
                }
                covered[v] = true;
            }
            let size: usize = f.vars.iter().map(|&v| domains[v]).product();
            if f.table.len() != size {
                return Err(Error::InvalidModel(format!(
                    "factor {a} table has {} entries, expected {size}",
                    f.table.len()
                )));
            }
            if let Some(&value) = f.table.iter().find(|x| !x.is_finite()) {
                return Err(Error::NonFinite {
                    location: format!("factor {a}"),
                    value,
                });
            }
        }
        if let Some(v) = covered.iter().position(|c| !c) {
            return Err(Error::InvalidModel(format!("variable {v} is in no factor")));
        }
        Ok(FactorModel { domains, factors })
    }

    pub fn domains(&self) -> &[usize] {
        &self.domains
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    fn factor_domains(&self, a: usize) -> Vec<usize> {
        self.factors[a].vars.iter().map(|&v| self.domains[v]).collect()
    }

    fn table_index(&self, a: usize, y: &[usize]) -> usize {
        self.factors[a]
            .vars
            .iter()
            .fold(0, |acc, &v| acc * self.domains[v] + y[v])
    }

    /// `Σ_α θ_α(y_α)`.
    pub fn score(&self, y: &[usize]) -> f64 {
        (0..self.factors.len())
            .map(|a| self.factors[a].table[self.table_index(a, y)])
            .sum()
    }

    /// Lexicographically smallest maximizer of the score and its value, by
    /// enumeration of at most `max_states` assignments.
    pub fn brute_map(&self, max_states: u128) -> Result<(Vec<usize>, f64)> {
        let total = self.domains.iter().fold(1u128, |acc, &d| acc.saturating_mul(d as u128));
        if total > max_states {
            return Err(Error::CapExceeded {
                what: "factor model enumeration".into(),
                needed: total,
                cap: max_states,
            });
        }
        let mut best = (Vec::new(), f64::NEG_INFINITY);
        for y in local_assignments(&self.domains) {
            let s = self.score(&y);
            if s > best.1 {
                best = (y, s);
            }
        }
        Ok(best)
    }
}

pub fn write_factor_model(model: &FactorModel) -> String {
    let mut out = String::new();
    write!(out, "factors {}", model.domains.len()).unwrap();
    for d in &model.domains {
        write!(out, " {d}").unwrap();
    }
    out.push('\n');
    for f in &model.factors {
        write!(out, "factor {}", f.vars.len()).unwrap();
        for v in &f.vars {
            write!(out, " {v}").unwrap();
        }
        for &x in &f.table {
            write!(out, " {}", fmt_f64(x)).unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn read_factor_model(text: &str) -> Result<FactorModel> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());
    let (hl, header) = lines.next().ok_or_else(|| perr(0, "empty input"))?;
    let h: Vec<&str> = header.split_whitespace().collect();
    if h.len() < 2 || h[0] != "factors" {
        return Err(perr(hl, "expected `factors <nvars> <domains>`"));
    }
    let nvars: usize = parse_num(h[1], hl)?;
    if h.len() != 2 + nvars {
        return Err(perr(hl, &format!("expected {nvars} domain sizes")));
    }
    let domains = h[2..]
        .iter()
        .map(|s| parse_num(s, hl))
        .collect::<Result<Vec<usize>>>()?;
    let mut factors = Vec::new();
    for (ln, l) in lines {
        let t: Vec<&str> = l.split_whitespace().collect();
        if t.len() < 2 || t[0] != "factor" {
            return Err(perr(ln, "expected a `factor` line"));
        }
        let arity: usize = parse_num(t[1], ln)?;
        if t.len() < 2 + arity {
            return Err(perr(ln, "missing variable ids"));
        }
        let vars = t[2..2 + arity]
            .iter()
            .map(|s| parse_num(s, ln))
            .collect::<Result<Vec<usize>>>()?;
        let table = parse_floats(&t[2 + arity..], ln)?;
        factors.push(Factor { vars, table });
    }
    FactorModel::new(domains, factors)
}

/// Conflict graph of a factor model with positive node weights.
#[derive(Debug, Clone, PartialEq)]
pub struct MwisInstance {
    pub graph: Graph,
    pub weights: Vec<f64>,
    /// `(factor index, local assignment)` per node.
    pub labels: Vec<(usize, Vec<usize>)>,
    /// The constant added to every table entry.
    pub c: f64,
    num_vars: usize,
    factor_vars: Vec<Vec<usize>>,
}

impl MwisInstance {
    /// Node of factor `a` with local assignment `y_a`.
    pub fn node_of(&self, a: usize, local: &[usize]) -> Option<usize> {
        self.labels.iter().position(|(f, y)| *f == a && y == local)
    }

    /// The node set `{δ(α, y_α)}` of a full assignment `y`.
    pub fn nodes_of_assignment(&self, y: &[usize]) -> Vec<usize> {
        self.factor_vars
            .iter()
            .enumerate()
            .map(|(a, vars)| {
                let local: Vec<usize> = vars.iter().map(|&v| y[v]).collect();
                self.node_of(a, &local).expect("every local assignment has a node")
            })
            .collect()
    }

    pub fn weight_of(&self, nodes: &[usize]) -> f64 {
        nodes.iter().map(|&v| self.weights[v]).sum()
    }
}

/// Builds the conflict graph with `c = 1 + max(0, -min θ)`, so every weight
/// is at least 1.
pub fn factor_to_mwis(model: &FactorModel) -> Result<MwisInstance> {
    factor_to_mwis_with(model, DEFAULT_MAX_MWIS_NODES)
}

pub fn factor_to_mwis_with(model: &FactorModel, max_nodes: usize) -> Result<MwisInstance> {
    let needed: u128 = (0..model.factors.len())
        .map(|a| {
            model
                .factor_domains(a)
                .iter()
                .fold(1u128, |acc, &d| acc.saturating_mul(d as u128))
        })
        .fold(0u128, u128::saturating_add);
    if needed > max_nodes as u128 {
        return Err(Error::CapExceeded {
            what: "conflict graph construction".into(),
            needed,
            cap: max_nodes as u128,
        });
    }
    let min = model
        .factors
        .iter()
        .flat_map(|f| f.table.iter().copied())
        .fold(f64::INFINITY, f64::min);
    let c = 1.0 + (-min).max(0.0);
    let mut labels = Vec::new();
    let mut weights = Vec::new();
    for (a, f) in model.factors.iter().enumerate() {
        for (i, y) in local_assignments(&model.factor_domains(a)).enumerate() {
            weights.push(c + f.table[i]);
            labels.push((a, y));
        }
    }
    let value = |node: usize, var: usize| {
        let (a, y) = &labels[node];
        model.factors[*a].vars.iter().position(|&v| v == var).map(|k| y[k])
    };
    let mut edges = Vec::new();
    for i in 0..labels.len() {
        for j in i + 1..labels.len() {
            let conflict = model.factors[labels[i].0]
                .vars
                .iter()
                .any(|&v| matches!((value(i, v), value(j, v)), (Some(a), Some(b)) if a != b));
            if conflict {
                edges.push((i, j));
            }
        }
    }
    Ok(MwisInstance {
        graph: Graph::new(labels.len(), edges)?,
        weights,
        labels,
        c,
        num_vars: model.domains.len(),
        factor_vars: model.factors.iter().map(|f| f.vars.clone()).collect(),
    })
}

/// Reads the global assignment off a selection holding exactly one node per
/// factor, pairwise non-adjacent.
pub fn mwis_to_assignment(inst: &MwisInstance, chosen: &[usize]) -> Result<Vec<usize>> {
    let mut per_factor = vec![None; inst.factor_vars.len()];
    for (i, &v) in chosen.iter().enumerate() {
        if v >= inst.labels.len() {
            return Err(Error::InvalidSelection(format!("node {v} out of range")));
        }
        if let Some(&u) = chosen[..i].iter().find(|&&u| inst.graph.has_edge(u, v) || u == v) {
            return Err(Error::InvalidSelection(format!(
                "nodes {u} and {v} are not independent"
            )));
        }
        let a = inst.labels[v].0;
        if per_factor[a].replace(v).is_some() {
            return Err(Error::InvalidSelection(format!("factor {a} selected twice")));
        }
    }
    let mut y = vec![None; inst.num_vars];
    for (a, node) in per_factor.iter().enumerate() {
        let node = node.ok_or_else(|| Error::InvalidSelection(format!("factor {a} has no node")))?;
        for (k, &var) in inst.factor_vars[a].iter().enumerate() {
            y[var] = Some(inst.labels[node].1[k]);
        }
    }
    Ok(y.into_iter().map(|s| s.expect("every variable is covered")).collect())
}

/// Binary model whose MAP is a maximum-weight independent set:
/// `φ_v = (0, w_v)` and `ψ = (M, M, M, 0)` on every edge, `M = 1 + Σ w`.
/// Only the MAP is meaningful; the partition function is not the hard-core one.
pub fn mwis_as_binary_mrf(graph: &Graph, weights: &[f64]) -> Result<PairwiseMrf> {
    if weights.len() != graph.n() {
        return Err(Error::InvalidModel("one weight per node required".into()));
    }
    let big = 1.0 + weights.iter().sum::<f64>();
    PairwiseMrf::new(
        graph.clone(),
        2,
        weights.iter().map(|&w| vec![0.0, w]).collect(),
        vec![vec![big, big, big, 0.0]; graph.num_edges()],
    )
}

/// Maximum-weight independent set by branch and bound on bitsets (at most
/// 128 nodes, non-negative weights). Returns the sorted set and its weight.
pub fn brute_mwis(graph: &Graph, weights: &[f64]) -> Result<(Vec<usize>, f64)> {
    let n = graph.n();
    if n > 128 {
        return Err(Error::CapExceeded {
            what: "bitset independent-set search".into(),
            needed: n as u128,
            cap: 128,
        });
    }
    if weights.iter().any(|&w| w.is_nan() || w < 0.0) {
        return Err(Error::InvalidModel("weights must be non-negative".into()));
    }
    let closed: Vec<u128> = (0..n)
        .map(|v| graph.neighbors(v).iter().fold(1u128 << v, |m, &u| m | 1u128 << u))
        .collect();
    let all = if n == 128 { u128::MAX } else { (1u128 << n) - 1 };
    let mut search = Mwis {
        weights,
        closed: &closed,
        best: 0,
        best_weight: f64::NEG_INFINITY,
    };
    search.run(all, 0, 0.0);
    let set = (0..n).filter(|&v| search.best >> v & 1 == 1).collect();
    Ok((set, search.best_weight))
}

struct Mwis<'a> {
    weights: &'a [f64],
    closed: &'a [u128],
    best: u128,
    best_weight: f64,
}

impl Mwis<'_> {
    fn mass(&self, mut set: u128) -> f64 {
        let mut s = 0.0;
        while set != 0 {
            s += self.weights[set.trailing_zeros() as usize];
            set &= set - 1;
        }
        s
    }

    fn run(&mut self, cand: u128, chosen: u128, w: f64) {
        if cand == 0 {
            if w > self.best_weight {
                self.best_weight = w;
                self.best = chosen;
            }
            return;
        }
        if w + self.mass(cand) <= self.best_weight {
            return;
        }
        let v = cand.trailing_zeros() as usize;
        self.run(cand & !self.closed[v], chosen | 1u128 << v, w + self.weights[v]);
        self.run(cand & !(1u128 << v), chosen, w);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::brute_map;

    fn example(t1: f64, t2: f64, t12: f64) -> FactorModel {
        FactorModel::new(
            vec![2, 2],
            vec![
                Factor {
                    vars: vec![0],
                    table: vec![0.0, t1],
                },
                Factor {
                    vars: vec![1],
                    table: vec![0.0, t2],
                },
                Factor {
                    vars: vec![0, 1],
                    table: vec![0.0, 0.0, 0.0, t12],
                },
            ],
        )
        .unwrap()
    }

    #[test]
    fn two_variable_example() {
        let inst = factor_to_mwis(&example(0.5, 1.5, 0.25)).unwrap();
        assert_eq!(inst.graph.n(), 8);
        assert_eq!(inst.c, 1.0);
        let one_left = inst.node_of(0, &[1]).unwrap();
        let one_right = inst.node_of(1, &[1]).unwrap();
        let both = inst.node_of(2, &[1, 1]).unwrap();
        assert_eq!(inst.weights[one_left], 1.5);
        assert_eq!(inst.weights[one_right], 2.5);
        assert_eq!(inst.weights[both], 1.25);
        let rest = inst.weights.iter().filter(|&&w| w == 1.0).count();
        assert_eq!(rest, 5);
        // factor cliques 1 + 1 + 6, plus each unary node against the two pair
        // nodes that disagree with it: 4 * 2
        assert_eq!(inst.graph.num_edges(), 16);
        let (set, _) = brute_mwis(&inst.graph, &inst.weights).unwrap();
        let mut expect = vec![one_left, one_right, both];
        expect.sort();
        assert_eq!(set, expect);
        assert_eq!(mwis_to_assignment(&inst, &set).unwrap(), vec![1, 1]);
    }

    #[test]
    fn negative_tables_shift_c() {
        let inst = factor_to_mwis(&example(-2.0, 1.0, 0.0)).unwrap();
        assert_eq!(inst.c, 3.0);
        assert!(inst.weights.iter().all(|&w| w >= 1.0));
    }

    #[test]
    fn unary_factor() {
        let m = FactorModel::new(
            vec![2],
            vec![Factor {
                vars: vec![0],
                table: vec![0.3, 0.1],
            }],
        )
        .unwrap();
        let inst = factor_to_mwis(&m).unwrap();
        assert_eq!((inst.graph.n(), inst.graph.num_edges()), (2, 1));
    }

    #[test]
    fn bad_selections() {
        let inst = factor_to_mwis(&example(1.0, 1.0, 1.0)).unwrap();
        let a = inst.node_of(0, &[1]).unwrap();
        let b = inst.node_of(1, &[1]).unwrap();
        assert!(matches!(
            mwis_to_assignment(&inst, &[a, b]),
            Err(Error::InvalidSelection(_))
        ));
        let c = inst.node_of(2, &[0, 1]).unwrap();
        assert!(mwis_to_assignment(&inst, &[a, b, c]).is_err());
    }

    #[test]
    fn binary_encoding() {
        let g = Graph::new(2, [(0, 1)]).unwrap();
        let m = mwis_as_binary_mrf(&g, &[3.0, 5.0]).unwrap();
        assert_eq!(brute_map(&m).unwrap().0.to_vec(), vec![0, 1]);
        let e = Graph::empty(3);
        let m = mwis_as_binary_mrf(&e, &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(brute_map(&m).unwrap().0.to_vec(), vec![1, 1, 1]);
    }

    #[test]
    fn text_round_trip() {
        let m = example(0.1, -0.7, 2.0);
        assert_eq!(read_factor_model(&write_factor_model(&m)).unwrap(), m);
        assert!(read_factor_model("factors 1 2\nfactor 1 0 0.5\n").is_err());
    }
}
