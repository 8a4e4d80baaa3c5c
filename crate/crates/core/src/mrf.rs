//! Pairwise Markov random fields over a finite alphabet.
//!
//! A model assigns each node `v` a table `phi_v` over states `0..q` and each
//! edge `(u, v)` a table `psi_uv` over state pairs. The distribution is
//! `Pr[x] ∝ exp(H(x))` with energy
//! `H(x) = Σ_v phi_v(x_v) + Σ_(u,v) psi_uv(x_u, x_v)`.
//! Edge tables are stored once per edge, row-major in `(x_u, x_v)` with `u < v`.

use std::ops::Deref;

use crate::error::{Error, Result};
use crate::graph::Graph;

#[derive(Debug, Clone, PartialEq)]
pub struct PairwiseMrf {
    graph: Graph,
    states: usize,
    node: Vec<f64>,
    edge: Vec<f64>,
    edge_min: Vec<f64>,
    edge_max: Vec<f64>,
}

/// A model after [`PairwiseMrf::affine_shift`], with the total constant added
/// to every energy.
#[derive(Debug, Clone, PartialEq)]
pub struct Shifted {
    pub mrf: PairwiseMrf,
    pub shift: f64,
}

impl PairwiseMrf {
    /// Builds a model from per-node tables and per-edge tables indexed by the
    /// graph's edge ids (canonical `(min, max)` argument order).
    pub fn new(graph: Graph, states: usize, node_tables: Vec<Vec<f64>>, edge_tables: Vec<Vec<f64>>) -> Result<Self> {
        if states < 2 {
            return Err(Error::InvalidModel(format!(
                "alphabet size must be at least 2, got {states}"
            )));
        }
        if node_tables.len() != graph.n() {
            return Err(Error::InvalidModel(format!(
                "{} node tables for {} nodes",
                node_tables.len(),
                graph.n()
            )));
        }
        if edge_tables.len() != graph.num_edges() {
            return Err(Error::InvalidModel(format!(
                "{} edge tables for {} edges",
                edge_tables.len(),
                graph.num_edges()
            )));
        }
        let mut node = Vec::with_capacity(graph.n() * states);
        for (v, t) in node_tables.iter().enumerate() {
            if t.len() != states {
                return Err(Error::InvalidModel(format!(
                    "node {v} table has {} entries, expected {states}",
                    t.len()
                )));
            }
            check_finite(t, || format!("node {v}"))?;
            node.extend_from_slice(t);
        }
        let mut edge = Vec::with_capacity(graph.num_edges() * states * states);
        for (e, t) in edge_tables.iter().enumerate() {
            if t.len() != states * states {
                return Err(Error::InvalidModel(format!(
                    "edge {:?} table has {} entries, expected {}",
                    graph.edge(e),
                    t.len(),
                    states * states
                )));
            }
            check_finite(t, || format!("edge {:?}", graph.edge(e)))?;
            edge.extend_from_slice(t);
        }
        let (edge_min, edge_max) = edge
            .chunks(states * states)
            .map(|t| {
                t.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
                    (lo.min(x), hi.max(x))
                })
            })
            .unzip();
        Ok(PairwiseMrf {
            graph,
            states,
            node,
            edge,
            edge_min,
            edge_max,
        })
    }

    /// Builds a model from `(u, v, table)` triples; each table is row-major in
    /// `(x_u, x_v)` for the endpoints in the order given and is transposed when
    /// `u > v`.
    pub fn from_edge_list(
        n: usize,
        states: usize,
        node_tables: Vec<Vec<f64>>,
        edges: Vec<(usize, usize, Vec<f64>)>,
    ) -> Result<Self> {
        let graph = Graph::new(n, edges.iter().map(|&(u, v, _)| (u, v)))?;
        let mut tables = vec![Vec::new(); graph.num_edges()];
        for (u, v, t) in edges {
            let id = graph.edge_id(u, v).expect("edge just inserted");
            tables[id] = if u < v || t.len() != states * states {
                t
            } else {
                transpose(&t, states)
            };
        }
        PairwiseMrf::new(graph, states, node_tables, tables)
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn n(&self) -> usize {
        self.graph.n()
    }

    /// Alphabet size `|Σ|`.
    pub fn states(&self) -> usize {
        self.states
    }

    pub fn phi(&self, v: usize, s: usize) -> f64 {
        self.node[v * self.states + s]
    }

    pub fn phi_table(&self, v: usize) -> &[f64] {
        &self.node[v * self.states..(v + 1) * self.states]
    }

    /// Edge table in canonical `(min-id, max-id)` order.
    pub fn psi_table(&self, e: usize) -> &[f64] {
        let q2 = self.states * self.states;
        &self.edge[e * q2..(e + 1) * q2]
    }

    /// `psi_e(a, b)` with `a` the state of the smaller endpoint.
    pub fn psi_edge(&self, e: usize, a: usize, b: usize) -> f64 {
        self.edge[(e * self.states + a) * self.states + b]
    }

    /// `psi_uv(x_u, x_v)` for either argument order.
    ///
    /// Panics if `(u, v)` is not an edge.
    pub fn psi(&self, u: usize, v: usize, xu: usize, xv: usize) -> f64 {
        let e = self
            .graph
            .edge_id(u, v)
            .unwrap_or_else(|| panic!("({u}, {v}) is not an edge"));
        if u < v {
            self.psi_edge(e, xu, xv)
        } else {
            self.psi_edge(e, xv, xu)
        }
    }

    /// `ψ^L_e`, the smallest entry of the edge table.
    pub fn psi_min(&self, e: usize) -> f64 {
        self.edge_min[e]
    }

    /// `ψ^U_e`, the largest entry of the edge table.
    pub fn psi_max(&self, e: usize) -> f64 {
        self.edge_max[e]
    }

    /// `ψ^U_e - ψ^L_e`.
    pub fn psi_range(&self, e: usize) -> f64 {
        self.edge_max[e] - self.edge_min[e]
    }

    /// Energy `H(x)`, summing node terms then edge terms in id order.
    pub fn energy(&self, x: &[usize]) -> f64 {
        assert_eq!(x.len(), self.n(), "assignment length");
        let mut h = 0.0;
        for (v, &s) in x.iter().enumerate() {
            h += self.phi(v, s);
        }
        for (e, &(u, v)) in self.graph.edges().iter().enumerate() {
            h += self.psi_edge(e, x[u], x[v]);
        }
        h
    }

    pub fn is_nonnegative(&self) -> bool {
        self.node.iter().chain(&self.edge).all(|&x| x >= 0.0)
    }

    /// Adds `max(0, -min table)` to every node and edge table so all entries
    /// become non-negative. The distribution is unchanged; the returned shift
    /// is the constant added to every energy.
    pub fn affine_shift(&self) -> Shifted {
        let q = self.states;
        let mut shift = 0.0;
        let node_tables = (0..self.n())
            .map(|v| {
                let t = self.phi_table(v);
                let c = (-t.iter().copied().fold(f64::INFINITY, f64::min)).max(0.0);
                shift += c;
                t.iter().map(|x| x + c).collect()
            })
            .collect();
        let edge_tables = (0..self.graph.num_edges())
            .map(|e| {
                let c = (-self.edge_min[e]).max(0.0);
                shift += c;
                self.psi_table(e).iter().map(|x| x + c).collect()
            })
            .collect();
        let mrf = PairwiseMrf::new(self.graph.clone(), q, node_tables, edge_tables)
            .expect("shifting finite tables keeps them valid");
        Shifted { mrf, shift }
    }

    /// The same model with the edges flagged in `removed` (by edge id) deleted.
    pub fn without_edges(&self, removed: &[bool]) -> PairwiseMrf {
        let kept: Vec<usize> = (0..self.graph.num_edges()).filter(|&e| !removed[e]).collect();
        let graph =
            Graph::new(self.n(), kept.iter().map(|&e| self.graph.edge(e))).expect("a subset of valid edges is valid");
        let node_tables = (0..self.n()).map(|v| self.phi_table(v).to_vec()).collect();
        let edge_tables = kept.iter().map(|&e| self.psi_table(e).to_vec()).collect();
        PairwiseMrf::new(graph, self.states, node_tables, edge_tables).expect("tables come from a valid model")
    }

    /// Sub-model on `nodes`: their node tables and the tables of edges with
    /// both endpoints inside. Returns the model and its local-to-global map.
    pub fn induced(&self, nodes: &[usize]) -> Result<(PairwiseMrf, Vec<usize>)> {
        let (sub, map) = self.graph.induced_subgraph(nodes)?;
        let node_tables = map.iter().map(|&v| self.phi_table(v).to_vec()).collect();
        let edge_tables = sub
            .edges()
            .iter()
            .map(|&(a, b)| {
                let e = self.graph.edge_id(map[a], map[b]).expect("induced edge");
                self.psi_table(e).to_vec()
            })
            .collect();
        Ok((PairwiseMrf::new(sub, self.states, node_tables, edge_tables)?, map))
    }

    /// Checks that `x` is a full assignment for this model.
    pub fn validate_assignment(&self, x: &[usize]) -> Result<()> {
        if x.len() != self.n() {
            return Err(Error::InvalidModel(format!(
                "assignment has {} entries for {} nodes",
                x.len(),
                self.n()
            )));
        }
        if let Some((v, &s)) = x.iter().enumerate().find(|(_, &s)| s >= self.states) {
            return Err(Error::InvalidModel(format!(
                "node {v} has state {s} outside alphabet of size {}",
                self.states
            )));
        }
        Ok(())
    }
}

fn check_finite(t: &[f64], loc: impl Fn() -> String) -> Result<()> {
    match t.iter().find(|x| !x.is_finite()) {
        Some(&value) => Err(Error::NonFinite { location: loc(), value }),
        None => Ok(()),
    }
}

fn transpose(t: &[f64], q: usize) -> Vec<f64> {
    (0..q * q).map(|i| t[(i % q) * q + i / q]).collect()
}

/// A validated full assignment of states to nodes.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Assignment(Vec<usize>);

impl Assignment {
    pub fn new(mrf: &PairwiseMrf, values: Vec<usize>) -> Result<Self> {
        mrf.validate_assignment(&values)?;
        Ok(Assignment(values))
    }

    pub(crate) fn from_vec_unchecked(values: Vec<usize>) -> Self {
        Assignment(values)
    }

    pub fn into_vec(self) -> Vec<usize> {
        self.0
    }
}

impl Deref for Assignment {
    type Target = [usize];

    fn deref(&self) -> &[usize] {
        &self.0
    }
}

/// Log-sum-exp of a slice; `-inf` for an empty slice or all `-inf` entries.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_node(psi: Vec<f64>) -> PairwiseMrf {
        PairwiseMrf::from_edge_list(2, 2, vec![vec![0.0, 0.0]; 2], vec![(0, 1, psi)]).unwrap()
    }

    #[test]
    fn shift_single_table() {
        let m = PairwiseMrf::new(Graph::empty(1), 2, vec![vec![-1.0, 2.0]], vec![]).unwrap();
        let s = m.affine_shift();
        assert_eq!(s.mrf.phi_table(0), &[0.0, 3.0]);
        assert_eq!(s.shift, 1.0);
    }

    #[test]
    fn shift_identity_when_nonnegative() {
        let m = two_node(vec![0.0, 0.5, 0.25, 1.0]);
        let s = m.affine_shift();
        assert_eq!(s.shift, 0.0);
        assert_eq!(s.mrf, m);
    }

    #[test]
    fn rejects_non_finite() {
        let err = PairwiseMrf::new(Graph::empty(1), 2, vec![vec![f64::NAN, 0.0]], vec![]);
        assert!(matches!(err, Err(Error::NonFinite { .. })));
        let err = PairwiseMrf::new(Graph::empty(1), 2, vec![vec![f64::INFINITY, 0.0]], vec![]);
        assert!(matches!(err, Err(Error::NonFinite { .. })));
    }

    #[test]
    fn energy_trivial_cases() {
        let m = PairwiseMrf::new(Graph::empty(1), 2, vec![vec![0.0, 2.0]], vec![]).unwrap();
        assert_eq!(m.energy(&[1]), 2.0);
        let m = two_node(vec![0.0, 0.0, 0.0, 1.0]);
        assert_eq!(m.energy(&[1, 1]), 1.0);
    }

    #[test]
    fn transposed_input_tables() {
        // psi given for (1, 0): rows index x_1
        let m =
            PairwiseMrf::from_edge_list(2, 2, vec![vec![0.0, 0.0]; 2], vec![(1, 0, vec![0.0, 1.0, 2.0, 3.0])]).unwrap();
        assert_eq!(m.psi(1, 0, 0, 1), 1.0);
        assert_eq!(m.psi(0, 1, 1, 0), 1.0);
        assert_eq!(m.psi_edge(0, 1, 0), 1.0);
        assert_eq!(m.psi_min(0), 0.0);
        assert_eq!(m.psi_max(0), 3.0);
    }

    #[test]
    fn assignment_validation() {
        let m = two_node(vec![0.0; 4]);
        assert!(Assignment::new(&m, vec![0, 1]).is_ok());
        assert!(Assignment::new(&m, vec![0]).is_err());
        assert!(Assignment::new(&m, vec![0, 2]).is_err());
    }

    #[test]
    fn lse_basics() {
        assert_eq!(log_sum_exp(&[]), f64::NEG_INFINITY);
        assert!((log_sum_exp(&[0.0, 0.0]) - 2f64.ln()).abs() < 1e-15);
    }
}
