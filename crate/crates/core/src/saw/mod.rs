//! Self-avoiding walk trees for binary models.
//!
//! The tree `T_SAW(G, v)` unrolls every non-backtracking walk from `v`,
//! stopping a walk when it returns to a node already on it. That repeated copy
//! becomes a marked leaf, forced to 1 (Green) or 0 (Red) depending on how the
//! closing cycle is oriented with respect to the neighbor order of the
//! repeated node. Max-product on the tree then gives the exact max-marginal
//! ratio of the root in the original graph.
//!
//! Neighbors are always ordered by ascending node id.

mod msgpass;

pub use msgpass::{msg_pass_mode, MsgPassOutput, TraceEvent, TraceKind};

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::mrf::{Assignment, PairwiseMrf};

/// Default limit on the number of tree edges a single SAW tree may have.
pub const DEFAULT_MAX_TREE_EDGES: u128 = 1 << 22;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SawConfig {
    pub max_tree_edges: u128,
}

impl Default for SawConfig {
    fn default() -> Self {
        SawConfig {
            max_tree_edges: DEFAULT_MAX_TREE_EDGES,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mark {
    Unmarked,
    /// Repeated node forced to 1.
    Green,
    /// Repeated node forced to 0.
    Red,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SawNode {
    pub original: usize,
    pub parent: Option<usize>,
    pub depth: usize,
    pub mark: Mark,
    /// Child tree ids in ascending order of their original node.
    pub children: Vec<usize>,
}

/// A self-avoiding walk tree; tree ids are in breadth-first order, so every
/// child has a larger id than its parent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SawTree {
    root: usize,
    nodes: Vec<SawNode>,
}

impl SawTree {
    /// Original id of the root.
    pub fn root(&self) -> usize {
        self.root
    }

    pub fn nodes(&self) -> &[SawNode] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn num_edges(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn count_marks(&self, mark: Mark) -> usize {
        self.nodes.iter().filter(|t| t.mark == mark).count()
    }

    /// Original ids on the path from the root to tree node `t`.
    pub fn path(&self, t: usize) -> Vec<usize> {
        let mut path = Vec::new();
        let mut cur = Some(t);
        while let Some(c) = cur {
            path.push(self.nodes[c].original);
            cur = self.nodes[c].parent;
        }
        path.reverse();
        path
    }
}

/// `(n + k - 1) 2^(k+1)`: the largest possible edge count of a SAW tree of a
/// connected graph with `n` nodes and cyclomatic number `k`.
pub fn saw_size_upper(n: usize, k: usize) -> u128 {
    let factor = 1u128.checked_shl(k as u32 + 1).unwrap_or(u128::MAX);
    ((n + k) as u128).saturating_sub(1).saturating_mul(factor)
}

/// `n 2^(k-2)`, the size every root reaches on [`saw_lower_bound_family`].
pub fn saw_size_lower(n: usize, k: usize) -> f64 {
    n as f64 * 2f64.powi(k as i32 - 2)
}

/// The path `0 - 1 - ... - (n-1)` plus the chord `(0, n-1)` and the chords
/// `(2i - 1, 2i + 1)` for `i = 1..k-1`, a graph with cyclomatic number `k`
/// and large SAW trees. Needs `1 <= k` and `2k <= n`, `n >= 3`.
pub fn saw_lower_bound_family(n: usize, k: usize) -> Result<Graph> {
    if n < 3 || k < 1 || 2 * k > n {
        return Err(Error::Domain(format!(
            "lower-bound family needs n >= 3 and 1 <= k <= n/2, got n={n}, k={k}"
        )));
    }
    let mut edges: Vec<(usize, usize)> = (0..n - 1).map(|i| (i, i + 1)).collect();
    edges.push((0, n - 1));
    edges.extend((1..k).map(|i| (2 * i - 1, 2 * i + 1)));
    Graph::new(n, edges)
}

/// Builds `T_SAW(graph, v)` breadth first.
///
/// Errors with [`Error::CapExceeded`] once the tree would exceed
/// `cfg.max_tree_edges` edges; the reported need is the size bound of
/// [`saw_size_upper`] for the component of `v`.
pub fn build_saw_tree_graph(graph: &Graph, v: usize, cfg: &SawConfig) -> Result<SawTree> {
    if v >= graph.n() {
        return Err(Error::InvalidGraph(format!("root {v} out of range")));
    }
    let mut nodes = vec![SawNode {
        original: v,
        parent: None,
        depth: 0,
        mark: Mark::Unmarked,
        children: Vec::new(),
    }];
    let mut head = 0;
    while head < nodes.len() {
        let t = head;
        head += 1;
        if nodes[t].mark != Mark::Unmarked {
            continue;
        }
        let u = nodes[t].original;
        let parent_orig = nodes[t].parent.map(|p| nodes[p].original);
        for &w in graph.neighbors(u) {
            if Some(w) == parent_orig {
                continue;
            }
            let mark = revisit_mark(&nodes, t, w);
            if nodes.len() as u128 > cfg.max_tree_edges {
                return Err(saw_cap_error(graph, v, cfg));
            }
            let id = nodes.len();
            let depth = nodes[t].depth + 1;
            nodes.push(SawNode {
                original: w,
                parent: Some(t),
                depth,
                mark,
                children: Vec::new(),
            });
            nodes[t].children.push(id);
        }
    }
    Ok(SawTree { root: v, nodes })
}

fn saw_cap_error(graph: &Graph, v: usize, cfg: &SawConfig) -> Error {
    let comp = graph
        .connected_components()
        .into_iter()
        .find(|c| c.binary_search(&v).is_ok())
        .expect("every node lies in a component");
    let (sub, _) = graph.induced_subgraph(&comp).expect("component nodes are valid");
    Error::CapExceeded {
        what: format!("self-avoiding walk tree at node {v}"),
        needed: saw_size_upper(sub.n(), sub.cyclomatic_number()),
        cap: cfg.max_tree_edges,
    }
}

/// Mark of a new child copy of `w` under tree node `t`: Unmarked unless `w`
/// already lies on the root path of `t`. For a cycle `(w, v1, ..., vk, w)`
/// with `vk` the original of `t`, the copy is Green when `vk < v1`.
fn revisit_mark(nodes: &[SawNode], t: usize, w: usize) -> Mark {
    let vk = nodes[t].original;
    let mut after = t;
    let mut cur = nodes[t].parent;
    while let Some(c) = cur {
        if nodes[c].original == w {
            let v1 = nodes[after].original;
            return if vk < v1 { Mark::Green } else { Mark::Red };
        }
        after = c;
        cur = nodes[c].parent;
    }
    Mark::Unmarked
}

/// `T_SAW(mrf.graph, v)` for a binary model.
pub fn build_saw_tree(mrf: &PairwiseMrf, v: usize, cfg: &SawConfig) -> Result<SawTree> {
    if mrf.states() != 2 {
        return Err(Error::NotBinary(mrf.states()));
    }
    build_saw_tree_graph(mrf.graph(), v, cfg)
}

/// Log-domain pair `(log q*(1), log q*(0))` up to a shared constant. Either
/// side may be `-inf`, so ratios 0 and infinity are exact.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioPair {
    pub log_num: f64,
    pub log_den: f64,
}

impl RatioPair {
    pub fn new(log_num: f64, log_den: f64) -> Self {
        RatioPair { log_num, log_den }
    }

    /// From max-marginals `[max over x_v = 0, max over x_v = 1]`.
    pub fn from_max_marginals(mm: [f64; 2]) -> Self {
        RatioPair::new(mm[1], mm[0])
    }

    /// `log(q*(1) / q*(0))`, possibly infinite.
    pub fn log_ratio(&self) -> f64 {
        self.log_num - self.log_den
    }

    /// Orders the ratio against 1.
    pub fn cmp_one(&self) -> Ordering {
        self.log_num
            .partial_cmp(&self.log_den)
            .expect("a ratio pair never has NaN sides")
    }

    /// Equal as ratios: both infinite with the same sign, or log ratios within
    /// `tol`.
    pub fn agrees(&self, other: &RatioPair, tol: f64) -> bool {
        let (a, b) = (self.log_ratio(), other.log_ratio());
        if a.is_infinite() || b.is_infinite() {
            a == b
        } else {
            (a - b).abs() <= tol
        }
    }

    /// The pair as linear values normalized to sum to one.
    pub fn normalized(&self) -> [f64; 2] {
        normalize([self.log_den, self.log_num])
    }
}

/// Linear-domain normalization of a log pair.
pub(crate) fn normalize(m: [f64; 2]) -> [f64; 2] {
    let top = m[0].max(m[1]);
    let e = [(m[0] - top).exp(), (m[1] - top).exp()];
    let s = e[0] + e[1];
    [e[0] / s, e[1] / s]
}

/// Log potential of a tree copy of `w`: a clamp in `evidence` wins, then the
/// mark, then the inherited table.
pub(crate) fn tree_potential(mrf: &PairwiseMrf, w: usize, mark: Mark, evidence: &[Option<usize>]) -> [f64; 2] {
    let phi = [mrf.phi(w, 0), mrf.phi(w, 1)];
    let forced = match evidence.get(w).copied().flatten() {
        Some(s) => Some(s),
        None => match mark {
            Mark::Unmarked => None,
            Mark::Green => Some(1),
            Mark::Red => Some(0),
        },
    };
    match forced {
        Some(0) => [phi[0], f64::NEG_INFINITY],
        Some(_) => [f64::NEG_INFINITY, phi[1]],
        None => phi,
    }
}

/// `b(σ) = potential(σ) + Σ m_c(σ)`, children in the given order.
pub(crate) fn combine(potential: [f64; 2], msgs: impl IntoIterator<Item = [f64; 2]>) -> [f64; 2] {
    let mut b = potential;
    for m in msgs {
        b[0] += m[0];
        b[1] += m[1];
    }
    b
}

/// Max-product message from `child` (belief `b`) to `parent`:
/// `m(σ_p) = max_σ ψ(σ, σ_p) + b(σ)`.
pub(crate) fn message(mrf: &PairwiseMrf, child: usize, parent: usize, b: [f64; 2]) -> [f64; 2] {
    let m = |sp: usize| (mrf.psi(child, parent, 0, sp) + b[0]).max(mrf.psi(child, parent, 1, sp) + b[1]);
    [m(0), m(1)]
}

/// Root max-marginal ratio by a leaf-to-root max-product sweep.
pub fn saw_max_ratio(mrf: &PairwiseMrf, tree: &SawTree) -> RatioPair {
    saw_max_ratio_with(mrf, tree, &[])
}

/// [`saw_max_ratio`] with nodes of `evidence` clamped (`Some(s)`); an empty
/// slice means no evidence.
pub fn saw_max_ratio_with(mrf: &PairwiseMrf, tree: &SawTree, evidence: &[Option<usize>]) -> RatioPair {
    let nodes = tree.nodes();
    let mut msg = vec![[0.0; 2]; nodes.len()];
    let mut root_belief = [0.0; 2];
    for t in (0..nodes.len()).rev() {
        let node = &nodes[t];
        let pot = tree_potential(mrf, node.original, node.mark, evidence);
        let b = combine(pot, node.children.iter().map(|&c| msg[c]));
        match node.parent {
            Some(p) => msg[t] = message(mrf, node.original, nodes[p].original, b),
            None => root_belief = b,
        }
    }
    RatioPair::from_max_marginals(root_belief)
}

/// Exact MAP of a binary model by sequential conditioning: the lowest unfixed
/// node is fixed to 1 when its SAW ratio exceeds 1 and to 0 otherwise, then
/// the next node is examined with all earlier choices clamped. The result is
/// the lexicographically smallest maximizer.
pub fn saw_component_map(mrf: &PairwiseMrf, cfg: &SawConfig) -> Result<Assignment> {
    if mrf.states() != 2 {
        return Err(Error::NotBinary(mrf.states()));
    }
    let mut evidence = vec![None; mrf.n()];
    for v in 0..mrf.n() {
        let tree = build_saw_tree(mrf, v, cfg)?;
        let r = saw_max_ratio_with(mrf, &tree, &evidence);
        evidence[v] = Some(usize::from(r.cmp_one() == Ordering::Greater));
    }
    Assignment::new(mrf, evidence.into_iter().map(|s| s.expect("all fixed")).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{brute_map, brute_max_marginal, ExactConfig};
    use crate::rng;
    use rand::Rng as _;

    fn random_binary(graph: Graph, seed: u64) -> PairwiseMrf {
        let mut r = rng::main_stream(seed);
        let nodes = (0..graph.n())
            .map(|_| vec![r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0)])
            .collect();
        let edges = (0..graph.num_edges())
            .map(|_| (0..4).map(|_| r.gen_range(-1.0..1.0)).collect())
            .collect();
        PairwiseMrf::new(graph, 2, nodes, edges).unwrap()
    }

    fn triangle() -> Graph {
        Graph::new(3, [(0, 1), (1, 2), (0, 2)]).unwrap()
    }

    #[test]
    fn tree_input_has_no_marks() {
        let g = Graph::new(5, [(0, 1), (1, 2), (1, 3), (3, 4)]).unwrap();
        let t = build_saw_tree_graph(&g, 1, &SawConfig::default()).unwrap();
        assert_eq!(t.len(), 5);
        assert_eq!(t.count_marks(Mark::Green) + t.count_marks(Mark::Red), 0);
        let bfs = g.bfs_distances(1);
        for node in t.nodes() {
            assert_eq!(Some(node.depth), bfs[node.original]);
        }
    }

    #[test]
    fn triangle_marks() {
        // one-based labels 1, 2, 3 are 0, 1, 2 here
        let t = build_saw_tree_graph(&triangle(), 0, &SawConfig::default()).unwrap();
        assert_eq!(t.len(), 7);
        assert_eq!(t.num_edges(), 6);
        let leaf = |path: &[usize]| {
            let id = (0..t.len()).find(|&i| t.path(i) == path).unwrap();
            t.nodes()[id].mark
        };
        assert_eq!(leaf(&[0, 1, 2, 0]), Mark::Red);
        assert_eq!(leaf(&[0, 2, 1, 0]), Mark::Green);
    }

    #[test]
    fn four_cycle_with_tail() {
        // the four-node single-cycle example: square 0-1-3-2-0
        let g = Graph::new(4, [(0, 1), (0, 2), (1, 3), (2, 3)]).unwrap();
        let t = build_saw_tree_graph(&g, 0, &SawConfig::default()).unwrap();
        assert_eq!(t.count_marks(Mark::Green), 1);
        assert_eq!(t.count_marks(Mark::Red), 1);
        assert_eq!(t.len(), 9);
    }

    #[test]
    fn size_bound_formula() {
        assert_eq!(saw_size_upper(6, 0), 10);
        assert_eq!(saw_size_upper(3, 1), 12);
        assert_eq!(saw_size_upper(1, 0), 0);
    }

    #[test]
    fn single_node_ratio() {
        let m = PairwiseMrf::new(Graph::empty(1), 2, vec![vec![0.7, 0.7]], vec![]).unwrap();
        let t = build_saw_tree(&m, 0, &SawConfig::default()).unwrap();
        assert_eq!(saw_max_ratio(&m, &t).log_ratio(), 0.0);
    }

    #[test]
    fn ratio_matches_brute() {
        let graphs = [
            triangle(),
            Graph::new(4, [(0, 1), (0, 2), (1, 3), (2, 3), (1, 2)]).unwrap(),
            crate::lattice::gen_grid(3),
            Graph::new(5, (0..5).flat_map(|a| (a + 1..5).map(move |b| (a, b)))).unwrap(),
        ];
        for (i, g) in graphs.into_iter().enumerate() {
            let m = random_binary(g, i as u64);
            for v in 0..m.n() {
                let t = build_saw_tree(&m, v, &SawConfig::default()).unwrap();
                let saw = saw_max_ratio(&m, &t);
                let brute = RatioPair::from_max_marginals(brute_max_marginal(&m, v).unwrap());
                assert!(saw.agrees(&brute, 1e-9), "graph {i} v {v}: {saw:?} {brute:?}");
            }
        }
    }

    #[test]
    fn ratio_with_evidence_matches_brute() {
        let m = random_binary(crate::lattice::gen_criscross(3), 3);
        let ev = [Some(1), None, None, Some(0), None, None, None, Some(1), None];
        for v in 0..9 {
            let t = build_saw_tree(&m, v, &SawConfig::default()).unwrap();
            let saw = saw_max_ratio_with(&m, &t, &ev);
            let brute = ExactConfig::default().max_marginal_with(&m, v, &ev).unwrap();
            assert!(saw.agrees(&RatioPair::from_max_marginals(brute), 1e-9));
        }
        let t = build_saw_tree(&m, 0, &SawConfig::default()).unwrap();
        assert_eq!(saw_max_ratio_with(&m, &t, &ev).log_ratio(), f64::INFINITY);
    }

    #[test]
    fn component_map_single_edge() {
        let m =
            PairwiseMrf::from_edge_list(2, 2, vec![vec![0.0; 2]; 2], vec![(0, 1, vec![0.0, 0.0, 0.0, 2.0])]).unwrap();
        let x = saw_component_map(&m, &SawConfig::default()).unwrap();
        assert_eq!(x.to_vec(), vec![1, 1]);
    }

    #[test]
    fn component_map_matches_brute() {
        for seed in 0..10 {
            let m = random_binary(crate::lattice::gen_criscross(3), seed);
            let x = saw_component_map(&m, &SawConfig::default()).unwrap();
            let (y, h) = brute_map(&m).unwrap();
            assert_eq!(x, y);
            assert_eq!(m.energy(&x), h);
        }
    }

    #[test]
    fn cap_reports_bound() {
        let g = crate::lattice::gen_criscross(3);
        let err = build_saw_tree_graph(&g, 0, &SawConfig { max_tree_edges: 10 }).unwrap_err();
        let k = g.cyclomatic_number();
        assert_eq!(
            err,
            Error::CapExceeded {
                what: "self-avoiding walk tree at node 0".into(),
                needed: saw_size_upper(9, k),
                cap: 10
            }
        );
    }

    #[test]
    fn lower_bound_family_shape() {
        let g = saw_lower_bound_family(8, 3).unwrap();
        assert_eq!(g.num_edges(), 8 - 1 + 3);
        assert_eq!(g.cyclomatic_number(), 3);
        assert!(saw_lower_bound_family(6, 4).is_err());
    }
}
