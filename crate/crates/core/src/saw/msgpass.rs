//! Distributed simulation of the SAW max-product schedule.
//!
//! Every node starts by sending the path sequence `(v)` to its neighbors.
//! A node receiving a path sequence extends and forwards it, or answers with a
//! computation sequence if it is a leaf or already appears on the path. A node
//! that has heard back from every forwarded branch combines the messages and
//! answers its own parent; the origin turns the combined messages into its
//! max-belief. Channels are served from one global FIFO queue, so a run is
//! fully deterministic.

use std::collections::{HashMap, VecDeque};

use super::{combine, message, normalize, tree_potential, Mark, RatioPair, SawConfig};
use crate::error::{Error, Result};
use crate::mrf::PairwiseMrf;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceKind {
    Path,
    Computation,
}

/// One emitted sequence. For computation sequences `message` holds
/// `(m(0), m(1))` normalized to sum to one.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceEvent {
    pub kind: TraceKind,
    pub from: usize,
    pub to: usize,
    pub path: Vec<usize>,
    pub message: Option<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MsgPassOutput {
    /// Max-belief ratio per node.
    pub ratios: Vec<RatioPair>,
    /// Computation sequences emitted on behalf of each origin.
    pub computation_counts: Vec<usize>,
    /// Path sequences emitted on behalf of each origin.
    pub path_counts: Vec<usize>,
    /// Every sequence in emission order, when requested.
    pub trace: Option<Vec<TraceEvent>>,
}

enum Seq {
    Path(Vec<usize>),
    // path ends at the sender; message in log domain, unnormalized
    Computation(Vec<usize>, [f64; 2]),
}

struct Sim<'a> {
    mrf: &'a PairwiseMrf,
    cap: u128,
    queue: VecDeque<(usize, usize, Seq)>,
    // path ending at the waiting node -> messages by neighbor position
    pending: HashMap<Vec<usize>, Vec<Option<[f64; 2]>>>,
    out: MsgPassOutput,
}

impl Sim<'_> {
    fn send(&mut self, from: usize, to: usize, seq: Seq) -> Result<()> {
        let (kind, path, msg) = match &seq {
            Seq::Path(p) => (TraceKind::Path, p, None),
            Seq::Computation(p, m) => (TraceKind::Computation, p, Some(normalize(*m))),
        };
        let origin = path[0];
        match kind {
            TraceKind::Path => {
                self.out.path_counts[origin] += 1;
                if self.out.path_counts[origin] as u128 > self.cap {
                    return Err(Error::CapExceeded {
                        what: format!("message passing tree at node {origin}"),
                        needed: self.out.path_counts[origin] as u128,
                        cap: self.cap,
                    });
                }
            }
            TraceKind::Computation => self.out.computation_counts[origin] += 1,
        }
        if let Some(trace) = &mut self.out.trace {
            trace.push(TraceEvent {
                kind,
                from,
                to,
                path: path.clone(),
                message: msg,
            });
        }
        self.queue.push_back((from, to, seq));
        Ok(())
    }

    fn on_path(&mut self, u: usize, from: usize, path: Vec<usize>) -> Result<()> {
        let g = self.mrf.graph();
        let mut reply = path.clone();
        reply.push(u);
        let mark = if g.degree(u) == 1 {
            Some(Mark::Unmarked)
        } else {
            // cycle (u, path[l+1], ..., from, u)
            path.iter()
                .position(|&x| x == u)
                .map(|l| if from < path[l + 1] { Mark::Green } else { Mark::Red })
        };
        if let Some(mark) = mark {
            let b = combine(tree_potential(self.mrf, u, mark, &[]), []);
            let m = message(self.mrf, u, from, b);
            return self.send(u, from, Seq::Computation(reply, m));
        }
        self.pending.insert(reply.clone(), vec![None; g.degree(u)]);
        for &w in g.neighbors(u) {
            if w != from {
                self.send(u, w, Seq::Path(reply.clone()))?;
            }
        }
        Ok(())
    }

    fn on_computation(&mut self, u: usize, from: usize, mut path: Vec<usize>, m: [f64; 2]) -> Result<()> {
        let g = self.mrf.graph();
        path.pop();
        let slot = g
            .neighbors(u)
            .binary_search(&from)
            .expect("computation sequences travel along edges");
        let store = self.pending.get_mut(&path).expect("reply to a forwarded path");
        store[slot] = Some(m);
        let parent = (path.len() >= 2).then(|| path[path.len() - 2]);
        let complete = g
            .neighbors(u)
            .iter()
            .zip(store.iter())
            .all(|(&w, s)| Some(w) == parent || s.is_some());
        if !complete {
            return Ok(());
        }
        let store = self.pending.remove(&path).expect("present");
        let msgs = store.into_iter().flatten();
        let b = combine(tree_potential(self.mrf, u, Mark::Unmarked, &[]), msgs);
        match parent {
            Some(p) => {
                let m = message(self.mrf, u, p, b);
                self.send(u, p, Seq::Computation(path, m))
            }
            None => {
                self.out.ratios[u] = RatioPair::from_max_marginals(b);
                Ok(())
            }
        }
    }
}

/// Runs the message-passing schedule on a binary model and returns every
/// node's max-marginal ratio. The ratios coincide bit for bit with
/// [`super::saw_max_ratio`] on each node's SAW tree.
pub fn msg_pass_mode(mrf: &PairwiseMrf, cfg: &SawConfig, trace: bool) -> Result<MsgPassOutput> {
    if mrf.states() != 2 {
        return Err(Error::NotBinary(mrf.states()));
    }
    let n = mrf.n();
    let g = mrf.graph();
    let mut sim = Sim {
        mrf,
        cap: cfg.max_tree_edges,
        queue: VecDeque::new(),
        pending: HashMap::new(),
        out: MsgPassOutput {
            ratios: vec![RatioPair::new(f64::NAN, f64::NAN); n],
            computation_counts: vec![0; n],
            path_counts: vec![0; n],
            trace: trace.then(Vec::new),
        },
    };
    for v in 0..n {
        if g.degree(v) == 0 {
            let b = combine(tree_potential(mrf, v, Mark::Unmarked, &[]), []);
            sim.out.ratios[v] = RatioPair::from_max_marginals(b);
            continue;
        }
        sim.pending.insert(vec![v], vec![None; g.degree(v)]);
        for &w in g.neighbors(v) {
            sim.send(v, w, Seq::Path(vec![v]))?;
        }
    }
    while let Some((from, to, seq)) = sim.queue.pop_front() {
        match seq {
            Seq::Path(p) => sim.on_path(to, from, p)?,
            Seq::Computation(p, m) => sim.on_computation(to, from, p, m)?,
        }
    }
    debug_assert!(sim.pending.is_empty());
    Ok(sim.out)
}

#[cfg(test)]
mod tests {
    use super::super::{build_saw_tree, saw_max_ratio, saw_size_upper};
    use super::*;
    use crate::graph::Graph;

    fn model(graph: Graph) -> PairwiseMrf {
        let n = graph.n();
        let m = graph.num_edges();
        let nodes = (0..n).map(|v| vec![0.1 * v as f64, 0.3]).collect();
        let edges = (0..m).map(|e| vec![0.2, 0.0, 0.5 * e as f64, 0.4]).collect();
        PairwiseMrf::new(graph, 2, nodes, edges).unwrap()
    }

    #[test]
    fn path_of_three_leaf_responses() {
        let m = model(Graph::new(3, [(0, 1), (1, 2)]).unwrap());
        let out = msg_pass_mode(&m, &SawConfig::default(), true).unwrap();
        let trace = out.trace.unwrap();
        // node 1 forwards origin 0's path to leaf 2, which answers
        let ev = trace
            .iter()
            .find(|e| e.kind == TraceKind::Computation && e.path == [0, 1, 2])
            .unwrap();
        let lin = |x: f64| x.exp();
        let raw = |s: usize| (lin(m.psi(2, 1, 0, s)) * lin(m.phi(2, 0))).max(lin(m.psi(2, 1, 1, s)) * lin(m.phi(2, 1)));
        let total = raw(0) + raw(1);
        let msg = ev.message.unwrap();
        assert!((msg[0] - raw(0) / total).abs() < 1e-12);
        assert!((msg[1] - raw(1) / total).abs() < 1e-12);
        assert_eq!((ev.from, ev.to), (2, 1));
    }

    #[test]
    fn matches_centralized_exactly() {
        let graphs = [
            Graph::new(3, [(0, 1), (1, 2), (0, 2)]).unwrap(),
            crate::lattice::gen_criscross(3),
            Graph::new(5, [(0, 1), (2, 3)]).unwrap(),
        ];
        for g in graphs {
            let m = model(g);
            let out = msg_pass_mode(&m, &SawConfig::default(), false).unwrap();
            for v in 0..m.n() {
                let t = build_saw_tree(&m, v, &SawConfig::default()).unwrap();
                assert_eq!(out.ratios[v], saw_max_ratio(&m, &t));
                assert_eq!(out.computation_counts[v], t.num_edges());
                assert_eq!(out.path_counts[v], t.num_edges());
            }
        }
    }

    #[test]
    fn counts_respect_size_bound() {
        let g = crate::lattice::gen_grid(3);
        let k = g.cyclomatic_number();
        let out = msg_pass_mode(&model(g), &SawConfig::default(), false).unwrap();
        assert!(out
            .computation_counts
            .iter()
            .all(|&c| c as u128 <= saw_size_upper(9, k)));
    }
}
