//! Simple undirected graphs with canonical neighbor ordering.
//!
//! Edges are stored once as `(u, v)` with `u < v`, sorted; an edge's index in
//! that sorted list is its *edge id*. Neighbor lists are kept in ascending node
//! id order, which is also the fixed neighbor ordering used when building
//! self-avoiding walk trees.

use std::collections::VecDeque;

use crate::error::{Error, Result};

/// An undirected simple graph on nodes `0..n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
    adj: Vec<Vec<usize>>,
    adj_edge: Vec<Vec<usize>>,
}

impl Graph {
    /// Builds a graph, rejecting self-loops, duplicate edges and out-of-range
    /// endpoints. Edge endpoints may be given in either order.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut canon: Vec<(usize, usize)> = Vec::new();
        for (a, b) in edges {
            if a >= n || b >= n {
                return Err(Error::InvalidGraph(format!(
                    "edge ({a}, {b}) out of range for {n} nodes"
                )));
            }
            if a == b {
                return Err(Error::InvalidGraph(format!("self-loop at node {a}")));
            }
            canon.push((a.min(b), a.max(b)));
        }
        canon.sort_unstable();
        if let Some(w) = canon.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidGraph(format!("duplicate edge ({}, {})", w[0].0, w[0].1)));
        }
        let mut adj = vec![Vec::new(); n];
        for (id, &(u, v)) in canon.iter().enumerate() {
            adj[u].push((v, id));
            adj[v].push((u, id));
        }
        let (adj, adj_edge): (Vec<Vec<usize>>, Vec<Vec<usize>>) = adj
            .into_iter()
            .map(|mut list: Vec<(usize, usize)>| {
                list.sort_unstable();
                list.into_iter().unzip()
            })
            .unzip();
        Ok(Graph {
            n,
            edges: canon,
            adj,
            adj_edge,
        })
    }

    /// Graph with `n` nodes and no edges.
    pub fn empty(n: usize) -> Self {
        Graph {
            n,
            edges: Vec::new(),
            adj: vec![Vec::new(); n],
            adj_edge: vec![Vec::new(); n],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    /// Canonical edge list, sorted, each with `u < v`.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge(&self, id: usize) -> (usize, usize) {
        self.edges[id]
    }

    /// Neighbors of `v` in ascending id order.
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    /// Edge ids incident to `v`, parallel to [`Graph::neighbors`].
    pub fn incident_edges(&self, v: usize) -> &[usize] {
        &self.adj_edge[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    /// Maximum vertex degree `d*` (0 for an empty graph).
    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Id of the edge joining `u` and `v`, if present.
    pub fn edge_id(&self, u: usize, v: usize) -> Option<usize> {
        if u >= self.n || v >= self.n {
            return None;
        }
        let key = (u.min(v), u.max(v));
        self.edges.binary_search(&key).ok()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.edge_id(u, v).is_some()
    }

    /// Shortest-path hop distances from `src`; `None` for unreachable nodes.
    pub fn bfs_distances(&self, src: usize) -> Vec<Option<usize>> {
        self.bfs_distances_bounded(src, usize::MAX)
    }

    /// BFS distances from `src`, exploring no further than `max_depth` hops.
    pub fn bfs_distances_bounded(&self, src: usize, max_depth: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.n];
        dist[src] = Some(0);
        let mut queue = VecDeque::from([src]);
        while let Some(u) = queue.pop_front() {
            let du = dist[u].unwrap_or(0);
            if du >= max_depth {
                continue;
            }
            for &w in &self.adj[u] {
                if dist[w].is_none() {
                    dist[w] = Some(du + 1);
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// All-pairs hop distances (`None` across components).
    pub fn all_pairs_distances(&self) -> Vec<Vec<Option<usize>>> {
        (0..self.n).map(|v| self.bfs_distances(v)).collect()
    }

    /// The open ball `{u : d(u, v) < r}`, sorted ascending.
    pub fn ball(&self, v: usize, r: f64) -> Vec<usize> {
        if r <= 0.0 {
            return Vec::new();
        }
        // d < r over integers means d <= ceil(r) - 1
        let reach = (r.ceil() as usize).saturating_sub(1);
        self.bfs_distances_bounded(v, reach)
            .iter()
            .enumerate()
            .filter_map(|(u, d)| d.filter(|&d| (d as f64) < r).map(|_| u))
            .collect()
    }

    /// Connected components, each sorted, ordered by their smallest node.
    pub fn connected_components(&self) -> Vec<Vec<usize>> {
        self.components_filtered(|_| true, |_| true)
    }

    /// Components of `(V, E \ B)` where `removed[e]` marks edge `e` in `B`.
    pub fn components_without_edges(&self, removed: &[bool]) -> Vec<Vec<usize>> {
        self.components_filtered(|_| true, |e| !removed[e])
    }

    /// Components of the subgraph induced on nodes with `removed[v] == false`.
    pub fn components_without_nodes(&self, removed: &[bool]) -> Vec<Vec<usize>> {
        self.components_filtered(|v| !removed[v], |_| true)
    }

    fn components_filtered(
        &self,
        keep_node: impl Fn(usize) -> bool,
        keep_edge: impl Fn(usize) -> bool,
    ) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.n];
        let mut out = Vec::new();
        for s in 0..self.n {
            if seen[s] || !keep_node(s) {
                continue;
            }
            seen[s] = true;
            let mut comp = vec![s];
            let mut queue = VecDeque::from([s]);
            while let Some(u) = queue.pop_front() {
                for (&w, &e) in self.adj[u].iter().zip(&self.adj_edge[u]) {
                    if !seen[w] && keep_node(w) && keep_edge(e) {
                        seen[w] = true;
                        comp.push(w);
                        queue.push_back(w);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    /// Subgraph induced on `nodes` (any order; duplicates rejected). Returns
    /// the relabelled graph and the local-to-global id map, which lists
    /// `nodes` in ascending order.
    pub fn induced_subgraph(&self, nodes: &[usize]) -> Result<(Graph, Vec<usize>)> {
        let mut map: Vec<usize> = nodes.to_vec();
        map.sort_unstable();
        if map.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidGraph("duplicate node in node set".into()));
        }
        if map.last().is_some_and(|&v| v >= self.n) {
            return Err(Error::InvalidGraph("node set out of range".into()));
        }
        let mut local = vec![usize::MAX; self.n];
        for (i, &v) in map.iter().enumerate() {
            local[v] = i;
        }
        let edges = self
            .edges
            .iter()
            .filter(|&&(u, v)| local[u] != usize::MAX && local[v] != usize::MAX)
            .map(|&(u, v)| (local[u], local[v]));
        Ok((Graph::new(map.len(), edges)?, map))
    }

    /// Edge ids with both endpoints in `nodes` (given sorted or not).
    pub fn induced_edge_ids(&self, nodes: &[usize]) -> Vec<usize> {
        let mut member = vec![false; self.n];
        for &v in nodes {
            member[v] = true;
        }
        (0..self.edges.len())
            .filter(|&e| {
                let (u, v) = self.edges[e];
                member[u] && member[v]
            })
            .collect()
    }

    /// `|E| - |V| + c`: number of independent cycles.
    pub fn cyclomatic_number(&self) -> usize {
        self.edges.len() + self.connected_components().len() - self.n
    }

    /// Longest finite shortest-path distance.
    pub fn diameter(&self) -> usize {
        (0..self.n)
            .flat_map(|v| self.bfs_distances(v).into_iter().flatten())
            .max()
            .unwrap_or(0)
    }

    pub fn is_connected(&self) -> bool {
        self.n <= 1 || self.connected_components().len() == 1
    }
}

/// The graph of edges: one node per edge of `graph` (numbered by edge id),
/// adjacent iff the two edges share an endpoint.
pub fn line_graph(graph: &Graph) -> Graph {
    let mut pairs = Vec::new();
    for v in 0..graph.n() {
        let inc = graph.incident_edges(v);
        for (i, &a) in inc.iter().enumerate() {
            for &b in &inc[i + 1..] {
                pairs.push((a.min(b), a.max(b)));
            }
        }
    }
    // two edges share at most one endpoint in a simple graph
    Graph::new(graph.num_edges(), pairs).expect("line graph of a simple graph is simple")
}
