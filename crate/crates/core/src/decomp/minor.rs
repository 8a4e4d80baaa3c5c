use std::collections::VecDeque;

use rand::Rng as _;

use super::{DecompParams, EdgeDecomposition, VertexDecomposition};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::rng;

#[derive(Clone, Copy, PartialEq, Eq)]
enum Cut {
    Nodes,
    Edges,
}

fn check(r: usize, lambda: usize) -> Result<()> {
    if r < 1 {
        return Err(Error::Domain("number of rounds r must be at least 1".into()));
    }
    if lambda < 1 {
        return Err(Error::Domain("layer period lambda must be at least 1".into()));
    }
    Ok(())
}

/// BFS depths from `root` over surviving nodes and edges, neighbors in
/// ascending id order.
fn depths(graph: &Graph, root: usize, node_gone: &[bool], edge_gone: &[bool]) -> Vec<Option<usize>> {
    let mut depth = vec![None; graph.n()];
    depth[root] = Some(0);
    let mut queue = VecDeque::from([root]);
    while let Some(u) = queue.pop_front() {
        let du = depth[u].expect("queued nodes have a depth");
        for (&w, &e) in graph.neighbors(u).iter().zip(graph.incident_edges(u)) {
            if depth[w].is_none() && !node_gone[w] && !edge_gone[e] {
                depth[w] = Some(du + 1);
                queue.push_back(w);
            }
        }
    }
    depth
}

/// `r` rounds of layer cutting. `level(round, component)` supplies the offset
/// `L` for each component of the current graph (components ordered by their
/// smallest node, BFS rooted at that node).
fn layer_cut(
    graph: &Graph,
    r: usize,
    lambda: usize,
    cut: Cut,
    level: &mut dyn FnMut(usize, usize) -> usize,
) -> Result<(Vec<bool>, Vec<bool>)> {
    let mut node_gone = vec![false; graph.n()];
    let mut edge_gone = vec![false; graph.num_edges()];
    for round in 0..r {
        let comps = match cut {
            Cut::Nodes => graph.components_without_nodes(&node_gone),
            Cut::Edges => graph.components_without_edges(&edge_gone),
        };
        let mut node_cut = Vec::new();
        let mut edge_cut = Vec::new();
        for (j, comp) in comps.iter().enumerate() {
            let l = level(round, j);
            if l >= lambda {
                return Err(Error::Domain(format!("level offset {l} outside 0..{lambda}")));
            }
            let depth = depths(graph, comp[0], &node_gone, &edge_gone);
            match cut {
                Cut::Nodes => node_cut.extend(
                    comp.iter()
                        .copied()
                        .filter(|&v| depth[v].is_some_and(|d| d % lambda == l)),
                ),
                Cut::Edges => {
                    for &u in comp {
                        for (&w, &e) in graph.neighbors(u).iter().zip(graph.incident_edges(u)) {
                            if u < w && !edge_gone[e] {
                                let (du, dw) = (depth[u], depth[w]);
                                let lower = du.zip(dw).map(|(a, b)| a.min(b));
                                if lower.is_some_and(|d| d % lambda == l) {
                                    edge_cut.push(e);
                                }
                            }
                        }
                    }
                }
            }
        }
        for v in node_cut {
            node_gone[v] = true;
        }
        for e in edge_cut {
            edge_gone[e] = true;
        }
    }
    Ok((node_gone, edge_gone))
}

fn random_levels(seed: u64, lambda: usize) -> impl FnMut(usize, usize) -> usize {
    move |round, comp| rng::stream(seed, round as u32, comp as u32).gen_range(0..lambda)
}

/// Node decomposition for minor-excluded graphs: `r` rounds; in each, every
/// component is BFS-layered from its smallest node and the layers
/// `L, L + Λ, L + 2Λ, ...` are removed, `L` uniform in `0..Λ`.
pub fn minor_v(graph: &Graph, r: usize, lambda: usize, seed: u64) -> Result<VertexDecomposition> {
    check(r, lambda)?;
    let (nodes, _) = layer_cut(graph, r, lambda, Cut::Nodes, &mut random_levels(seed, lambda))?;
    Ok(VertexDecomposition::from_mask(
        graph,
        &nodes,
        DecompParams::MinorV { r, lambda, seed },
    ))
}

/// [`minor_v`] with caller-chosen offsets `level(round, component)`.
/// The recorded seed is 0.
pub fn minor_v_with_levels(
    graph: &Graph,
    r: usize,
    lambda: usize,
    mut level: impl FnMut(usize, usize) -> usize,
) -> Result<VertexDecomposition> {
    check(r, lambda)?;
    let (nodes, _) = layer_cut(graph, r, lambda, Cut::Nodes, &mut level)?;
    Ok(VertexDecomposition::from_mask(
        graph,
        &nodes,
        DecompParams::MinorV { r, lambda, seed: 0 },
    ))
}

/// Edge decomposition for minor-excluded graphs. Like [`minor_v`], but each
/// round removes every surviving edge whose shallower endpoint sits at a depth
/// `≡ L (mod Λ)`, tree edges and non-tree edges alike.
pub fn minor_e(graph: &Graph, r: usize, lambda: usize, seed: u64) -> Result<EdgeDecomposition> {
    check(r, lambda)?;
    let (_, edges) = layer_cut(graph, r, lambda, Cut::Edges, &mut random_levels(seed, lambda))?;
    Ok(EdgeDecomposition::from_mask(
        graph,
        &edges,
        DecompParams::MinorE { r, lambda, seed },
    ))
}

/// [`minor_e`] with caller-chosen offsets `level(round, component)`.
/// The recorded seed is 0.
pub fn minor_e_with_levels(
    graph: &Graph,
    r: usize,
    lambda: usize,
    mut level: impl FnMut(usize, usize) -> usize,
) -> Result<EdgeDecomposition> {
    check(r, lambda)?;
    let (_, edges) = layer_cut(graph, r, lambda, Cut::Edges, &mut level)?;
    Ok(EdgeDecomposition::from_mask(
        graph,
        &edges,
        DecompParams::MinorE { r, lambda, seed: 0 },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::gen_grid;

    fn path(n: usize) -> Graph {
        Graph::new(n, (0..n - 1).map(|i| (i, i + 1))).unwrap()
    }

    #[test]
    fn minor_v_line_first_round() {
        // nodes 1..9 in one-based labels are 0..8 here
        let d = minor_v_with_levels(&path(9), 1, 3, |_, _| 1).unwrap();
        assert_eq!(d.removed, vec![1, 4, 7]);
        assert_eq!(d.components, vec![vec![0], vec![2, 3], vec![5, 6], vec![8]]);
    }

    #[test]
    fn minor_v_lambda_one_removes_everything() {
        let g = gen_grid(3);
        let d = minor_v(&g, 2, 1, 5).unwrap();
        assert_eq!(d.removed.len(), 9);
        assert!(d.components.is_empty());
    }

    #[test]
    fn minor_e_line_first_round() {
        let g = path(9);
        let d = minor_e_with_levels(&g, 1, 3, |_, _| 1).unwrap();
        let cut: Vec<_> = d.removed_edges.iter().map(|&e| g.edge(e)).collect();
        assert_eq!(cut, vec![(1, 2), (4, 5), (7, 8)]);
        assert!(d.components.iter().all(|c| c.len() <= 3));
    }

    #[test]
    fn minor_e_lambda_one_on_triangle() {
        let tri = Graph::new(3, [(0, 1), (1, 2), (0, 2)]).unwrap();
        let d = minor_e(&tri, 1, 1, 9).unwrap();
        assert_eq!(d.removed_edges, vec![0, 1, 2]);
    }

    #[test]
    fn minor_e_cuts_non_tree_edges() {
        // 4-cycle rooted at 0: depth(1)=depth(3)=1, depth(2)=2; with L=1 both
        // edges into node 2 go, including the non-tree one
        let c4 = Graph::new(4, [(0, 1), (1, 2), (2, 3), (0, 3)]).unwrap();
        let d = minor_e_with_levels(&c4, 1, 2, |_, _| 1).unwrap();
        let cut: Vec<_> = d.removed_edges.iter().map(|&e| c4.edge(e)).collect();
        assert_eq!(cut, vec![(1, 2), (2, 3)]);
    }

    #[test]
    fn second_round_works_per_component() {
        let g = path(9);
        // round 0 cuts with L=1, round 1 with L=0 removes each component root
        let d = minor_v_with_levels(&g, 2, 3, |round, _| if round == 0 { 1 } else { 0 }).unwrap();
        assert_eq!(d.removed, vec![0, 1, 2, 4, 5, 7, 8]);
        assert_eq!(d.components, vec![vec![3], vec![6]]);
    }

    #[test]
    fn rejects_bad_level() {
        assert!(minor_e_with_levels(&path(4), 1, 2, |_, _| 2).is_err());
        assert!(minor_e(&path(4), 0, 2, 0).is_err());
    }

    #[test]
    fn deterministic_and_consistent() {
        let g = gen_grid(5);
        let a = minor_e(&g, 3, 4, 17).unwrap();
        assert_eq!(a, minor_e(&g, 3, 4, 17).unwrap());
        assert_eq!(a.components, g.components_without_edges(&a.removed_mask(g.num_edges())));
        let v = minor_v(&g, 3, 4, 17).unwrap();
        let mut mask = vec![false; g.n()];
        v.removed.iter().for_each(|&x| mask[x] = true);
        assert_eq!(v.components, g.components_without_nodes(&mask));
    }
}
