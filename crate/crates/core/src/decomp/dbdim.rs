use rand::Rng as _;

use super::{DecompParams, EdgeDecomposition, VertexDecomposition};
use crate::error::{Error, Result};
use crate::graph::{line_graph, Graph};
use crate::rng::{self, Rng};

/// Truncated geometric law on `{1..K}`:
/// `Pr[Q = i] = ε(1-ε)^(i-1)` for `i < K`, and the remaining mass at `K`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadiusLaw {
    eps: f64,
    k: usize,
}

impl RadiusLaw {
    pub fn new(eps: f64, k: usize) -> Result<Self> {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::Domain(format!("eps must lie in (0, 1), got {eps}")));
        }
        if k < 1 {
            return Err(Error::Domain("truncation level K must be at least 1".into()));
        }
        Ok(RadiusLaw { eps, k })
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn pmf(&self, i: usize) -> f64 {
        if i == 0 || i > self.k {
            0.0
        } else if i < self.k {
            self.eps * (1.0 - self.eps).powi(i as i32 - 1)
        } else {
            1.0 - (1..self.k).map(|j| self.pmf(j)).sum::<f64>()
        }
    }

    /// Inverse-CDF draw using one uniform from `rng`.
    pub fn sample(&self, rng: &mut Rng) -> usize {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        let mut mass = self.eps;
        for i in 1..self.k {
            acc += mass;
            if u < acc {
                return i;
            }
            mass *= 1.0 - self.eps;
        }
        self.k
    }
}

/// `K(ε, ρ) = ⌈(12ρ/ε) ln(24ρ/ε)⌉`, floored at 3.
pub fn k_param(eps: f64, rho: f64) -> Result<usize> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Domain(format!("eps must lie in (0, 1), got {eps}")));
    }
    if !(rho >= 1.0 && rho.is_finite()) {
        return Err(Error::Domain(format!("rho must be finite and >= 1, got {rho}")));
    }
    let k = (12.0 * rho / eps) * (24.0 * rho / eps).ln();
    Ok((k.ceil() as usize).max(3))
}

/// One carving step: the chosen center and its drawn radius.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CarveStep {
    pub center: usize,
    pub radius: usize,
}

/// Full trace of a ball-carving run.
#[derive(Debug, Clone, PartialEq)]
pub struct Carving {
    pub removed: Vec<bool>,
    pub steps: Vec<CarveStep>,
}

/// Ball carving: repeatedly pick a uniformly random white node `u`, draw
/// `Q ~ law`, turn white nodes at distance exactly `Q` blue (removed) and white
/// nodes at distance `< Q` red. Distances are measured in the whole graph.
pub fn db_dim_carve(graph: &Graph, law: &RadiusLaw, rng: &mut Rng) -> Carving {
    let n = graph.n();
    let mut white: Vec<usize> = (0..n).collect();
    let mut pos: Vec<usize> = (0..n).collect();
    let mut removed = vec![false; n];
    let mut steps = Vec::new();
    while !white.is_empty() {
        let center = white[rng.gen_range(0..white.len())];
        let radius = law.sample(rng);
        steps.push(CarveStep { center, radius });
        let dist = graph.bfs_distances_bounded(center, radius);
        for (w, d) in dist.into_iter().enumerate() {
            let Some(d) = d else { continue };
            let p = pos[w];
            if p == usize::MAX {
                continue;
            }
            if d == radius {
                removed[w] = true;
            }
            // colored blue or red: drop from the white list
            let last = *white.last().expect("non-empty");
            white.swap_remove(p);
            if last != w {
                pos[last] = p;
            }
            pos[w] = usize::MAX;
        }
    }
    Carving { removed, steps }
}

/// Vertex decomposition by ball carving with radius law `(eps, k)`.
pub fn db_dim_vertex(graph: &Graph, eps: f64, k: usize, seed: u64) -> Result<VertexDecomposition> {
    let law = RadiusLaw::new(eps, k)?;
    let carving = db_dim_carve(graph, &law, &mut rng::main_stream(seed));
    Ok(VertexDecomposition::from_mask(
        graph,
        &carving.removed,
        DecompParams::DbDim { eps, k, seed },
    ))
}

/// Edge decomposition: ball carving on the line graph, removed line-graph
/// nodes mapped back to edges.
pub fn db_dim_edge(graph: &Graph, eps: f64, k: usize, seed: u64) -> Result<EdgeDecomposition> {
    let law = RadiusLaw::new(eps, k)?;
    let lg = line_graph(graph);
    let carving = db_dim_carve(&lg, &law, &mut rng::main_stream(seed));
    Ok(EdgeDecomposition::from_mask(
        graph,
        &carving.removed,
        DecompParams::DbDim { eps, k, seed },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::gen_grid;

    #[test]
    fn k_param_values() {
        assert_eq!(k_param(1.0 - 1e-9, 1.0).unwrap(), 39);
        assert_eq!(k_param(0.5, 1.0).unwrap(), 93);
        assert!(k_param(0.0, 1.0).is_err());
        assert!(k_param(0.5, 0.5).is_err());
    }

    #[test]
    fn k_param_monotone_in_eps() {
        let mut prev = 0;
        for i in (1..100).rev() {
            let k = k_param(i as f64 / 100.0, 2.0).unwrap();
            assert!(k >= prev);
            prev = k;
        }
    }

    #[test]
    fn pmf_sums_to_one() {
        for (eps, k) in [(0.3, 5), (0.9, 2), (0.01, 50), (0.5, 1)] {
            let law = RadiusLaw::new(eps, k).unwrap();
            let total: f64 = (1..=k).map(|i| law.pmf(i)).sum();
            assert!((total - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn k_one_always_one() {
        let law = RadiusLaw::new(0.4, 1).unwrap();
        let mut rng = rng::main_stream(3);
        assert!((0..1000).all(|_| law.sample(&mut rng) == 1));
    }

    #[test]
    fn sample_frequencies() {
        let law = RadiusLaw::new(0.3, 5).unwrap();
        let mut rng = rng::main_stream(11);
        let trials = 100_000;
        let mut counts = [0usize; 6];
        for _ in 0..trials {
            counts[law.sample(&mut rng)] += 1;
        }
        for (i, p) in [(1, 0.3), (5, 0.7f64.powi(4))] {
            let freq = counts[i] as f64 / trials as f64;
            let sigma = (p * (1.0 - p) / trials as f64).sqrt();
            assert!((freq - p).abs() <= 3.0 * sigma, "i={i} freq={freq} p={p}");
        }
    }

    #[test]
    fn single_node() {
        let d = db_dim_vertex(&Graph::empty(1), 0.5, 3, 0).unwrap();
        assert!(d.removed.is_empty());
        assert_eq!(d.components, vec![vec![0]]);
    }

    #[test]
    fn complete_graph_trace() {
        let m = 5;
        let edges = (0..m).flat_map(|a| (a + 1..m).map(move |b| (a, b)));
        let g = Graph::new(m, edges).unwrap();
        let law = RadiusLaw::new(0.5, 4).unwrap();
        for seed in 0..50 {
            let c = db_dim_carve(&g, &law, &mut rng::main_stream(seed));
            // one step colors everything: all nodes are within distance 1
            assert_eq!(c.steps.len(), 1);
            let step = c.steps[0];
            let expect: Vec<bool> = (0..m).map(|v| step.radius == 1 && v != step.center).collect();
            assert_eq!(c.removed, expect);
        }
    }

    #[test]
    fn components_inside_carved_balls() {
        let g = gen_grid(6);
        let law = RadiusLaw::new(0.3, 4).unwrap();
        for seed in 0..200 {
            let c = db_dim_carve(&g, &law, &mut rng::main_stream(seed));
            for comp in g.components_without_nodes(&c.removed) {
                assert!(c.steps.iter().any(|s| {
                    let d = g.bfs_distances(s.center);
                    comp.iter().all(|&v| d[v].is_some_and(|d| d < s.radius))
                }));
            }
        }
    }

    #[test]
    fn deterministic() {
        let g = gen_grid(5);
        assert_eq!(
            db_dim_edge(&g, 0.3, 6, 42).unwrap(),
            db_dim_edge(&g, 0.3, 6, 42).unwrap()
        );
    }

    #[test]
    fn edge_version_populates_certificate() {
        let tree = Graph::new(5, [(0, 1), (1, 2), (1, 3), (3, 4)]).unwrap();
        let d = db_dim_edge(&tree, 0.99, 3, 1).unwrap();
        assert_eq!(d.certificate.target_eps, 1.0);
        assert_eq!(
            d.certificate.max_component,
            d.components.iter().map(Vec::len).max().unwrap()
        );
        assert_eq!(d.components, tree.components_without_edges(&d.removed_mask(4)));
    }
}
