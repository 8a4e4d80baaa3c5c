//! Shortest-path metric queries and exact doubling dimension on tiny graphs.

use crate::error::{Error, Result};
use crate::graph::Graph;

/// Default node cap for [`doubling_dimension_exact`].
pub const DOUBLING_DEFAULT_CAP: usize = 12;

/// All-pairs hop distances of a graph, `None` across components.
#[derive(Debug, Clone)]
pub struct MetricView {
    dist: Vec<Vec<Option<usize>>>,
}

impl MetricView {
    pub fn new(graph: &Graph) -> Self {
        MetricView {
            dist: graph.all_pairs_distances(),
        }
    }

    pub fn n(&self) -> usize {
        self.dist.len()
    }

    pub fn distance(&self, i: usize, j: usize) -> Option<usize> {
        self.dist[i][j]
    }

    /// `{u : d(u, v) < r}`, sorted.
    pub fn ball(&self, v: usize, r: f64) -> Vec<usize> {
        (0..self.n())
            .filter(|&u| self.dist[v][u].is_some_and(|d| (d as f64) < r))
            .collect()
    }

    fn ball_mask(&self, v: usize, r: f64) -> u128 {
        self.ball(v, r).iter().fold(0u128, |m, &u| m | (1u128 << u))
    }

    pub fn diameter(&self) -> usize {
        self.dist
            .iter()
            .flat_map(|row| row.iter().flatten())
            .copied()
            .max()
            .unwrap_or(0)
    }
}

/// Doubling dimension in log2 form: `log2` of the worst case, over centers `v`
/// and radii `r`, of the fewest radius-`r/2` balls covering `B(v, r)`.
///
/// Radii range over the half-integers up to `diameter + 1`; every other radius
/// produces the same balls as one of these. The covering search is exhaustive,
/// so graphs above `cap` nodes are refused.
pub fn doubling_dimension_exact(graph: &Graph, cap: usize) -> Result<f64> {
    let n = graph.n();
    if n > cap || n > 128 {
        return Err(Error::CapExceeded {
            what: "exponential operation: exact doubling dimension".into(),
            needed: n as u128,
            cap: cap.min(128) as u128,
        });
    }
    if n == 0 {
        return Ok(0.0);
    }
    let metric = MetricView::new(graph);
    let diam = metric.diameter();
    let mut worst = 1usize;
    for step in 1..=(2 * (diam + 1)) {
        let r = step as f64 / 2.0;
        let halves: Vec<u128> = (0..n).map(|y| metric.ball_mask(y, r / 2.0)).collect();
        for v in 0..n {
            let target = metric.ball_mask(v, r);
            let cover = min_cover(target, &halves);
            worst = worst.max(cover);
        }
    }
    Ok((worst as f64).log2())
}

/// Fewest sets from `sets` whose union contains `target`.
fn min_cover(target: u128, sets: &[u128]) -> usize {
    let mut cands: Vec<u128> = sets.iter().map(|s| s & target).filter(|&s| s != 0).collect();
    cands.sort_unstable_by_key(|s| std::cmp::Reverse(s.count_ones()));
    cands.dedup();
    // drop sets contained in another candidate
    let mut kept: Vec<u128> = Vec::new();
    for &s in &cands {
        if !kept.iter().any(|&k| k & s == s) {
            kept.push(s);
        }
    }
    let largest = kept.first().map_or(1, |s| s.count_ones()) as usize;
    let mut k = (target.count_ones() as usize).div_ceil(largest).max(1);
    loop {
        if cover_within(target, &kept, k, largest) {
            return k;
        }
        k += 1;
    }
}

fn cover_within(uncovered: u128, sets: &[u128], budget: usize, largest: usize) -> bool {
    if uncovered == 0 {
        return true;
    }
    if budget == 0 || largest * budget < uncovered.count_ones() as usize {
        return false;
    }
    // branch on the uncovered element with the fewest covering sets
    let mut best: Option<(u32, usize)> = None;
    let mut rest = uncovered;
    while rest != 0 {
        let bit = rest.trailing_zeros();
        rest &= rest - 1;
        let count = sets.iter().filter(|&&s| s >> bit & 1 == 1).count();
        if best.is_none_or(|(_, c)| count < c) {
            best = Some((bit, count));
        }
    }
    let (bit, _) = best.expect("non-empty");
    sets.iter()
        .filter(|&&s| s >> bit & 1 == 1)
        .any(|&s| cover_within(uncovered & !s, sets, budget - 1, largest))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(n: usize) -> Graph {
        Graph::new(n, (0..n - 1).map(|i| (i, i + 1))).unwrap()
    }

    #[test]
    fn single_node_is_zero() {
        assert_eq!(doubling_dimension_exact(&Graph::empty(1), 12).unwrap(), 0.0);
    }

    #[test]
    fn complete_graph_k4() {
        let k4 = Graph::new(4, [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]).unwrap();
        assert_eq!(doubling_dimension_exact(&k4, 12).unwrap(), 2.0);
    }

    #[test]
    fn refuses_above_cap() {
        let err = doubling_dimension_exact(&path(13), 12).unwrap_err();
        assert!(matches!(err, Error::CapExceeded { .. }));
        assert!(err.to_string().contains("exponential operation"));
    }

    #[test]
    fn min_cover_small() {
        assert_eq!(min_cover(0b111, &[0b001, 0b010, 0b100]), 3);
        assert_eq!(min_cover(0b111, &[0b011, 0b110, 0b100]), 2);
    }
}
