//! Rectangular grid and cris-cross layouts.
//!
//! Node `(x, y)` has id `y * width + x`, so ids run row by row. A cris-cross
//! graph adds both diagonals of every unit cell to the grid, giving interior
//! nodes four extra neighbors.

use crate::error::{Error, Result};
use crate::graph::Graph;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridLayout {
    pub width: usize,
    pub height: usize,
    pub criscross: bool,
}

/// How an edge of a grid or cris-cross graph is oriented.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeKind {
    /// `(x, y) - (x + 1, y)`
    Horizontal,
    /// `(x, y) - (x, y + 1)`
    Vertical,
    /// `(x, y) - (x + 1, y + 1)`
    Diagonal,
    /// `(x + 1, y) - (x, y + 1)`
    AntiDiagonal,
}

impl GridLayout {
    pub fn grid(width: usize, height: usize) -> Self {
        GridLayout {
            width,
            height,
            criscross: false,
        }
    }

    pub fn criscross(width: usize, height: usize) -> Self {
        GridLayout {
            width,
            height,
            criscross: true,
        }
    }

    pub fn n(&self) -> usize {
        self.width * self.height
    }

    pub fn id(&self, x: usize, y: usize) -> usize {
        y * self.width + x
    }

    pub fn coords(&self, id: usize) -> (usize, usize) {
        (id % self.width, id / self.width)
    }

    pub fn edge_list(&self) -> Vec<(usize, usize)> {
        let (w, h) = (self.width, self.height);
        let mut edges = Vec::new();
        for y in 0..h {
            for x in 0..w {
                if x + 1 < w {
                    edges.push((self.id(x, y), self.id(x + 1, y)));
                }
                if y + 1 < h {
                    edges.push((self.id(x, y), self.id(x, y + 1)));
                }
                if self.criscross && x + 1 < w && y + 1 < h {
                    edges.push((self.id(x, y), self.id(x + 1, y + 1)));
                    edges.push((self.id(x + 1, y), self.id(x, y + 1)));
                }
            }
        }
        edges
    }

    pub fn graph(&self) -> Graph {
        Graph::new(self.n(), self.edge_list()).expect("lattice edges are simple")
    }

    /// Classifies the edge `(u, v)`, `u < v`; `None` if it is not a lattice edge.
    pub fn edge_kind(&self, u: usize, v: usize) -> Option<EdgeKind> {
        let ((ux, uy), (vx, vy)) = (self.coords(u.min(v)), self.coords(u.max(v)));
        match (vx as i64 - ux as i64, vy as i64 - uy as i64) {
            (1, 0) => Some(EdgeKind::Horizontal),
            (0, 1) => Some(EdgeKind::Vertical),
            (1, 1) if self.criscross => Some(EdgeKind::Diagonal),
            (-1, 1) if self.criscross => Some(EdgeKind::AntiDiagonal),
            _ => None,
        }
    }

    /// Checks that `graph` is exactly this layout's graph.
    pub fn check(&self, graph: &Graph) -> Result<()> {
        if graph.n() != self.n() || graph.edges() != self.graph().edges() {
            return Err(Error::UnsupportedTopology(format!(
                "graph is not the {}x{} {}",
                self.width,
                self.height,
                if self.criscross { "cris-cross" } else { "grid" }
            )));
        }
        Ok(())
    }

    /// Recognizes a square grid or cris-cross graph.
    pub fn detect_square(graph: &Graph) -> Option<GridLayout> {
        let side = (graph.n() as f64).sqrt().round() as usize;
        if side < 2 || side * side != graph.n() {
            return None;
        }
        [GridLayout::grid(side, side), GridLayout::criscross(side, side)]
            .into_iter()
            .find(|l| l.check(graph).is_ok())
    }
}

/// The `n x n` grid.
pub fn gen_grid(n: usize) -> Graph {
    GridLayout::grid(n, n).graph()
}

/// The `n x n` cris-cross graph.
pub fn gen_criscross(n: usize) -> Graph {
    GridLayout::criscross(n, n).graph()
}
