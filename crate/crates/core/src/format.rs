//! Line-oriented MRF text format, version 1.
//!
//! ```text
//! mrf <n> <sigma>
//! node <id> <phi_0> ... <phi_{sigma-1}>        (n lines, ids 0..n in order)
//! edge <u> <v> <psi_00> <psi_01> ... <psi_{(sigma-1)(sigma-1)}>   (u < v)
//! ```
//!
//! Edge tables are row-major in `(x_u, x_v)`. Everything after `#` on a line
//! is a comment. Floats are written in scientific notation with 17
//! significant digits, which reads back to the identical `f64`.
//!
//! Plain graphs use `graph <n>` followed by `edge <u> <v>` lines. Graph
//! readers also accept an MRF file and keep only its structure.
//!
//! Decompositions are written as
//!
//! ```text
//! decomposition <edge|vertex> <n> <scheme> [key=value ...]
//! removed <u> <v>        (edge decompositions, by edge id)
//! removed <v>            (vertex decompositions)
//! component <v_1> ... <v_s>
//! ```

use std::fmt::Write as _;

use crate::decomp::{DecompParams, EdgeDecomposition, VertexDecomposition};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::mrf::PairwiseMrf;

/// Formats a float with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_mrf(mrf: &PairwiseMrf) -> String {
    let mut out = String::new();
    let q = mrf.states();
    writeln!(out, "mrf {} {}", mrf.n(), q).unwrap();
    for v in 0..mrf.n() {
        out.push_str(&format!("node {v}"));
        for &x in mrf.phi_table(v) {
            out.push(' ');
            out.push_str(&fmt_f64(x));
        }
        out.push('\n');
    }
    for (e, &(u, v)) in mrf.graph().edges().iter().enumerate() {
        out.push_str(&format!("edge {u} {v}"));
        for &x in mrf.psi_table(e) {
            out.push(' ');
            out.push_str(&fmt_f64(x));
        }
        out.push('\n');
    }
    out
}

pub fn read_mrf(text: &str) -> Result<PairwiseMrf> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());

    let (hline, header) = lines.next().ok_or(Error::Parse {
        line: 0,
        msg: "empty input".into(),
    })?;
    let h: Vec<&str> = header.split_whitespace().collect();
    if h.len() != 3 || h[0] != "mrf" {
        return Err(perr(hline, "expected `mrf <n> <sigma>`"));
    }
    let n: usize = parse_num(h[1], hline)?;
    let q: usize = parse_num(h[2], hline)?;

    let mut nodes = Vec::with_capacity(n);
    for expect in 0..n {
        let (ln, l) = lines
            .next()
            .ok_or_else(|| perr(0, &format!("missing node line for node {expect}")))?;
        let t: Vec<&str> = l.split_whitespace().collect();
        if t.first() != Some(&"node") {
            return Err(perr(ln, "expected a `node` line"));
        }
        let id: usize = parse_num(t.get(1).copied().unwrap_or(""), ln)?;
        if id != expect {
            return Err(perr(ln, &format!("node id {id} out of order, expected {expect}")));
        }
        if t.len() != 2 + q {
            return Err(perr(ln, &format!("node line needs {q} values")));
        }
        nodes.push(parse_floats(&t[2..], ln)?);
    }

    let mut edges = Vec::new();
    for (ln, l) in lines {
        let t: Vec<&str> = l.split_whitespace().collect();
        if t.first() != Some(&"edge") {
            return Err(perr(ln, "expected an `edge` line"));
        }
        if t.len() != 3 + q * q {
            return Err(perr(ln, &format!("edge line needs {} values", q * q)));
        }
        let u: usize = parse_num(t[1], ln)?;
        let v: usize = parse_num(t[2], ln)?;
        if u >= v {
            return Err(perr(ln, "edge endpoints must satisfy u < v"));
        }
        edges.push((u, v, parse_floats(&t[3..], ln)?));
    }
    PairwiseMrf::from_edge_list(n, q, nodes, edges)
}

pub fn write_graph(graph: &Graph) -> String {
    let mut out = format!("graph {}\n", graph.n());
    for &(u, v) in graph.edges() {
        writeln!(out, "edge {u} {v}").unwrap();
    }
    out
}

/// Reads a plain graph file or the structure of an MRF file.
pub fn read_graph(text: &str) -> Result<Graph> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());
    let (hline, header) = lines.next().ok_or_else(|| perr(0, "empty input"))?;
    if header.starts_with("mrf") {
        return Ok(read_mrf(text)?.graph().clone());
    }
    let h: Vec<&str> = header.split_whitespace().collect();
    if h.len() != 2 || h[0] != "graph" {
        return Err(perr(hline, "expected `graph <n>` or `mrf <n> <sigma>`"));
    }
    let n: usize = parse_num(h[1], hline)?;
    let mut edges = Vec::new();
    for (ln, l) in lines {
        let t: Vec<&str> = l.split_whitespace().collect();
        if t.len() != 3 || t[0] != "edge" {
            return Err(perr(ln, "expected `edge <u> <v>`"));
        }
        edges.push((parse_num(t[1], ln)?, parse_num(t[2], ln)?));
    }
    Graph::new(n, edges)
}

fn describe(params: &DecompParams) -> String {
    match *params {
        DecompParams::None => "none".into(),
        DecompParams::DbDim { eps, k, seed } => format!("dbdim eps={eps} K={k} seed={seed}"),
        DecompParams::MinorV { r, lambda, seed } => format!("minorv r={r} lambda={lambda} seed={seed}"),
        DecompParams::MinorE { r, lambda, seed } => format!("minore r={r} lambda={lambda} seed={seed}"),
        DecompParams::Grid { k, l1, l2 } => format!("grid k={k} l1={l1} l2={l2}"),
    }
}

fn write_components(out: &mut String, components: &[Vec<usize>]) {
    for c in components {
        out.push_str("component");
        for v in c {
            write!(out, " {v}").unwrap();
        }
        out.push('\n');
    }
}

pub fn write_edge_decomposition(graph: &Graph, d: &EdgeDecomposition) -> String {
    let mut out = format!("decomposition edge {} {}\n", graph.n(), describe(&d.params));
    for &e in &d.removed_edges {
        let (u, v) = graph.edge(e);
        writeln!(out, "removed {u} {v}").unwrap();
    }
    write_components(&mut out, &d.components);
    out
}

pub fn write_vertex_decomposition(graph: &Graph, d: &VertexDecomposition) -> String {
    let mut out = format!("decomposition vertex {} {}\n", graph.n(), describe(&d.params));
    for &v in &d.removed {
        writeln!(out, "removed {v}").unwrap();
    }
    write_components(&mut out, &d.components);
    out
}

pub(crate) fn perr(line: usize, msg: &str) -> Error {
    Error::Parse {
        line,
        msg: msg.to_string(),
    }
}

pub(crate) fn parse_num<T: std::str::FromStr>(s: &str, line: usize) -> Result<T> {
    s.parse().map_err(|_| perr(line, &format!("invalid number `{s}`")))
}

pub(crate) fn parse_floats(ts: &[&str], line: usize) -> Result<Vec<f64>> {
    ts.iter().map(|s| parse_num::<f64>(s, line)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;
    use proptest::prelude::*;

    #[test]
    fn reads_with_comments() {
        let text = "# a model\nmrf 2 2\nnode 0 0 1 # first\nnode 1 0.5 0\n\nedge 0 1 0 0 0 2\n";
        let m = read_mrf(text).unwrap();
        assert_eq!(m.n(), 2);
        assert_eq!(m.phi(0, 1), 1.0);
        assert_eq!(m.psi(0, 1, 1, 1), 2.0);
    }

    #[test]
    fn rejects_reversed_edge() {
        let text = "mrf 2 2\nnode 0 0 0\nnode 1 0 0\nedge 1 0 0 0 0 0\n";
        assert!(matches!(read_mrf(text), Err(Error::Parse { line: 4, .. })));
    }

    #[test]
    fn rejects_missing_nodes() {
        assert!(read_mrf("mrf 2 2\nnode 0 0 0\n").is_err());
    }

    #[test]
    fn seventeen_digits() {
        assert_eq!(fmt_f64(0.1), "1.0000000000000001e-1");
    }

    #[test]
    fn graph_files() {
        let g = Graph::new(4, [(0, 1), (2, 3), (1, 2)]).unwrap();
        assert_eq!(read_graph(&write_graph(&g)).unwrap(), g);
        let m = PairwiseMrf::new(g.clone(), 2, vec![vec![0.0; 2]; 4], vec![vec![0.0; 4]; 3]).unwrap();
        assert_eq!(read_graph(&write_mrf(&m)).unwrap(), g);
        assert!(read_graph("graph 2\nedge 0 0\n").is_err());
        assert!(matches!(
            read_graph("graph 2\nedge 0\n"),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn decomposition_block() {
        let d = crate::decomp::grid_decomp(2, 1, 0, 0).unwrap();
        let text = write_edge_decomposition(&crate::lattice::gen_grid(2), &d);
        assert!(text.starts_with("decomposition edge 4 grid k=1 l1=0 l2=0\nremoved 0 1\n"));
        assert_eq!(text.lines().filter(|l| l.starts_with("component")).count(), 4);
    }

    proptest! {
        #[test]
        fn round_trip_bit_exact(
            vals in proptest::collection::vec(-1e6f64..1e6, 3 * 3 + 2 * 9),
        ) {
            let g = Graph::new(3, [(0, 1), (1, 2)]).unwrap();
            let nodes = vals[..9].chunks(3).map(<[f64]>::to_vec).collect();
            let edges = vals[9..].chunks(9).map(<[f64]>::to_vec).collect();
            let m = PairwiseMrf::new(g, 3, nodes, edges).unwrap();
            let back = read_mrf(&write_mrf(&m)).unwrap();
            prop_assert_eq!(back, m);
        }
    }
}
