use super::{DecompParams, EdgeDecomposition};
use crate::error::{Error, Result};
use crate::lattice::{EdgeKind, GridLayout};

/// Slab decomposition of the `n x n` grid: removes every horizontal edge
/// `(x, y) - (x + 1, y)` with `x ≡ l1 (mod k)` and every vertical edge
/// `(x, y) - (x, y + 1)` with `y ≡ l2 (mod k)`. Components are at most
/// `k x k` blocks.
pub fn grid_decomp(n: usize, k: usize, l1: usize, l2: usize) -> Result<EdgeDecomposition> {
    grid_decomp_layout(&GridLayout::grid(n, n), k, l1, l2)
}

/// [`grid_decomp`] for any grid or cris-cross layout. On a cris-cross graph
/// the blocks of the underlying grid are kept and every diagonal joining two
/// blocks is removed as well.
pub fn grid_decomp_layout(layout: &GridLayout, k: usize, l1: usize, l2: usize) -> Result<EdgeDecomposition> {
    let side = layout.width.max(layout.height);
    if k < 1 || k > side {
        return Err(Error::Domain(format!("slab width k must lie in 1..={side}, got {k}")));
    }
    if l1 >= k || l2 >= k {
        return Err(Error::Domain(format!(
            "offsets must be below k = {k}, got ({l1}, {l2})"
        )));
    }
    let params = DecompParams::Grid { k, l1, l2 };
    let plain = GridLayout::grid(layout.width, layout.height);
    let grid = plain.graph();
    let mask: Vec<bool> = grid
        .edges()
        .iter()
        .map(|&(u, v)| {
            let (x, y) = plain.coords(u);
            match plain.edge_kind(u, v) {
                Some(EdgeKind::Horizontal) => x % k == l1,
                Some(EdgeKind::Vertical) => y % k == l2,
                _ => unreachable!("plain grid edges are axis-aligned"),
            }
        })
        .collect();
    let cut = EdgeDecomposition::from_mask(&grid, &mask, params);
    if !layout.criscross {
        return Ok(cut);
    }
    Ok(EdgeDecomposition::from_partition(
        &layout.graph(),
        &cut.components,
        params,
    ))
}
