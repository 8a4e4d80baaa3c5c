pub mod bench;
pub mod decomp;
pub mod error;
pub mod exact;
pub mod format;
pub mod graph;
pub mod inference;
pub mod lattice;
pub mod metric;
pub mod mrf;
pub mod reduce;
pub mod rng;
pub mod saw;
