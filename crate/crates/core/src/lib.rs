//! Syndrome-extraction circuits for quantum LDPC codes.
//!
//! The crate builds CSS and hypergraph-product codes, synthesizes three
//! families of syndrome-extraction circuits (fully connected, bounded-depth
//! 2D-local with a sorting-network switch, and linear-ancilla 2D-local for
//! hypergraph products), checks them with an exact stabilizer simulator,
//! evaluates separator-style depth lower bounds, and estimates logical
//! failure rates under circuit noise with BP and small-set-flip decoding.

pub mod bounds;
pub mod canonical;
pub mod circuit;
pub mod code;
pub mod decoders;
pub mod frame;
pub mod gf2;
pub mod graph;
pub mod memory;
pub mod ratio;
pub mod sim;
pub mod synth;
pub mod tableau;

pub use circuit::{CliffordCircuit, Op, OutcomeRef, QubitLayout, Role};
pub use code::{ClassicalCode, CodeParameters, CssCode};
pub use gf2::{BitMatrix, BitVector, PauliOperator};
pub use graph::{Graph, TannerGraph};
pub use tableau::Tableau;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("graph has {n} vertices, above the brute-force cap of {cap}")]
    CapExceeded { n: usize, cap: usize },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid circuit: {0}")]
    InvalidCircuit(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("empty boundary with {n_cut} crossing generators")]
    EmptyBoundary { n_cut: usize },
    #[error("routing failed: {0}")]
    Routing(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
