//! Weakly-regular quantum network lattices.
//!
//! The crate builds the four lattice families, evaluates the closed-form
//! capacity, link-length and density relations for lossy fibre channels,
//! checks them against an exact max-flow solver, and compares fibre networks
//! with a satellite link on a daily key-rate basis.

// `!(x >= 0.0)` style checks are deliberate: they also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod capacity;
pub mod config;
pub mod error;
pub mod flow;
pub mod lattice;
pub mod netgraph;
pub mod satcomp;

pub use error::{Error, Result};
pub use lattice::{LatticeFamily, LatticeSpec, WrnCharacteristics};
pub use netgraph::{CommonalityMultiset, Edge, Network, Node, NodeId, UserPair};
