//! Sparse combination-matrix design, simulation and steady-state analysis
//! for multitask adaptive networks under subspace constraints.

// Parameter checks are written as !(x > 0.0) so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod datagen;
pub mod design;
pub mod error;
pub mod experiment;
pub mod graph;
pub mod linalg;
pub mod seeds;
pub mod simulator;
pub mod subspace;
pub mod theory;

pub use error::{Error, Result};
