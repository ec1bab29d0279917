//! Sparse recovery by weighted ℓ1 minimization.
//!
//! - [`linops`]: dense matrices, kernels, power iteration, subset enumeration.
//! - [`solver`]: proximal continuation solver with IL1 / IRL1 / MIRL1 weighting.
//! - [`certificates`]: exact NSP/WNSP, `T₀`/γ, RIC/ROC and an LP oracle.
//! - [`bench`]: seeded problem generation and experiment grids.
//! - [`cli`]: the `wl1` command-line front end.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod certificates;
pub mod cli;
pub mod error;
pub mod linops;
pub mod solver;

pub use error::{Error, Result};
pub use linops::{DenseMatrix, IndexSet, SubspaceBasis};
pub use solver::{solve, SolveReport, SolverConfig, WeightScheme};
