//! Semi-supervised transductive regression with graph-Laplacian
//! regularization, where the similarity graph is either a kernel matrix or
//! the co-association matrix of a K-means cluster ensemble.
//!
//! The crate is `no_std` (with `alloc`) and contains only the numerical
//! machinery:
//!
//! - [`numerics`]: dense matrices, Cholesky/LU solves, conjugate gradient,
//!   power iteration, and the [`LinearOperator`](numerics::LinearOperator)
//!   abstraction shared by every matrix-free path.
//! - [`kernels`]: Matérn-family and RBF similarity functions.
//! - [`ensemble`]: seeded K-means, cluster ensembles and the factored
//!   co-association matrix `H = B Bᵀ`.
//! - [`solver`]: the dense solve `(G + αL)⁻¹ Y` and the Woodbury solve that
//!   never forms an `n × n` matrix.
//! - [`hmatrix`]: hierarchical-matrix approximation of kernel matrices with
//!   adaptive cross approximation, and a CG-based regression solve on top.
//! - [`data`]: synthetic mixture generation, labeled/unlabeled splitting and
//!   the quartile transform of a response.
//!
//! File formats, experiment orchestration and the command line live in the
//! companion `lrcm` crate.
#![no_std]

extern crate alloc;

pub mod data;
pub mod ensemble;
pub mod hmatrix;
pub mod kernels;
pub mod numerics;
pub mod seeding;
pub mod solver;

#[cfg(test)]
pub(crate) mod oracles;

pub use data::{Dataset, MixtureSpec, SplitProblem};
pub use ensemble::{EnsembleConfig, EnsembleFactor, Partition, Weighting};
pub use hmatrix::{HMatrix, HMatrixConfig};
pub use kernels::{KernelFamily, KernelParams};
pub use numerics::{DenseMatrix, LinearOperator, LowRankFactor};
pub use solver::{LabeledProblem, Prediction, SolverConfig, SolverPath};
