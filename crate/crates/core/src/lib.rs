//! Stochastic Kronecker graph laboratory.
//!
//! A symmetric matrix `P` in `[0,1]^{k x k}` generates, for each order `t`,
//! a random graph on `k^t` vertices whose edges appear independently with
//! probabilities given by the t-fold Kronecker power of `P`. This crate
//! samples such graphs exactly, classifies the generator into its
//! giant-component and connectivity regimes, and measures sampled graphs
//! against the predicted behavior.
//!
//! Modules mirror the pipeline:
//! - [`genmatrix`]: the generator matrix, derived quantities (column sums,
//!   walk matrices, stationary distribution), vertex words and signatures;
//! - [`spectral`]: small dense eigenproblems, Kronecker-power spectra,
//!   mixing/Cheeger/diameter/concentration bounds;
//! - [`classify`]: the eight-case regime decision procedure with its
//!   closed-form theory parameters;
//! - [`sampler`]: the exact naive sampler and the group-and-skip sampler;
//! - [`graphstats`]: component statistics, diameter estimates, and
//!   degree/signature checks on sampled graphs;
//! - [`harness`]: batch experiment sweeps producing CSV verdicts.

pub mod classify;
mod comb;
pub mod edgefile;
pub mod error;
pub mod genmatrix;
pub mod graphstats;
pub mod harness;
pub mod rng;
pub mod sampler;
pub mod spectral;

pub use error::{Result, SkgError};
pub use genmatrix::{
    check_support, derive, edge_probability, expected_degree, signature, vertex_count,
    DerivedQuantities, GeneratorMatrix, Signature, SupportReport, VertexWord,
};
pub use sampler::{sample, sample_naive, SampledGraph, SamplerId};
pub use spectral::{walk_spectrum, WalkSpectrum};
