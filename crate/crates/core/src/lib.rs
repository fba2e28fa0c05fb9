//! Machinery for studying marginals of high-dimensional log-concave measures
//! at desk scale: exact and Markov-chain samplers for convex bodies in
//! isotropic position, Haar rotations and random subspaces, thin-shell and
//! total-variation statistics of projected batches, and low-dimensional
//! quadrature oracles that pin the Monte Carlo estimates down.
//!
//! The crate splits into:
//! - [`logconcave`]: densities, radial profiles, landmarks and quadrature ops;
//! - [`bodies`]: convex bodies, membership, exact samplers, whitening;
//! - [`randomness`]: seeded streams, rotations, nets, hit-and-run, batches;
//! - [`marginal`]: projection statistics (TV, thin shell, flatness);
//! - [`suites`]: randomized property suites over the corpus;
//! - [`quad`], [`stats`], [`linalg`]: shared numerics.
//!
//! Everything stochastic is addressed by `(seed, purpose, index)` streams, so
//! every number here reproduces bit-for-bit regardless of thread count.

pub mod bodies;
pub mod error;
pub mod linalg;
pub mod logconcave;
pub mod marginal;
pub mod quad;
pub mod randomness;
pub mod stats;
pub mod suites;

pub use error::{Error, Result};
pub use quad::QuadratureSpec;
