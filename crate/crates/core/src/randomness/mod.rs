//! Stochastic machinery: seeded RNG streams, Haar rotations and random
//! subspaces, epsilon-nets, hit-and-run chains, Gaussian perturbation of
//! batches, Johnson-Lindenstrauss ratios, and SO(n) concentration scans.

mod batch;
mod concentration;
mod hit_run;
mod jl;
mod net;
mod rotation;
pub(crate) mod streams;

pub use batch::{add_gaussian, Provenance, SampleBatch, SampleSource};
pub use concentration::{so_concentration_tail, ConcentrationTable};
pub use hit_run::{hit_and_run_batch, ChainSpec, ChainStart};
pub use jl::{jl_norm_ratio, JlSummary};
pub use net::{ball_net, BallNet};
pub use rotation::{
    geodesic_distance_bounds, haar_rotation, haar_rotation_indexed, random_subspace,
    random_subspace_indexed, Rotation, Subspace,
};
pub use streams::{derive_seed, stream_rng};
