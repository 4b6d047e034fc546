//! Learning coarse stochastic simulators ("atlases") from short bursts of a
//! fine-scale simulator.
//!
//! The pipeline: cover the state space with a δ-net ([`netspace`]), embed
//! short-path endpoints around each net point with landmark MDS
//! ([`embedding`]), fit drift, diffusion and switching maps ([`learn`]), then
//! run the resulting chart-hopping SDE ([`simulate`]). [`analysis`] and
//! [`harness`] compare it against the original simulator.

// `!(x > 0.0)` is used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod analysis;
pub mod cli;
pub mod config;
pub mod embedding;
pub mod error;
pub mod harness;
pub mod learn;
pub mod linalg;
pub mod netspace;
pub mod rng;
pub mod simulate;
pub mod systems;

pub use error::{AtlasError, Result};
pub use learn::{learn_atlas, AtlasModel, AtlasParams};
pub use netspace::{build_delta_net, DeltaNet, StateSpace};
pub use simulate::AtlasState;
