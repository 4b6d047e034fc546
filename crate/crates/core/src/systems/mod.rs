//! Reference microscale simulators.

pub mod image;
pub mod lorenz;
pub mod sde;
pub mod string;

pub use image::{BitImage, ImageSpace};
pub use lorenz::Lorenz96Multiscale;
pub use sde::{Diffusion, Metric, SdeSpace, SdeSystem};
pub use string::StringSpace;

/// Keys accepted by `--system`, with a one-line description each.
pub const REGISTRY: &[(&str, &str)] = &[
    (
        "double-well-smooth",
        "1-D gradient SDE in U1(x) = 16x^2(x-1)^2, micro step 0.005",
    ),
    (
        "double-well-rough",
        "U1 plus cos(100 pi x)/6, micro step 0.00005",
    ),
    (
        "three-well-smooth",
        "2-D log-sum-exp three-well potential U2, micro step 0.005",
    ),
    (
        "three-well-rough",
        "U2 plus cos(100 pi x1)/6 + cos(100 pi x2)/6, micro step 0.00005",
    ),
    (
        "constant-drift-periodic",
        "dX = b dt + sigma dB on a circle",
    ),
    (
        "image-three-well-smooth",
        "three-well U2 embedded as 12,500-pixel disc images",
    ),
    (
        "image-three-well-rough",
        "three-well V2 embedded as 12,500-pixel disc images",
    ),
    (
        "string",
        "randomly forced string on 100 grid points, time in steps",
    ),
    (
        "lorenz96-multiscale",
        "slow planar limit cycles driven by 80-variable Lorenz-96",
    ),
];

pub fn is_known(key: &str) -> bool {
    REGISTRY.iter().any(|(k, _)| *k == key)
}
