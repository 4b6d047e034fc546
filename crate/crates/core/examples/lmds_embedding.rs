//! Landmark MDS on a patch of a curved surface in R^5: the spectrum shows
//! the intrinsic dimension, and out-of-sample points are placed by their
//! distances to the landmarks alone.
//!
//! cargo run --release --example lmds_embedding

use atlas_core::embedding::{estimate_dim, extend, mds};
use atlas_core::netspace::euclidean;
use atlas_core::rng;
use nalgebra::DMatrix;
use rand::Rng;

fn surface(u: f64, v: f64) -> Vec<f64> {
    vec![u, v, 0.3 * u * u, 0.2 * u * v, 0.1 * v * v]
}

fn main() -> atlas_core::Result<()> {
    let delta = 0.2;
    let mut r = rng::stream(2, "patch", 0);
    let mut draw = || {
        surface(
            2.0 * delta * (r.random::<f64>() - 0.5),
            2.0 * delta * (r.random::<f64>() - 0.5),
        )
    };
    let landmarks: Vec<Vec<f64>> = (0..40).map(|_| draw()).collect();
    let others: Vec<Vec<f64>> = (0..200).map(|_| draw()).collect();

    let n = landmarks.len();
    let dist = DMatrix::from_fn(n, n, |i, j| euclidean(&landmarks[i], &landmarks[j]));
    let e = mds(&dist, 2)?;
    println!(
        "leading eigenvalues (per-point variance): {}",
        e.eigenvalues[..5]
            .iter()
            .map(|v| format!("{v:.2e}"))
            .collect::<Vec<_>>()
            .join(" ")
    );
    println!(
        "estimated dimension with cutoff (delta/4)^2: {}",
        estimate_dim(&e.eigenvalues, delta)
    );

    let mut worst: f64 = 0.0;
    let coords: Vec<Vec<f64>> = others
        .iter()
        .map(|p| {
            let d: Vec<f64> = landmarks.iter().map(|l| euclidean(p, l)).collect();
            extend(&e, &d)
        })
        .collect::<atlas_core::Result<_>>()?;
    for i in 0..others.len() {
        for j in 0..i {
            let amb = euclidean(&others[i], &others[j]);
            worst = worst.max((euclidean(&coords[i], &coords[j]) - amb).abs() / delta);
        }
    }
    println!(
        "extended {} points; worst pairwise distortion {worst:.3} delta",
        others.len()
    );
    Ok(())
}
