//! Build a delta-net on a noisy circle and check its separation, covering
//! and neighbor structure.
//!
//! cargo run --release --example delta_net -- [delta]

use atlas_core::build_delta_net;
use atlas_core::netspace::euclidean;
use atlas_core::rng::{self, normal};
use rand::Rng;

fn main() -> atlas_core::Result<()> {
    let delta: f64 = std::env::args()
        .nth(1)
        .and_then(|a| a.parse().ok())
        .unwrap_or(0.1);
    let mut r = rng::stream(1, "circle", 0);
    let points: Vec<Vec<f64>> = (0..5000)
        .map(|_| {
            let th = std::f64::consts::TAU * r.random::<f64>();
            let rad = 1.0 + 0.02 * normal(&mut r);
            vec![rad * th.cos(), rad * th.sin()]
        })
        .collect();
    let net = build_delta_net(&points, delta, |a, b| euclidean(a, b))?;

    let min_sep = net
        .edges()
        .map(|(i, j)| euclidean(&net.points[i], &net.points[j]))
        .fold(f64::INFINITY, f64::min);
    let cover = points
        .iter()
        .map(|p| {
            net.points
                .iter()
                .map(|y| euclidean(p, y))
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max);
    let degrees: Vec<usize> = net.neighbors.iter().map(|n| n.len()).collect();
    println!(
        "{} points -> {} net points at delta = {delta}",
        points.len(),
        net.len()
    );
    println!("closest neighboring pair {min_sep:.4} (> delta), worst covering distance {cover:.4} (<= delta)");
    println!(
        "neighbor count min {} max {} (a circle has about 4 within 2 delta)",
        degrees.iter().min().unwrap(),
        degrees.iter().max().unwrap()
    );
    println!(
        "circumference / delta = {:.1}",
        std::f64::consts::TAU / delta
    );
    Ok(())
}
