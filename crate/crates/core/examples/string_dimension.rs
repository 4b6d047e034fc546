//! Randomly forced string: measure the typical displacement over `t0` steps
//! and estimate the local dimension from landmark spectra.
//!
//! cargo run --release --example string_dimension -- [n_initial] [n_charts]

use atlas_core::embedding::{estimate_dim, mds};
use atlas_core::learn::generate_landmarks;
use atlas_core::netspace::{build_delta_net, StateSpace};
use atlas_core::rng;
use atlas_core::systems::StringSpace;
use nalgebra::DMatrix;

fn main() -> atlas_core::Result<()> {
    let args: Vec<usize> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let n_initial = args.first().copied().unwrap_or(2000);
    let n_charts = args.get(1).copied().unwrap_or(100);
    let (t0, delta, m) = (250.0, 0.3, 40);

    let t = std::time::Instant::now();
    let space = StringSpace::sampled(n_initial, 250, 1);
    println!("{n_initial} healed samples in {:.1?}", t.elapsed());

    let pts = space.initial_points();
    let mut moved = 0.0;
    let probe = pts.len().min(200);
    for (i, x) in pts.iter().take(probe).enumerate() {
        let y = space.simulate(x, 1, t0, &mut rng::stream(2, "probe", i as u64))?;
        moved += space.distance(x, &y[0]);
    }
    println!(
        "mean displacement over {t0} steps: {:.4}",
        moved / probe as f64
    );

    let net = build_delta_net(pts, delta, |a, b| space.distance(a, b))?;
    println!("net size at delta = {delta}: {}", net.len());

    let charts = net.len().min(n_charts);
    let landmarks: Vec<Vec<Vec<f64>>> = (0..net.len())
        .map(|k| {
            generate_landmarks(
                &space,
                &net.points[k],
                m,
                t0,
                &mut rng::stream(3, "landmarks", k as u64),
            )
        })
        .collect::<atlas_core::Result<_>>()?;
    let mut counts = [0usize; 8];
    for k in 0..charts {
        // Chart landmarks: the union over the chart and its neighbors.
        let lm: Vec<&Vec<f64>> = std::iter::once(k)
            .chain(net.neighbors[k].iter().copied())
            .flat_map(|j| landmarks[j].iter())
            .collect();
        let n = lm.len();
        let dist = DMatrix::from_fn(n, n, |a, b| space.distance(lm[a], lm[b]));
        let e = mds(&dist, 6)?;
        let dim = estimate_dim(&e.eigenvalues, delta);
        counts[dim.min(7)] += 1;
        if k < 3 {
            println!("chart {k} spectrum {:?}", &e.eigenvalues[..6]);
        }
    }
    for (d, c) in counts.iter().enumerate().filter(|(_, &c)| c > 0) {
        println!("d = {d}: {c} of {charts} charts");
    }
    Ok(())
}
