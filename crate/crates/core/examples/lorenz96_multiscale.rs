//! Learn a 2-D atlas for the slow variables of a planar system driven by
//! 80-variable Lorenz-96 chaos, then compare radial statistics of the two
//! simulators.
//!
//! cargo run --release --example lorenz96_multiscale -- [n_initial]

use atlas_core::harness::atlas_start;
use atlas_core::netspace::StateSpace;
use atlas_core::rng;
use atlas_core::simulate::run_charts;
use atlas_core::systems::lorenz::Lorenz96Multiscale;
use atlas_core::{learn_atlas, AtlasParams};

fn radius(x: &[f64]) -> f64 {
    x[0].hypot(x[1])
}

fn main() -> atlas_core::Result<()> {
    let n: usize = std::env::args()
        .nth(1)
        .and_then(|a| a.parse().ok())
        .unwrap_or(1000);
    let t = std::time::Instant::now();
    let space = Lorenz96Multiscale::new(0.01).with_sampled_initial(n, 25.0, 51)?;
    println!("{n} healed initial points in {:.1?}", t.elapsed());

    // Jittered copies need about 10 time units to decorrelate. By t0 = 20
    // endpoints spread about 0.2 and drift about as far, so delta sits above both.
    let params = AtlasParams {
        delta: 0.3,
        d: 2,
        m: 4,
        p: 200,
        t0: 20.0,
        dt: 4.0,
    };
    let t = std::time::Instant::now();
    let model = learn_atlas(&space, &params, 52)?;
    println!("{} charts learned in {:.1?}", model.n_charts(), t.elapsed());

    let x0 = space.initial_points()[0].clone();
    let steps = 5_000;
    let s0 = atlas_start(&space, &model, &x0);
    let charts = run_charts(&model, &s0, steps, &mut rng::stream(53, "run", 0));
    let atlas_r: Vec<f64> = charts
        .iter()
        .map(|&i| radius(&model.net().points[i]))
        .collect();

    let mut direct_r = Vec::with_capacity(steps);
    let mut x = x0;
    let mut r = rng::stream(54, "direct", 0);
    for _ in 0..steps {
        x = space.simulate(&x, 1, params.dt, &mut r)?.pop().unwrap();
        direct_r.push(radius(&x));
    }
    let summary = |v: &[f64]| {
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        let outer = v.iter().filter(|&&r| r > 1.5).count() as f64 / v.len() as f64;
        (mean, outer)
    };
    let (am, ao) = summary(&atlas_r);
    let (dm, dout) = summary(&direct_r);
    println!(
        "over {steps} steps of {}: mean radius atlas {am:.3} direct {dm:.3}",
        params.dt
    );
    println!("fraction beyond r = 1.5: atlas {ao:.3} direct {dout:.3}");
    Ok(())
}
