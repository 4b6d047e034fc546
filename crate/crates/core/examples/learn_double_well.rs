//! Learn an atlas for the 1-D double well and print the effective potential
//! recovered by integrating the learned drift.
//!
//! cargo run --release --example learn_double_well -- [rough] [delta]

use atlas_core::analysis::{effective_potential_1d, local_maxima, local_minima};
use atlas_core::systems::sde::{double_well_space, u1, v1};
use atlas_core::{learn_atlas, AtlasParams};

fn main() -> atlas_core::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let rough = args.iter().any(|a| a == "rough");
    let delta: f64 = args.iter().find_map(|a| a.parse().ok()).unwrap_or(0.1);

    let space = double_well_space(rough, 0.01);
    let mut params = AtlasParams::experimental(delta, 1);
    if rough {
        params.t0 = 2.0 * delta * delta;
        params.dt = params.t0 / 5.0;
    }
    let t = std::time::Instant::now();
    let model = learn_atlas(&space, &params, 7)?;
    println!("{} charts in {:.1?}", model.n_charts(), t.elapsed());

    let pot = effective_potential_1d(&model);
    let u: Vec<f64> = pot.iter().map(|p| p.potential).collect();
    let shift = pot
        .iter()
        .map(|p| if rough { v1(p.x) } else { u1(p.x) } - p.potential)
        .fold(f64::INFINITY, f64::min);
    println!(
        "{:>8} {:>10} {:>10} {:>10} {:>10}",
        "x", "drift", "sigma", "U_atlas", "U_true"
    );
    for p in &pot {
        let truth = if rough { v1(p.x) } else { u1(p.x) };
        println!(
            "{:>8.3} {:>10.4} {:>10.4} {:>10.4} {:>10.4}",
            p.x,
            p.drift,
            p.diffusion,
            p.potential + shift,
            truth
        );
    }
    let xs = |idx: Vec<usize>| idx.into_iter().map(|i| pot[i].x).collect::<Vec<_>>();
    println!("minima at {:?}", xs(local_minima(&u)));
    println!("maxima at {:?}", xs(local_maxima(&u)));
    Ok(())
}
