//! Coarse-binned L1 distance between the atlas and the direct simulator on
//! the smooth double well, over dyadic times.
//!
//! cargo run --release --example compare_simulators -- [n_paths]

use atlas_core::build_delta_net;
use atlas_core::harness::{compare_simulators, dyadic_times, CompareSettings};
use atlas_core::netspace::{euclidean, StateSpace};
use atlas_core::systems::sde::double_well_space;
use atlas_core::{learn_atlas, AtlasParams};

fn main() -> atlas_core::Result<()> {
    let n_paths: usize = std::env::args()
        .nth(1)
        .and_then(|a| a.parse().ok())
        .unwrap_or(2000);
    let space = double_well_space(false, 0.01);
    let model = learn_atlas(&space, &AtlasParams::experimental(0.1, 1), 21)?;
    let coarse = build_delta_net(space.initial_points(), 0.2, |a, b| euclidean(a, b))?.points;
    let settings = CompareSettings {
        times: dyadic_times(model.dt(), 16.0),
        n_paths,
        coarse,
        delta_c: 0.2,
        seed: 22,
    };
    let ics = vec![vec![-0.3], vec![0.5], vec![1.2]];
    let report = compare_simulators(&space, &model, &ics, &settings)?;
    println!("{:>10} {:>8} {:>8}", "t", "mean L1", "sd");
    for ((t, m), s) in report.times.iter().zip(&report.mean).zip(&report.std) {
        println!("{t:>10} {m:>8.4} {s:>8.4}");
    }
    Ok(())
}
