//! Mean transition times between the two wells of the smooth double well,
//! measured on direct paths and on atlas paths.
//!
//! cargo run --release --example transition_times -- [horizon]

use atlas_core::analysis::RegionSpec;
use atlas_core::harness::{atlas_start, atlas_transitions, direct_transitions, pooled};
use atlas_core::netspace::euclidean;
use atlas_core::systems::sde::double_well_space;
use atlas_core::{learn_atlas, AtlasParams};

fn main() -> atlas_core::Result<()> {
    let horizon: f64 = std::env::args()
        .nth(1)
        .and_then(|a| a.parse().ok())
        .unwrap_or(500.0);
    let space = double_well_space(false, 0.01);
    let model = learn_atlas(&space, &AtlasParams::experimental(0.1, 1), 31)?;
    let regions = RegionSpec::balls(vec![vec![0.0], vec![1.0]], 0.25);
    let label = |p: &Vec<f64>| regions.label(p, |a, b| euclidean(a, b));
    let x0 = vec![0.0];
    let micro = space.system.micro_dt;
    let direct = pooled(direct_transitions(
        &space,
        &x0,
        label,
        4,
        (horizon / micro) as usize,
        micro,
        32,
    )?);
    let s0 = atlas_start(&space, &model, &x0);
    let atlas = pooled(atlas_transitions(
        &model,
        &s0,
        label,
        4,
        (horizon / model.dt()) as usize,
        33,
    )?);
    println!(
        "{:>4} {:>4} {:>10} {:>6} {:>10} {:>6}",
        "from", "to", "direct", "n", "atlas", "n"
    );
    for (i, j) in [(1, 2), (2, 1)] {
        println!(
            "{i:>4} {j:>4} {:>10.3} {:>6} {:>10.3} {:>6}",
            direct.mean(i, j).unwrap_or(f64::NAN),
            direct.count(i, j),
            atlas.mean(i, j).unwrap_or(f64::NAN),
            atlas.count(i, j)
        );
    }
    Ok(())
}
