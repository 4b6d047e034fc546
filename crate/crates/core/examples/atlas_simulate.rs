//! Learn an atlas for the 2-D three-well potential and report how long a
//! trajectory spends in each well.
//!
//! cargo run --release --example atlas_simulate -- [steps]

use atlas_core::analysis::{classify, RegionSpec};
use atlas_core::harness::atlas_start;
use atlas_core::netspace::euclidean;
use atlas_core::rng;
use atlas_core::simulate::run_charts;
use atlas_core::systems::sde::{three_well_space, THREE_WELL_CENTERS};
use atlas_core::{learn_atlas, AtlasParams};

fn main() -> atlas_core::Result<()> {
    let steps: usize = std::env::args()
        .nth(1)
        .and_then(|a| a.parse().ok())
        .unwrap_or(200_000);
    let space = three_well_space(false, 0.02);
    let mut params = AtlasParams::experimental(0.1, 2);
    params.p = 2000;
    let t = std::time::Instant::now();
    let model = learn_atlas(&space, &params, 11)?;
    println!(
        "{} charts, dt = {}, learned in {:.1?}",
        model.n_charts(),
        model.dt(),
        t.elapsed()
    );

    let s0 = atlas_start(&space, &model, &THREE_WELL_CENTERS[0].to_vec());
    let t = std::time::Instant::now();
    let charts = run_charts(&model, &s0, steps, &mut rng::stream(12, "run", 0));
    println!(
        "{steps} steps (time {:.0}) in {:.1?}",
        steps as f64 * model.dt(),
        t.elapsed()
    );

    let regions = RegionSpec::balls(
        THREE_WELL_CENTERS.iter().map(|c| c.to_vec()).collect(),
        0.25,
    );
    let per_chart = classify(&model.net().points, &regions, |a, b| euclidean(a, b));
    let mut occupancy = [0usize; 4];
    for &i in &charts {
        occupancy[per_chart[i] as usize] += 1;
    }
    for (k, c) in occupancy.iter().enumerate() {
        let name = if k == 0 {
            "outside".to_string()
        } else {
            format!("well {k}")
        };
        println!("{name:<8} {:.3}", *c as f64 / charts.len() as f64);
    }
    Ok(())
}
