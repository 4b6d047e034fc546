//! Learn an atlas directly on 12,500-pixel disc images of the three-well
//! process. Chart spectra reveal the two hidden coordinates.
//!
//! cargo run --release --example image_three_well -- [p]

use atlas_core::analysis::RegionSpec;
use atlas_core::embedding::estimate_dim;
use atlas_core::harness::atlas_start;
use atlas_core::learn::learn_atlas_with_diagnostics;
use atlas_core::netspace::euclidean;
use atlas_core::rng;
use atlas_core::simulate::run_charts;
use atlas_core::systems::image::{approx_invert, embed, ImageSpace};
use atlas_core::systems::sde::{three_well_space, THREE_WELL_CENTERS};
use atlas_core::AtlasParams;

fn main() -> atlas_core::Result<()> {
    let p: usize = std::env::args()
        .nth(1)
        .and_then(|a| a.parse().ok())
        .unwrap_or(500);
    let space = ImageSpace::new(three_well_space(false, 0.04));
    let params = AtlasParams {
        delta: 0.2,
        d: 2,
        m: 20,
        p,
        t0: 0.04,
        dt: 0.008,
    };
    let t = std::time::Instant::now();
    let (model, diag) = learn_atlas_with_diagnostics(&space, &params, 41)?;
    println!("{} charts learned in {:.1?}", model.n_charts(), t.elapsed());
    let mut hist = [0usize; 5];
    for s in &diag.spectra {
        hist[estimate_dim(s, params.delta).min(4)] += 1;
    }
    println!(
        "charts by estimated dimension: 1 -> {}, 2 -> {}, 3 -> {}, 4+ -> {}",
        hist[1], hist[2], hist[3], hist[4]
    );

    let regions = RegionSpec::balls(
        THREE_WELL_CENTERS.iter().map(|c| c.to_vec()).collect(),
        0.25,
    );
    let per_chart: Vec<u32> = model
        .net()
        .points
        .iter()
        .map(|img| {
            approx_invert(img)
                .map(|q| regions.label(&q.to_vec(), |a, b| euclidean(a, b)))
                .unwrap_or(0)
        })
        .collect();
    let s0 = atlas_start(&space, &model, &embed(&THREE_WELL_CENTERS[0]));
    let charts = run_charts(&model, &s0, 100_000, &mut rng::stream(42, "run", 0));
    let mut occupancy = [0usize; 4];
    for &i in &charts {
        occupancy[per_chart[i] as usize] += 1;
    }
    println!(
        "occupancy over 1e5 steps: wells {:.3} {:.3} {:.3}, elsewhere {:.3}",
        occupancy[1] as f64 / 1e5,
        occupancy[2] as f64 / 1e5,
        occupancy[3] as f64 / 1e5,
        occupancy[0] as f64 / 1e5
    );
    Ok(())
}
