//! Ensemble drivers that run the microscale simulator and a learned atlas
//! side by side.

use rayon::prelude::*;

use crate::analysis::{
    classify_charts, multiscale_compare, transition_times, BinningGrid, ComparisonReport,
    RegionSpec, TransitionStats,
};
use crate::error::{AtlasError, Result};
use crate::learn::AtlasModel;
use crate::netspace::{nearest_net_index, StateSpace};
use crate::rng::{self, derive_seed};
use crate::simulate::{advance, run_charts, AtlasState, StepScratch};

/// Powers of two from the smallest one `>= t_min` up to `horizon`, with
/// `horizon` appended when it is not itself a power of two.
pub fn dyadic_times(t_min: f64, horizon: f64) -> Vec<f64> {
    let mut out = Vec::new();
    if !(t_min > 0.0) || !(horizon >= t_min) {
        return out;
    }
    let mut t = 2f64.powi(t_min.log2().ceil() as i32);
    while t <= horizon * (1.0 + 1e-12) {
        out.push(t);
        t *= 2.0;
    }
    if out.last().is_none_or(|&l| l < horizon * (1.0 - 1e-12)) {
        out.push(horizon);
    }
    out
}

fn transpose<T>(paths: Vec<Vec<T>>, slices: usize) -> Vec<Vec<T>> {
    let mut out: Vec<Vec<T>> = (0..slices)
        .map(|_| Vec::with_capacity(paths.len()))
        .collect();
    for path in paths {
        for (s, x) in path.into_iter().enumerate() {
            out[s].push(x);
        }
    }
    out
}

/// `n_paths` direct paths from `x0`, recorded at each of `times`
/// (increasing). Returns `[slice][path]`.
pub fn direct_ensemble<S: StateSpace>(
    space: &S,
    x0: &S::Point,
    times: &[f64],
    n_paths: usize,
    seed: u64,
    ic: u64,
) -> Result<Vec<Vec<S::Point>>> {
    let master = derive_seed(seed, &format!("direct-{ic}"));
    let paths = (0..n_paths)
        .into_par_iter()
        .map(|p| {
            let mut rng = rng::stream(master, "path", p as u64);
            let mut x = x0.clone();
            let mut prev = 0.0;
            let mut rec = Vec::with_capacity(times.len());
            for &t in times {
                x = space
                    .simulate(&x, 1, t - prev, &mut rng)?
                    .pop()
                    .ok_or(AtlasError::EmptySamples)?;
                prev = t;
                rec.push(x.clone());
            }
            Ok(rec)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(transpose(paths, times.len()))
}

/// `n_paths` atlas paths from `s0`, recorded at each of `times`.
pub fn atlas_ensemble<P: Sync>(
    model: &AtlasModel<P>,
    s0: &AtlasState,
    times: &[f64],
    n_paths: usize,
    seed: u64,
    ic: u64,
) -> Vec<Vec<AtlasState>> {
    let master = derive_seed(seed, &format!("atlas-{ic}"));
    let paths: Vec<Vec<AtlasState>> = (0..n_paths)
        .into_par_iter()
        .map(|p| {
            let mut rng = rng::stream(master, "path", p as u64);
            let mut scratch = StepScratch::new(model.dim());
            let mut s = s0.clone();
            let mut prev = 0.0;
            times
                .iter()
                .map(|&t| {
                    advance(model, &mut s, t - prev, &mut rng, &mut scratch);
                    prev = t;
                    s.clone()
                })
                .collect()
        })
        .collect();
    transpose(paths, times.len())
}

/// Distance from an atlas state to net point `j`, measured in the state's
/// chart; infinite when `j` is not a neighbor of the chart.
pub fn chart_distance<P>(model: &AtlasModel<P>, s: &AtlasState, j: usize) -> f64 {
    match model.charts()[s.i].centers.get(&j) {
        Some(c) => crate::linalg::dist2(&s.x, c).sqrt(),
        None => f64::INFINITY,
    }
}

/// Atlas initial state for an ambient point: the origin of the nearest chart.
pub fn atlas_start<S: StateSpace>(
    space: &S,
    model: &AtlasModel<S::Point>,
    x0: &S::Point,
) -> AtlasState {
    let i = nearest_net_index(model.net(), x0, |a, b| space.distance(a, b));
    AtlasState::at_center(i, model.dim())
}

#[derive(Clone, Debug)]
pub struct CompareSettings<P> {
    pub times: Vec<f64>,
    pub n_paths: usize,
    pub coarse: Vec<P>,
    pub delta_c: f64,
    pub seed: u64,
}

/// Run both simulators from every initial condition and compare their
/// coarse-binned distributions at each time.
pub fn compare_simulators<S>(
    space: &S,
    model: &AtlasModel<S::Point>,
    ics: &[S::Point],
    settings: &CompareSettings<S::Point>,
) -> Result<ComparisonReport>
where
    S: StateSpace,
{
    let grid = BinningGrid {
        fine: &model.net().points,
        coarse: &settings.coarse,
        delta: model.delta(),
        delta_c: settings.delta_c,
    };
    let ambient = |a: &S::Point, b: &S::Point| space.distance(a, b);
    let mut report = ComparisonReport::new(settings.times.clone());
    for (ic, x0) in ics.iter().enumerate() {
        let direct = direct_ensemble(
            space,
            x0,
            &settings.times,
            settings.n_paths,
            settings.seed,
            ic as u64,
        )?;
        let s0 = atlas_start(space, model, x0);
        let atlas = atlas_ensemble(
            model,
            &s0,
            &settings.times,
            settings.n_paths,
            settings.seed,
            ic as u64,
        );
        let one = multiscale_compare(
            &settings.times,
            &[direct],
            &[atlas],
            &grid,
            |x: &S::Point, j| space.distance(x, &model.net().points[j]),
            |s: &AtlasState, j| chart_distance(model, s, j),
            ambient,
        )?;
        report.push_ic(one.histograms.into_iter().next().expect("one ic"))?;
    }
    Ok(report)
}

/// Transition statistics of `n_runs` long direct paths, each of `n_records`
/// records spaced `record_dt` apart and labeled by `label`.
#[allow(clippy::too_many_arguments)]
pub fn direct_transitions<S, L>(
    space: &S,
    x0: &S::Point,
    label: L,
    n_runs: usize,
    n_records: usize,
    record_dt: f64,
    seed: u64,
) -> Result<Vec<TransitionStats>>
where
    S: StateSpace,
    L: Fn(&S::Point) -> u32 + Sync,
{
    let master = derive_seed(seed, "direct-transitions");
    (0..n_runs)
        .into_par_iter()
        .map(|r| {
            let mut rng = rng::stream(master, "run", r as u64);
            let mut x = x0.clone();
            let mut labels = Vec::with_capacity(n_records + 1);
            labels.push(label(&x));
            for _ in 0..n_records {
                x = space
                    .simulate(&x, 1, record_dt, &mut rng)?
                    .pop()
                    .ok_or(AtlasError::EmptySamples)?;
                labels.push(label(&x));
            }
            transition_times(&labels, record_dt)
        })
        .collect()
}

/// Transition statistics of `n_runs` long atlas paths of `n_steps` steps,
/// labeling each chart by its net point.
pub fn atlas_transitions<P, L>(
    model: &AtlasModel<P>,
    s0: &AtlasState,
    label: L,
    n_runs: usize,
    n_steps: usize,
    seed: u64,
) -> Result<Vec<TransitionStats>>
where
    P: Sync,
    L: Fn(&P) -> u32,
{
    let master = derive_seed(seed, "atlas-transitions");
    let per_chart: Vec<u32> = model.net().points.iter().map(label).collect();
    (0..n_runs)
        .into_par_iter()
        .map(|r| {
            let mut rng = rng::stream(master, "run", r as u64);
            let charts = run_charts(model, s0, n_steps, &mut rng);
            let labels: Vec<u32> = charts.iter().map(|&i| per_chart[i]).collect();
            transition_times(&labels, model.dt())
        })
        .collect()
}

/// Labels of an atlas chart sequence under ball regions in the ambient space.
pub fn atlas_labels<S: StateSpace>(
    space: &S,
    model: &AtlasModel<S::Point>,
    charts: &[usize],
    regions: &RegionSpec<S::Point>,
) -> Vec<u32> {
    classify_charts(model, charts, regions, |a, b| space.distance(a, b))
}

pub fn pooled(stats: Vec<TransitionStats>) -> TransitionStats {
    let mut out = TransitionStats::default();
    for s in stats {
        out.merge(s);
    }
    out
}
