//! The learned simulator: chart selection, switching, a constant-coefficient
//! Euler step and the confining wall.

use std::io::Write;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::embedding::ChartCoords;
use crate::error::{AtlasError, Result};
use crate::learn::AtlasModel;
use crate::rng::{normal, SimRng};

/// Position `x` in the coordinates of chart `i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AtlasState {
    pub x: ChartCoords,
    pub i: usize,
}

impl AtlasState {
    pub fn at_center(i: usize, d: usize) -> Self {
        AtlasState { x: vec![0.0; d], i }
    }
}

/// Radial retraction onto the open ball of radius `2 delta`. Identity up to
/// `3 delta / 2`, then `2 delta - (delta / 2) exp(3 - 2 |x| / delta)`.
pub fn wall(x: &[f64], delta: f64) -> ChartCoords {
    let mut out = x.to_vec();
    wall_in_place(&mut out, delta);
    out
}

#[inline]
pub fn wall_radius(r: f64, delta: f64) -> f64 {
    if r <= 1.5 * delta {
        r
    } else {
        // far out the correction underflows; stay strictly inside the ball
        let cap = 2.0 * delta * (1.0 - 1e-14);
        (2.0 * delta - 0.5 * delta * (3.0 - 2.0 * r / delta).exp()).min(cap)
    }
}

#[inline]
pub fn wall_in_place(x: &mut [f64], delta: f64) {
    let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if r > 1.5 * delta {
        let scale = wall_radius(r, delta) / r;
        for v in x.iter_mut() {
            *v *= scale;
        }
    }
}

/// Reusable buffers for stepping without allocation.
#[derive(Clone, Debug, Default)]
pub struct StepScratch {
    tmp: Vec<f64>,
    eta: Vec<f64>,
}

impl StepScratch {
    pub fn new(d: usize) -> Self {
        StepScratch {
            tmp: vec![0.0; d],
            eta: vec![0.0; d],
        }
    }
}

/// Next chart: nearest center among the chart itself and its neighbors,
/// ties to the smallest index.
pub fn select_chart<P>(model: &AtlasModel<P>, s: &AtlasState) -> usize {
    select_position(model, s).1
}

#[inline]
fn select_position<P>(model: &AtlasModel<P>, s: &AtlasState) -> (usize, usize) {
    let d = model.dim();
    let table = model.table(s.i);
    let mut best = (0, table.cand[0]);
    let mut best_d = f64::INFINITY;
    for (pos, &j) in table.cand.iter().enumerate() {
        let c = &table.centers[pos * d..(pos + 1) * d];
        let mut acc = 0.0;
        for a in 0..d {
            let diff = s.x[a] - c[a];
            acc += diff * diff;
        }
        if acc < best_d {
            best_d = acc;
            best = (pos, j);
        }
    }
    best
}

/// One step of length `duration`, in place.
pub fn step_with<P>(
    model: &AtlasModel<P>,
    s: &mut AtlasState,
    duration: f64,
    rng: &mut SimRng,
    scratch: &mut StepScratch,
) {
    let d = model.dim();
    if scratch.tmp.len() != d {
        *scratch = StepScratch::new(d);
    }
    let (pos, next) = select_position(model, s);
    if next != s.i {
        let id = model.table(s.i).trans[pos];
        model.transitions()[id].apply_into(&s.x, &mut scratch.tmp);
        s.x.copy_from_slice(&scratch.tmp);
        s.i = next;
    }
    let table = model.table(next);
    for e in scratch.eta.iter_mut() {
        *e = normal(rng);
    }
    let root = duration.sqrt();
    for b in 0..d {
        let mut noise = 0.0;
        for a in 0..d {
            noise += scratch.eta[a] * table.sigma[a * d + b];
        }
        s.x[b] += table.drift[b] * duration + noise * root;
    }
    wall_in_place(&mut s.x, model.delta());
}

pub fn step<P>(model: &AtlasModel<P>, s: &AtlasState, rng: &mut SimRng) -> AtlasState {
    let mut next = s.clone();
    step_with(
        model,
        &mut next,
        model.dt(),
        rng,
        &mut StepScratch::new(model.dim()),
    );
    next
}

/// Advance by a physical duration: whole steps of `dt` followed by one
/// partial step for the remainder.
pub fn advance<P>(
    model: &AtlasModel<P>,
    s: &mut AtlasState,
    duration: f64,
    rng: &mut SimRng,
    scratch: &mut StepScratch,
) {
    let dt = model.dt();
    let full = (duration / dt + 1e-9).floor().max(0.0) as u64;
    for _ in 0..full {
        step_with(model, s, dt, rng, scratch);
    }
    let rest = duration - full as f64 * dt;
    if rest > 1e-12 * dt {
        step_with(model, s, rest, rng, scratch);
    }
}

pub fn validate_state<P>(model: &AtlasModel<P>, s: &AtlasState) -> Result<()> {
    if s.i >= model.n_charts() {
        return Err(AtlasError::invalid(
            "chart",
            format!("index {} out of range ({} charts)", s.i, model.n_charts()),
        ));
    }
    if s.x.len() != model.dim() {
        return Err(AtlasError::DimensionMismatch {
            expected: model.dim(),
            found: s.x.len(),
        });
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct AtlasTrajectory {
    pub dt: f64,
    pub seed: Option<u64>,
    pub times: Vec<f64>,
    pub states: Vec<AtlasState>,
}

impl AtlasTrajectory {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
}

pub fn run<P>(
    model: &AtlasModel<P>,
    s0: &AtlasState,
    n_steps: usize,
    rng: &mut SimRng,
) -> AtlasTrajectory {
    let dt = model.dt();
    let mut times = Vec::with_capacity(n_steps + 1);
    let mut states = Vec::with_capacity(n_steps + 1);
    let mut s = s0.clone();
    let mut scratch = StepScratch::new(model.dim());
    times.push(0.0);
    states.push(s.clone());
    for n in 1..=n_steps {
        step_with(model, &mut s, dt, rng, &mut scratch);
        times.push(n as f64 * dt);
        states.push(s.clone());
    }
    AtlasTrajectory {
        dt,
        seed: None,
        times,
        states,
    }
}

/// Run only recording the chart index after each step (long runs).
pub fn run_charts<P>(
    model: &AtlasModel<P>,
    s0: &AtlasState,
    n_steps: usize,
    rng: &mut SimRng,
) -> Vec<usize> {
    let dt = model.dt();
    let mut s = s0.clone();
    let mut scratch = StepScratch::new(model.dim());
    let mut out = Vec::with_capacity(n_steps + 1);
    out.push(s.i);
    for _ in 0..n_steps {
        step_with(model, &mut s, dt, rng, &mut scratch);
        out.push(s.i);
    }
    out
}

/// A draw from the approximate stationary density: `burn_in` full steps,
/// then one step of duration `u ~ Uniform(0, dt)`.
pub fn sample_qhat<P>(
    model: &AtlasModel<P>,
    s0: &AtlasState,
    burn_in: usize,
    rng: &mut SimRng,
) -> AtlasState {
    let mut s = s0.clone();
    let mut scratch = StepScratch::new(model.dim());
    for _ in 0..burn_in {
        step_with(model, &mut s, model.dt(), rng, &mut scratch);
    }
    let u = rng.random::<f64>() * model.dt();
    step_with(model, &mut s, u, rng, &mut scratch);
    s
}

/// Piecewise-constant lift: the net point of the state's chart.
pub fn lift<'a, P>(model: &'a AtlasModel<P>, s: &AtlasState) -> &'a P {
    &model.net().points[s.i]
}

/// CSV with columns `time, chart_index, x_1..x_d` and, when `lifted` is set,
/// `y_1..y_D` from the piecewise-constant lift (`lifted` holds the ambient
/// coordinates of the net points).
pub fn write_trajectory_csv<W: Write>(
    out: W,
    traj: &AtlasTrajectory,
    lifted: Option<&[Vec<f64>]>,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let d = traj.states.first().map(|s| s.x.len()).unwrap_or(0);
    let ambient = lifted.and_then(|p| p.first().map(Vec::len)).unwrap_or(0);
    let mut header = vec!["time".to_string(), "chart_index".to_string()];
    header.extend((1..=d).map(|a| format!("x_{a}")));
    if lifted.is_some() {
        header.extend((1..=ambient).map(|a| format!("y_{a}")));
    }
    w.write_record(&header)?;
    for (t, s) in traj.times.iter().zip(&traj.states) {
        let mut rec = vec![t.to_string(), s.i.to_string()];
        rec.extend(s.x.iter().map(|v| v.to_string()));
        if let Some(p) = lifted {
            rec.extend(p[s.i].iter().map(|v| v.to_string()));
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}
