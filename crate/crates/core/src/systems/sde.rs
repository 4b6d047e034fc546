//! Euler-Maruyama simulators for gradient SDEs and the potentials used as
//! reference systems.

use std::f64::consts::PI;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{AtlasError, Result};
use crate::netspace::{euclidean, StateSpace};
use crate::rng::{self, normal, SimRng};

pub type VectorField = Arc<dyn Fn(&[f64], &mut [f64]) + Send + Sync>;

#[derive(Clone)]
pub enum Diffusion {
    Identity,
    Scalar(f64),
    /// Row-major `D x D` matrix at the current state.
    Matrix(VectorField),
}

/// `dY = b(Y) dt + sigma(Y) dB`, integrated with a fixed micro step.
#[derive(Clone)]
pub struct SdeSystem {
    pub dim: usize,
    pub drift: VectorField,
    pub diffusion: Diffusion,
    pub micro_dt: f64,
    /// Wrap every coordinate into `[0, period)` after each step.
    pub period: Option<f64>,
}

impl std::fmt::Debug for SdeSystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SdeSystem")
            .field("dim", &self.dim)
            .field("micro_dt", &self.micro_dt)
            .field("period", &self.period)
            .finish()
    }
}

impl SdeSystem {
    pub fn new(
        dim: usize,
        micro_dt: f64,
        drift: impl Fn(&[f64], &mut [f64]) + Send + Sync + 'static,
    ) -> Self {
        SdeSystem {
            dim,
            drift: Arc::new(drift),
            diffusion: Diffusion::Identity,
            micro_dt,
            period: None,
        }
    }

    pub fn with_diffusion(mut self, diffusion: Diffusion) -> Self {
        self.diffusion = diffusion;
        self
    }

    pub fn with_period(mut self, period: f64) -> Self {
        self.period = Some(period);
        self
    }
}

/// Explicit Euler-Maruyama from `x0` for `total_time`. When `total_time` is
/// not a multiple of the micro step, the last step is shortened.
pub fn euler_maruyama(
    sys: &SdeSystem,
    x0: &[f64],
    total_time: f64,
    rng: &mut SimRng,
) -> Result<Vec<f64>> {
    if total_time < 0.0 || !total_time.is_finite() {
        return Err(AtlasError::invalid("total_time", "must be finite and >= 0"));
    }
    if x0.len() != sys.dim {
        return Err(AtlasError::DimensionMismatch {
            expected: sys.dim,
            found: x0.len(),
        });
    }
    let h = sys.micro_dt;
    let full = (total_time / h + 1e-9).floor() as usize;
    let rest = total_time - full as f64 * h;
    let mut x = x0.to_vec();
    let mut b = vec![0.0; sys.dim];
    let mut eta = vec![0.0; sys.dim];
    let mut sig = match sys.diffusion {
        Diffusion::Matrix(_) => vec![0.0; sys.dim * sys.dim],
        _ => Vec::new(),
    };
    let n_steps = if rest > 1e-12 * h { full + 1 } else { full };
    for n in 0..n_steps {
        let dt = if n < full { h } else { rest };
        (sys.drift)(&x, &mut b);
        let root = dt.sqrt();
        match &sys.diffusion {
            Diffusion::Identity => {
                for (xi, bi) in x.iter_mut().zip(&b) {
                    *xi += bi * dt + root * normal(rng);
                }
            }
            Diffusion::Scalar(s) => {
                for (xi, bi) in x.iter_mut().zip(&b) {
                    *xi += bi * dt + s * root * normal(rng);
                }
            }
            Diffusion::Matrix(f) => {
                f(&x, &mut sig);
                for e in eta.iter_mut() {
                    *e = normal(rng);
                }
                let dim = sys.dim;
                for i in 0..dim {
                    let mut noise = 0.0;
                    for j in 0..dim {
                        noise += sig[i * dim + j] * eta[j];
                    }
                    x[i] += b[i] * dt + root * noise;
                }
            }
        }
        if let Some(period) = sys.period {
            for xi in x.iter_mut() {
                *xi = xi.rem_euclid(period);
            }
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(AtlasError::NonFinite { step: n + 1 });
        }
    }
    Ok(x)
}

/// Distance used by an [`SdeSpace`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Metric {
    Euclidean,
    /// Flat torus with the given period in every coordinate.
    Periodic(f64),
}

impl Metric {
    pub fn eval(&self, a: &[f64], b: &[f64]) -> f64 {
        match *self {
            Metric::Euclidean => euclidean(a, b),
            Metric::Periodic(l) => a
                .iter()
                .zip(b)
                .map(|(x, y)| {
                    let d = (x - y).rem_euclid(l);
                    let d = d.min(l - d);
                    d * d
                })
                .sum::<f64>()
                .sqrt(),
        }
    }
}

/// An SDE packaged as a state space.
#[derive(Clone, Debug)]
pub struct SdeSpace {
    pub system: SdeSystem,
    pub metric: Metric,
    pub initial: Vec<Vec<f64>>,
}

impl StateSpace for SdeSpace {
    type Point = Vec<f64>;

    fn distance(&self, a: &Vec<f64>, b: &Vec<f64>) -> f64 {
        self.metric.eval(a, b)
    }

    fn simulate(
        &self,
        start: &Vec<f64>,
        n_paths: usize,
        t0: f64,
        rng: &mut SimRng,
    ) -> Result<Vec<Vec<f64>>> {
        (0..n_paths)
            .map(|_| euler_maruyama(&self.system, start, t0, rng))
            .collect()
    }

    fn initial_points(&self) -> &[Vec<f64>] {
        &self.initial
    }

    fn micro_dt(&self) -> Option<f64> {
        Some(self.system.micro_dt)
    }
}

impl SdeSpace {
    /// Replace every initial point by the endpoint of a short run of length
    /// `time` (one independent stream per point).
    pub fn heal(mut self, time: f64, seed: u64) -> Result<Self> {
        let healed: Result<Vec<Vec<f64>>> = self
            .initial
            .par_iter()
            .enumerate()
            .map(|(i, x)| {
                let mut rng = rng::stream(seed, "heal", i as u64);
                euler_maruyama(&self.system, x, time, &mut rng)
            })
            .collect();
        self.initial = healed?;
        Ok(self)
    }
}

/// `lo, lo + h, ...` up to and including `hi` (within rounding).
pub fn grid_1d(lo: f64, hi: f64, h: f64) -> Vec<f64> {
    let n = ((hi - lo) / h + 1e-9).floor() as usize;
    (0..=n).map(|i| lo + i as f64 * h).collect()
}

/// `U1(x) = 16 x^2 (x - 1)^2`.
pub fn u1(x: f64) -> f64 {
    16.0 * x * x * (x - 1.0) * (x - 1.0)
}

pub fn u1_grad(x: f64) -> f64 {
    32.0 * x * (x - 1.0) * (2.0 * x - 1.0)
}

/// `V1(x) = U1(x) + cos(100 pi x) / 6`.
pub fn v1(x: f64) -> f64 {
    u1(x) + (100.0 * PI * x).cos() / 6.0
}

pub fn v1_grad(x: f64) -> f64 {
    u1_grad(x) - (100.0 * PI / 6.0) * (100.0 * PI * x).sin()
}

pub const THREE_WELL_CENTERS: [[f64; 2]; 3] = [[0.0, 0.0], [1.5, 0.0], [0.8, 1.05]];
pub const THREE_WELL_WIDTHS: [f64; 3] = [1.0 / 5.0, 1.0 / 5.0, 1.0 / 6.0];

fn three_well_exponents(x: &[f64]) -> [f64; 3] {
    let mut a = [0.0; 3];
    for (i, (p, c)) in THREE_WELL_CENTERS.iter().zip(THREE_WELL_WIDTHS).enumerate() {
        let dx = x[0] - p[0];
        let dy = x[1] - p[1];
        a[i] = -(dx * dx + dy * dy) / c;
    }
    a
}

/// `U2(x) = -ln sum_i exp(-|x - p_i|^2 / c_i)`, evaluated as a log-sum-exp.
pub fn u2(x: &[f64]) -> f64 {
    let a = three_well_exponents(x);
    let m = a.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    -(m + a.iter().map(|v| (v - m).exp()).sum::<f64>().ln())
}

pub fn u2_grad(x: &[f64]) -> [f64; 2] {
    let a = three_well_exponents(x);
    let m = a.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = a.iter().map(|v| (v - m).exp()).collect();
    let total: f64 = w.iter().sum();
    let mut g = [0.0; 2];
    for ((p, c), wi) in THREE_WELL_CENTERS.iter().zip(THREE_WELL_WIDTHS).zip(&w) {
        let s = wi / total * 2.0 / c;
        g[0] += s * (x[0] - p[0]);
        g[1] += s * (x[1] - p[1]);
    }
    g
}

/// `V2(x) = U2(x) + cos(100 pi x1) / 6 + cos(100 pi x2) / 6`.
pub fn v2(x: &[f64]) -> f64 {
    u2(x) + (100.0 * PI * x[0]).cos() / 6.0 + (100.0 * PI * x[1]).cos() / 6.0
}

pub fn v2_grad(x: &[f64]) -> [f64; 2] {
    let g = u2_grad(x);
    let k = 100.0 * PI / 6.0;
    [
        g[0] - k * (100.0 * PI * x[0]).sin(),
        g[1] - k * (100.0 * PI * x[1]).sin(),
    ]
}

pub fn double_well_smooth() -> SdeSystem {
    SdeSystem::new(1, 0.005, |x, out| out[0] = -u1_grad(x[0]))
}

pub fn double_well_rough() -> SdeSystem {
    SdeSystem::new(1, 0.00005, |x, out| out[0] = -v1_grad(x[0]))
}

pub fn three_well_smooth() -> SdeSystem {
    SdeSystem::new(2, 0.005, |x, out| {
        let g = u2_grad(x);
        out[0] = -g[0];
        out[1] = -g[1];
    })
}

pub fn three_well_rough() -> SdeSystem {
    SdeSystem::new(2, 0.00005, |x, out| {
        let g = v2_grad(x);
        out[0] = -g[0];
        out[1] = -g[1];
    })
}

/// `dX = b dt + sigma dB` on the circle `[0, period)`.
pub fn constant_drift_periodic(b: f64, sigma: f64, period: f64, micro_dt: f64) -> SdeSystem {
    SdeSystem::new(1, micro_dt, move |_, out| out[0] = b)
        .with_diffusion(Diffusion::Scalar(sigma))
        .with_period(period)
}

/// Grid on `[-0.5, 1.5]` with the given spacing.
pub fn double_well_grid(spacing: f64) -> Vec<Vec<f64>> {
    grid_1d(-0.5, 1.5, spacing)
        .into_iter()
        .map(|x| vec![x])
        .collect()
}

/// Grid on `[-1.5, 3] x [-1.5, 2.5]`, keeping points with `U2 < 10`.
pub fn three_well_grid(spacing: f64) -> Vec<Vec<f64>> {
    let xs = grid_1d(-1.5, 3.0, spacing);
    let ys = grid_1d(-1.5, 2.5, spacing);
    let mut out = Vec::new();
    for &y in &ys {
        for &x in &xs {
            let p = [x, y];
            if u2(&p) < 10.0 {
                out.push(p.to_vec());
            }
        }
    }
    out
}

pub fn double_well_space(rough: bool, spacing: f64) -> SdeSpace {
    SdeSpace {
        system: if rough {
            double_well_rough()
        } else {
            double_well_smooth()
        },
        metric: Metric::Euclidean,
        initial: double_well_grid(spacing),
    }
}

pub fn three_well_space(rough: bool, spacing: f64) -> SdeSpace {
    SdeSpace {
        system: if rough {
            three_well_rough()
        } else {
            three_well_smooth()
        },
        metric: Metric::Euclidean,
        initial: three_well_grid(spacing),
    }
}

pub fn constant_drift_space(
    b: f64,
    sigma: f64,
    period: f64,
    spacing: f64,
    micro_dt: f64,
) -> SdeSpace {
    let n = (period / spacing).round() as usize;
    SdeSpace {
        system: constant_drift_periodic(b, sigma, period, micro_dt),
        metric: Metric::Periodic(period),
        initial: (0..n).map(|i| vec![i as f64 * spacing]).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frozen_and_constant_drift() {
        let sys = SdeSystem::new(2, 0.01, |_, o| {
            o[0] = 0.0;
            o[1] = 0.0
        })
        .with_diffusion(Diffusion::Scalar(0.0));
        let mut rng = rng::stream(1, "t", 0);
        assert_eq!(
            euler_maruyama(&sys, &[0.3, -1.0], 1.0, &mut rng).unwrap(),
            vec![0.3, -1.0]
        );

        let sys = SdeSystem::new(1, 0.01, |_, o| o[0] = 2.5).with_diffusion(Diffusion::Scalar(0.0));
        let x = euler_maruyama(&sys, &[1.0], 0.73, &mut rng).unwrap();
        assert!((x[0] - (1.0 + 2.5 * 0.73)).abs() < 1e-12);
        // partial final step
        let x = euler_maruyama(&sys, &[0.0], 0.015, &mut rng).unwrap();
        assert!((x[0] - 0.0375).abs() < 1e-12);
    }

    #[test]
    fn nonfinite_state_is_reported() {
        let sys = SdeSystem::new(1, 0.1, |x, o| o[0] = x[0] * 1e200)
            .with_diffusion(Diffusion::Scalar(0.0));
        let mut rng = rng::stream(1, "t", 0);
        match euler_maruyama(&sys, &[1e200], 10.0, &mut rng) {
            Err(AtlasError::NonFinite { step }) => assert_eq!(step, 1),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn brownian_variance() {
        let sys = SdeSystem::new(1, 0.01, |_, o| o[0] = 0.0);
        let mut rng = rng::stream(3, "bm", 0);
        let n = 10_000;
        let xs: Vec<f64> = (0..n)
            .map(|_| euler_maruyama(&sys, &[0.0], 1.0, &mut rng).unwrap()[0])
            .collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        // standard error of the sample variance of N(0,1): sqrt(2/(n-1))
        assert!(
            (var - 1.0).abs() < 3.0 * (2.0 / (n - 1) as f64).sqrt(),
            "var {var}"
        );
    }

    #[test]
    fn double_well_critical_points() {
        assert_eq!(u1_grad(0.0), 0.0);
        assert_eq!(u1_grad(1.0), 0.0);
        assert_eq!(u1_grad(0.5), 0.0);
    }

    fn central(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
        (f(x + h) - f(x - h)) / (2.0 * h)
    }

    #[test]
    fn rough_double_well_gradient_matches_finite_differences() {
        let x = 0.005;
        let fd = central(v1, x, 1e-7);
        assert!((fd - v1_grad(x)).abs() < 1e-6 * v1_grad(x).abs().max(1.0));
        // drift form
        let drift = -u1_grad(x) + (100.0 * PI / 6.0) * (100.0 * PI * x).sin();
        let sys = double_well_rough();
        let mut out = [0.0];
        (sys.drift)(&[x], &mut out);
        assert!((out[0] - drift).abs() < 1e-12);
    }

    #[test]
    fn potentials_match_finite_differences_on_grid() {
        for i in 0..40 {
            let x = -0.4 + i as f64 * 0.0437;
            for (f, g) in [
                (u1 as fn(f64) -> f64, u1_grad as fn(f64) -> f64),
                (v1, v1_grad),
            ] {
                let fd = central(f, x, 1e-6);
                let an = g(x);
                assert!(
                    (fd - an).abs() <= 1e-5 * an.abs().max(1.0),
                    "x={x}: {fd} vs {an}"
                );
            }
            for j in 0..20 {
                let p = [x * 2.0, -1.0 + j as f64 * 0.17];
                for (f, g) in [
                    (u2 as fn(&[f64]) -> f64, u2_grad as fn(&[f64]) -> [f64; 2]),
                    (v2, v2_grad),
                ] {
                    let an = g(&p);
                    for a in 0..2 {
                        let mut hi = p;
                        let mut lo = p;
                        hi[a] += 1e-6;
                        lo[a] -= 1e-6;
                        let fd = (f(&hi) - f(&lo)) / 2e-6;
                        assert!(
                            (fd - an[a]).abs() <= 1e-5 * an[a].abs().max(1.0),
                            "{p:?}: {fd} vs {}",
                            an[a]
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn three_well_gradients_small_at_centers() {
        for p in THREE_WELL_CENTERS {
            let g = u2_grad(&p);
            assert!((g[0] * g[0] + g[1] * g[1]).sqrt() < 0.2);
        }
    }

    #[test]
    fn three_well_potential_direct_evaluation() {
        // naive sum of exponentials at a point where nothing underflows
        let x = [0.75, 0.3];
        let naive: f64 = THREE_WELL_CENTERS
            .iter()
            .zip(THREE_WELL_WIDTHS)
            .map(|(p, c)| (-((x[0] - p[0]).powi(2) + (x[1] - p[1]).powi(2)) / c).exp())
            .sum::<f64>();
        assert!((u2(&x) + naive.ln()).abs() < 1e-10);
    }

    #[test]
    fn three_well_grid_discards_high_potential() {
        let g = three_well_grid(0.05);
        assert!(!g.is_empty());
        assert!(g.iter().all(|p| u2(p) < 10.0));
        assert!(g.len() < grid_1d(-1.5, 3.0, 0.05).len() * grid_1d(-1.5, 2.5, 0.05).len());
    }

    #[test]
    fn zero_temperature_descends_to_critical_point() {
        let sys = three_well_smooth().with_diffusion(Diffusion::Scalar(0.0));
        let mut rng = rng::stream(0, "t", 0);
        let x = euler_maruyama(&sys, &[0.3, 0.2], 20.0, &mut rng).unwrap();
        let g = u2_grad(&x);
        assert!((g[0] * g[0] + g[1] * g[1]).sqrt() < 1e-6);
        let sys = double_well_smooth().with_diffusion(Diffusion::Scalar(0.0));
        let x = euler_maruyama(&sys, &[0.8], 20.0, &mut rng).unwrap();
        assert!(u1_grad(x[0]).abs() < 1e-6);
    }

    #[test]
    fn periodic_metric_wraps() {
        let m = Metric::Periodic(2.0);
        assert!((m.eval(&[0.1], &[1.9]) - 0.2).abs() < 1e-12);
        assert!((m.eval(&[0.5], &[1.0]) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn grids_are_exact() {
        let g = double_well_grid(0.01);
        assert_eq!(g.len(), 201);
        assert_eq!(g[0][0], -0.5);
        assert!((g[200][0] - 1.5).abs() < 1e-12);
    }
}
