//! Slow planar dynamics driven by a fast 80-variable Lorenz-96 system.
//!
//! `x' = eps f(x) + g(y)`, `y' = L96(y)`, where `f` is the Cartesian form of
//! `r' = -(r - 3/4)(r - 3/2)(r - 2)`, `theta' = r - 3/2`, and `g` averages
//! two interleaved blocks of `y`. Ambient points are 82-vectors
//! `[x1, x2, 1e-4 * y]`.

use rayon::prelude::*;

use crate::error::{AtlasError, Result};
use crate::netspace::{euclidean, StateSpace};
use crate::rng::{self, normal, SimRng};

pub const N_FAST: usize = 80;
pub const DIM: usize = N_FAST + 2;
pub const FAST_SCALE: f64 = 1e-4;
pub const JITTER: f64 = 1e-5;
pub const G_OFFSET: f64 = 0.2925;

/// Membership of fast index `i` (0-based) in the first averaging block
/// (1-based ranges 1:10, 21:30, 41:50, 61:70).
pub fn in_first_block(i: usize) -> bool {
    (i / 10).is_multiple_of(2)
}

#[derive(Clone, Debug)]
pub struct Lorenz96Multiscale {
    pub eps: f64,
    pub forcing: f64,
    pub h: f64,
    initial: Vec<Vec<f64>>,
}

/// Radial slow field in Cartesian coordinates.
pub fn slow_field(x: &[f64]) -> [f64; 2] {
    let r = (x[0] * x[0] + x[1] * x[1]).sqrt();
    let rdot = -(r - 0.75) * (r - 1.5) * (r - 2.0);
    let thdot = r - 1.5;
    let (c, s) = if r > 0.0 {
        (x[0] / r, x[1] / r)
    } else {
        (0.0, 0.0)
    };
    [rdot * c - thdot * x[1], rdot * s + thdot * x[0]]
}

pub fn lorenz96(y: &[f64], forcing: f64, out: &mut [f64]) {
    let n = y.len();
    for i in 0..n {
        let im2 = y[(i + n - 2) % n];
        let im1 = y[(i + n - 1) % n];
        let ip1 = y[(i + 1) % n];
        out[i] = -im2 * im1 + im1 * ip1 - y[i] + forcing;
    }
}

pub fn coupling(y: &[f64]) -> [f64; 2] {
    let mut g = [0.0; 2];
    for (i, v) in y.iter().enumerate() {
        g[if in_first_block(i) { 0 } else { 1 }] += v;
    }
    [g[0] / 320.0 - G_OFFSET, g[1] / 320.0 - G_OFFSET]
}

/// Classical fourth-order Runge-Kutta step.
pub fn rk4_step(state: &mut [f64], h: f64, rhs: impl Fn(&[f64], &mut [f64])) {
    let n = state.len();
    let mut k1 = vec![0.0; n];
    let mut k2 = vec![0.0; n];
    let mut k3 = vec![0.0; n];
    let mut k4 = vec![0.0; n];
    let mut tmp = vec![0.0; n];
    rhs(state, &mut k1);
    for i in 0..n {
        tmp[i] = state[i] + 0.5 * h * k1[i];
    }
    rhs(&tmp, &mut k2);
    for i in 0..n {
        tmp[i] = state[i] + 0.5 * h * k2[i];
    }
    rhs(&tmp, &mut k3);
    for i in 0..n {
        tmp[i] = state[i] + h * k3[i];
    }
    rhs(&tmp, &mut k4);
    for i in 0..n {
        state[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
}

impl Lorenz96Multiscale {
    pub fn new(eps: f64) -> Self {
        Lorenz96Multiscale {
            eps,
            forcing: 8.0,
            h: 0.05,
            initial: Vec::new(),
        }
    }

    pub fn rhs(&self, s: &[f64], out: &mut [f64]) {
        let f = slow_field(&s[..2]);
        let g = coupling(&s[2..]);
        out[0] = self.eps * f[0] + g[0];
        out[1] = self.eps * f[1] + g[1];
        lorenz96(&s[2..], self.forcing, &mut out[2..]);
    }

    /// Integrate the internal (unscaled) state for `time`.
    pub fn integrate(&self, state: &mut [f64], time: f64) -> Result<()> {
        let steps = (time / self.h).round() as usize;
        for n in 0..steps {
            rk4_step(state, self.h, |s, o| self.rhs(s, o));
            if state.iter().any(|v| !v.is_finite()) {
                return Err(AtlasError::NonFinite { step: n + 1 });
            }
        }
        Ok(())
    }

    pub fn to_internal(v: &[f64]) -> Vec<f64> {
        let mut s = v.to_vec();
        s[2..].iter_mut().for_each(|y| *y /= FAST_SCALE);
        s
    }

    pub fn to_ambient(s: &[f64]) -> Vec<f64> {
        let mut v = s.to_vec();
        v[2..].iter_mut().for_each(|y| *y *= FAST_SCALE);
        v
    }

    /// `n` standard-normal 82-vectors (fast part scaled by 1e-4), each run
    /// forward for `heal_time`.
    pub fn with_sampled_initial(mut self, n: usize, heal_time: f64, seed: u64) -> Result<Self> {
        let initial: Result<Vec<Vec<f64>>> = (0..n)
            .into_par_iter()
            .map(|i| {
                let mut rng = rng::stream(seed, "l96-init", i as u64);
                let mut v: Vec<f64> = (0..DIM).map(|_| normal(&mut rng)).collect();
                v[2..].iter_mut().for_each(|y| *y *= FAST_SCALE);
                let mut s = Self::to_internal(&v);
                self.integrate(&mut s, heal_time)?;
                Ok(Self::to_ambient(&s))
            })
            .collect();
        self.initial = initial?;
        Ok(self)
    }

    pub fn with_initial(mut self, initial: Vec<Vec<f64>>) -> Self {
        self.initial = initial;
        self
    }
}

impl StateSpace for Lorenz96Multiscale {
    type Point = Vec<f64>;

    fn distance(&self, a: &Vec<f64>, b: &Vec<f64>) -> f64 {
        euclidean(a, b)
    }

    /// Each path starts from `start` plus `1e-5` standard-normal jitter.
    fn simulate(
        &self,
        start: &Vec<f64>,
        n_paths: usize,
        t0: f64,
        rng: &mut SimRng,
    ) -> Result<Vec<Vec<f64>>> {
        if start.len() != DIM {
            return Err(AtlasError::DimensionMismatch {
                expected: DIM,
                found: start.len(),
            });
        }
        (0..n_paths)
            .map(|_| {
                let jittered: Vec<f64> = start.iter().map(|v| v + JITTER * normal(rng)).collect();
                let mut s = Self::to_internal(&jittered);
                self.integrate(&mut s, t0)?;
                Ok(Self::to_ambient(&s))
            })
            .collect()
    }

    fn initial_points(&self) -> &[Vec<f64>] {
        &self.initial
    }

    fn micro_dt(&self) -> Option<f64> {
        Some(self.h)
    }
}
