//! Randomly forced string: functions on 100 grid points of `[0, 1]` with
//! pinned endpoints and fixed norm, driven by Brownian bridges.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::Result;
use crate::netspace::{euclidean, StateSpace};
use crate::rng::{self, normal, SimRng};

pub const N_GRID: usize = 100;

/// Distances are Euclidean in R^100 scaled by this factor, the discrete L2
/// norm on `[0, 1]` (squared distance divided by the number of grid points).
pub const DISTANCE_SCALE: f64 = 0.1;

pub fn grid() -> Vec<f64> {
    (0..N_GRID)
        .map(|i| i as f64 / (N_GRID - 1) as f64)
        .collect()
}

/// `sin(pi x)` sampled on the grid.
pub fn sine_profile() -> Vec<f64> {
    grid().iter().map(|x| (PI * x).sin()).collect()
}

/// Norm every state is held at.
pub fn f_norm() -> f64 {
    crate::linalg::norm(&sine_profile())
}

/// Centered moving average over 5 points; the window shrinks symmetrically
/// near the ends (1, 3, 5, ..., 5, 3, 1).
pub fn smooth(f: &[f64]) -> Vec<f64> {
    let n = f.len();
    (0..n)
        .map(|i| {
            let half = 2.min(i).min(n - 1 - i);
            let lo = i - half;
            let hi = i + half;
            f[lo..=hi].iter().sum::<f64>() / (hi - lo + 1) as f64
        })
        .collect()
}

/// One step: add a scaled Brownian bridge, smooth, renormalize, re-pin.
pub fn string_step(f: &[f64], norm: f64, rng: &mut SimRng) -> Vec<f64> {
    let n = f.len();
    let xs = grid();
    let mut w = Vec::with_capacity(n);
    let mut acc = 0.0;
    for _ in 0..n {
        acc += normal(rng);
        w.push(acc);
    }
    let w0 = w[0];
    for v in w.iter_mut() {
        *v -= w0;
    }
    let w_end = w[n - 1];
    for (v, x) in w.iter_mut().zip(&xs) {
        *v -= x * w_end;
    }
    let g: Vec<f64> = f.iter().zip(&w).map(|(a, b)| a + b / 100.0).collect();
    let mut g = smooth(&g);
    let current = crate::linalg::norm(&g);
    for v in g.iter_mut() {
        *v *= norm / current;
    }
    g[0] = 0.0;
    g[n - 1] = 0.0;
    g
}

pub fn string_distance(a: &[f64], b: &[f64]) -> f64 {
    euclidean(a, b) * DISTANCE_SCALE
}

/// The string simulator as a state space. Time is counted in steps.
pub struct StringSpace {
    norm: f64,
    initial: Vec<Vec<f64>>,
}

impl StringSpace {
    pub fn new(initial: Vec<Vec<f64>>) -> Self {
        StringSpace {
            norm: f_norm(),
            initial,
        }
    }

    /// Uniform samples on the constraint sphere, healed by `heal_steps` steps.
    pub fn sampled(n: usize, heal_steps: usize, seed: u64) -> Self {
        let norm = f_norm();
        let initial = (0..n)
            .into_par_iter()
            .map(|i| {
                let mut rng = rng::stream(seed, "string-init", i as u64);
                let mut f = vec![0.0; N_GRID];
                for v in f.iter_mut().take(N_GRID - 1).skip(1) {
                    *v = normal(&mut rng);
                }
                let s = norm / crate::linalg::norm(&f);
                f.iter_mut().for_each(|v| *v *= s);
                for _ in 0..heal_steps {
                    f = string_step(&f, norm, &mut rng);
                }
                f
            })
            .collect();
        StringSpace { norm, initial }
    }

    pub fn norm(&self) -> f64 {
        self.norm
    }
}

impl StateSpace for StringSpace {
    type Point = Vec<f64>;

    fn distance(&self, a: &Vec<f64>, b: &Vec<f64>) -> f64 {
        string_distance(a, b)
    }

    fn simulate(
        &self,
        start: &Vec<f64>,
        n_paths: usize,
        t0: f64,
        rng: &mut SimRng,
    ) -> Result<Vec<Vec<f64>>> {
        let steps = t0.round() as usize;
        Ok((0..n_paths)
            .map(|_| {
                let mut f = start.clone();
                for _ in 0..steps {
                    f = string_step(&f, self.norm, rng);
                }
                f
            })
            .collect())
    }

    fn initial_points(&self) -> &[Vec<f64>] {
        &self.initial
    }

    fn micro_dt(&self) -> Option<f64> {
        Some(1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smoother_window_shrinks_at_ends() {
        let f: Vec<f64> = (0..7).map(|i| (i * i) as f64).collect();
        let s = smooth(&f);
        assert_eq!(s[0], 0.0);
        assert_eq!(s[1], (0.0 + 1.0 + 4.0) / 3.0);
        assert_eq!(s[3], (1.0 + 4.0 + 9.0 + 16.0 + 25.0) / 5.0);
        assert_eq!(s[6], 36.0);
    }

    #[test]
    fn invariants_hold_over_many_steps() {
        let norm = f_norm();
        let mut f = sine_profile();
        let mut rng = rng::stream(5, "string", 0);
        for _ in 0..10_000 {
            f = string_step(&f, norm, &mut rng);
            assert_eq!(f[0], 0.0);
            assert_eq!(f[N_GRID - 1], 0.0);
            assert!((crate::linalg::norm(&f) - norm).abs() < 1e-9);
        }
    }

    #[test]
    fn single_step_stays_close() {
        let norm = f_norm();
        let start = sine_profile();
        let mut rng = rng::stream(6, "string", 0);
        let close = (0..1000)
            .filter(|_| string_distance(&string_step(&start, norm, &mut rng), &start) < 0.05)
            .count();
        assert!(close >= 990, "{close}");
    }

    #[test]
    fn sign_flip_symmetry() {
        let norm = f_norm();
        let f = sine_profile();
        let neg: Vec<f64> = f.iter().map(|v| -v).collect();
        let mut rng = rng::stream(8, "flip", 0);
        let a: Vec<f64> = (0..4000)
            .map(|_| string_distance(&string_step(&f, norm, &mut rng), &f))
            .collect();
        let b: Vec<f64> = (0..4000)
            .map(|_| string_distance(&string_step(&neg, norm, &mut rng), &neg))
            .collect();
        let hist = |v: &[f64]| {
            let mut h = [0usize; 8];
            for x in v {
                h[((x / 0.001) as usize).min(7)] += 1;
            }
            h
        };
        let (ha, hb) = (hist(&a), hist(&b));
        let l1: usize = ha.iter().zip(&hb).map(|(x, y)| x.abs_diff(*y)).sum();
        assert!((l1 as f64) / 4000.0 < 0.08, "{ha:?} vs {hb:?}");
    }
}
