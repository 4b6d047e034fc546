mod common;

use atlas_core::analysis::{effective_potential_1d, local_maxima, local_minima};
use atlas_core::learn::{
    estimate_coefficients, generate_landmarks, learn_atlas_with_diagnostics, learn_transition,
};
use atlas_core::rng::{self, normal};
use atlas_core::systems::sde::{double_well_space, Diffusion, Metric, SdeSpace, SdeSystem};
use atlas_core::{learn_atlas, AtlasError, AtlasModel, AtlasParams};
use common::e1;
use nalgebra::DMatrix;
use proptest::prelude::*;

fn line_space(b: f64, sigma: f64, initial: Vec<f64>) -> SdeSpace {
    SdeSpace {
        system: SdeSystem::new(1, 0.001, move |_, o| o[0] = b)
            .with_diffusion(Diffusion::Scalar(sigma)),
        metric: Metric::Euclidean,
        initial: initial.into_iter().map(|x| vec![x]).collect(),
    }
}

/// Sign relating chart 0's coordinate to the ambient axis.
fn orientation(model: &AtlasModel<Vec<f64>>) -> f64 {
    let net = model.net();
    let j = net.neighbors[0][0];
    (model.charts()[0].centers[&j][0] * (net.points[j][0] - net.points[0][0])).signum()
}

#[test]
fn constant_coefficient_line() {
    let space = line_space(3.0, 2.0, vec![0.0, 0.15]);
    let mut params = AtlasParams::experimental(0.1, 1);
    params.t0 = 0.01;
    params.dt = 0.002;
    params.m = 20;
    let model = learn_atlas(&space, &params, 3).unwrap();
    let b = orientation(&model) * model.charts()[0].b[0];
    let sigma = model.charts()[0].sigma[0][0];
    let se = 2.0 / (params.p as f64 * params.t0).sqrt();
    assert!((b - 3.0).abs() <= 3.0 * se, "drift {b}");
    assert!((sigma / 2.0 - 1.0).abs() <= 0.05, "sigma {sigma}");
}

#[test]
fn brownian_landmark_spread() {
    let space = line_space(0.0, 1.0, vec![0.0]);
    let lm = generate_landmarks(
        &space,
        &vec![0.0],
        10,
        0.01,
        &mut rng::stream(5, "landmarks", 0),
    )
    .unwrap();
    assert_eq!(lm.len(), 11);
    assert_eq!(lm[0], vec![0.0]);
    let xs: Vec<f64> = lm[1..].iter().map(|v| v[0]).collect();
    let mean = xs.iter().sum::<f64>() / 10.0;
    let sd = (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / 9.0).sqrt();
    let se = 0.1 / (2.0 * 9.0f64).sqrt();
    assert!((sd - 0.1).abs() <= 3.0 * se, "sd {sd}");
}

#[test]
fn frozen_dynamics_are_degenerate() {
    let space = line_space(0.0, 0.0, vec![0.0]);
    let params = AtlasParams::experimental(0.1, 1);
    let err = learn_atlas(&space, &params, 1).unwrap_err();
    assert!(
        matches!(err, AtlasError::DegenerateLandmarks { chart: 0, .. }),
        "{err:?}"
    );
    assert!(err.to_string().contains("chart 0"));
    assert_eq!(err.exit_code(), 3);
}

#[test]
fn sigma_squares_to_covariance() {
    let mut r = rng::stream(8, "cov", 0);
    let pts: Vec<Vec<f64>> = (0..500)
        .map(|_| {
            let (a, b, c) = (normal(&mut r), normal(&mut r), normal(&mut r));
            vec![a, 0.5 * a + b, 0.1 * c - a]
        })
        .collect();
    let t0 = 0.04;
    let (_, s) = estimate_coefficients(&pts, t0).unwrap();
    let s = DMatrix::from_fn(3, 3, |i, j| s[i][j]);
    assert!((s.clone() - s.transpose()).abs().max() < 1e-14);
    let mean: Vec<f64> = (0..3)
        .map(|a| pts.iter().map(|p| p[a]).sum::<f64>() / 500.0)
        .collect();
    let cov = DMatrix::from_fn(3, 3, |i, j| {
        pts.iter()
            .map(|p| (p[i] - mean[i]) * (p[j] - mean[j]))
            .sum::<f64>()
            / (499.0 * t0)
    });
    assert!((&s * &s - &cov).abs().max() <= 1e-10 * cov.abs().max());
}

fn rotation(theta: f64) -> [[f64; 2]; 2] {
    [[theta.cos(), theta.sin()], [-theta.sin(), theta.cos()]]
}

fn affine(x: &[Vec<f64>], r: [[f64; 2]; 2], v: [f64; 2]) -> Vec<Vec<f64>> {
    x.iter()
        .map(|p| {
            (0..2)
                .map(|b| p[0] * r[0][b] + p[1] * r[1][b] + v[b])
                .collect()
        })
        .collect()
}

#[test]
fn identical_charts_identity_and_round_trip() {
    let mut r = rng::stream(2, "pts", 0);
    let x: Vec<Vec<f64>> = (0..30)
        .map(|_| vec![0.1 * normal(&mut r), 0.1 * normal(&mut r)])
        .collect();
    let s = learn_transition(0, 1, &x, &x).unwrap();
    assert_eq!(s.mu_kj, s.mu_jk);
    let back = learn_transition(1, 0, &x, &x).unwrap();
    for p in &x {
        let q = back.apply(&s.apply(p));
        assert!(e1(&q, p) <= 1e-6);
    }
}

#[test]
fn noisy_affine_residual() {
    let delta: f64 = 0.1;
    let mut r = rng::stream(4, "pts", 0);
    let x: Vec<Vec<f64>> = (0..60)
        .map(|_| vec![delta * normal(&mut r), delta * normal(&mut r)])
        .collect();
    let clean = affine(&x, rotation(0.7), [0.05, -0.12]);
    let noisy: Vec<Vec<f64>> = clean
        .iter()
        .map(|p| {
            p.iter()
                .map(|v| v + delta.powi(3) * (2.0 * rand::Rng::random::<f64>(&mut r) - 1.0))
                .collect()
        })
        .collect();
    let s = learn_transition(0, 1, &x, &noisy).unwrap();
    for (p, q) in x.iter().zip(&noisy) {
        assert!(e1(&s.apply(p), q) <= 10.0 * delta.powi(3));
    }
}

#[test]
fn double_well_potential_has_two_wells() {
    let space = double_well_space(false, 0.01);
    let params = AtlasParams::experimental(0.1, 1);
    let (model, diag) = learn_atlas_with_diagnostics(&space, &params, 7).unwrap();
    assert!((15..=30).contains(&model.n_charts()));
    assert_eq!(diag.spectra.len(), model.n_charts());
    let pot = effective_potential_1d(&model);
    let u: Vec<f64> = pot.iter().map(|p| p.potential).collect();
    let minima = local_minima(&u);
    assert_eq!(minima.len(), 2, "{pot:?}");
    assert!(pot[minima[0]].x.abs() <= 0.1 && (pot[minima[1]].x - 1.0).abs() <= 0.1);
    let maxima = local_maxima(&u);
    assert!(maxima.iter().any(|&i| i > minima[0] && i < minima[1]));
}

#[test]
fn json_round_trip_and_determinism() {
    let space = double_well_space(false, 0.01);
    let mut params = AtlasParams::experimental(0.1, 1);
    params.p = 2000;
    let a = learn_atlas(&space, &params, 11).unwrap();
    let json = a.to_json().unwrap();
    let back: AtlasModel<Vec<f64>> = AtlasModel::from_json(&json).unwrap();
    assert_eq!(back, a);
    assert_eq!(back.to_json().unwrap(), json);
    for c in a.charts() {
        assert!(c.centers[&c.k].iter().all(|&v| v == 0.0));
    }

    let b = learn_atlas(&space, &params, 11).unwrap();
    assert_eq!(b.to_json().unwrap(), json);
    let c = learn_atlas(&space, &params, 12).unwrap();
    assert_ne!(c.to_json().unwrap(), json);

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(3)
        .build()
        .unwrap();
    let d = pool.install(|| learn_atlas(&space, &params, 11).unwrap());
    assert_eq!(d.to_json().unwrap(), json);
}

#[test]
fn model_json_field_layout() {
    let space = line_space(0.0, 1.0, vec![0.0, 0.15]);
    let mut params = AtlasParams::experimental(0.1, 1);
    params.p = 100;
    let json = learn_atlas(&space, &params, 1).unwrap().to_json().unwrap();
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    for key in ["delta", "d", "t0", "dt", "net", "charts", "transitions"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    let t = &v["transitions"][0];
    for key in ["k", "j", "mu_kj", "mu_jk", "T"] {
        assert!(t.get(key).is_some(), "missing {key}");
    }
    let c = &v["charts"][0];
    for key in ["k", "b", "sigma", "centers"] {
        assert!(c.get(key).is_some(), "missing {key}");
    }
}

#[test]
fn malformed_model_json_is_rejected() {
    assert!(AtlasModel::<Vec<f64>>::from_json("{}").is_err());
    let space = line_space(0.0, 1.0, vec![0.0, 0.15]);
    let mut params = AtlasParams::experimental(0.1, 1);
    params.p = 100;
    let json = learn_atlas(&space, &params, 1).unwrap().to_json().unwrap();
    let mut v: serde_json::Value = serde_json::from_str(&json).unwrap();
    v["transitions"].as_array_mut().unwrap().pop();
    assert!(AtlasModel::<Vec<f64>>::from_json(&v.to_string()).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn exact_affine_recovery(seed in 0u64..100_000, theta in -3.1f64..3.1, vx in -1.0f64..1.0, vy in -1.0f64..1.0, n in 3usize..40) {
        let mut r = rng::stream(seed, "pts", 0);
        let x: Vec<Vec<f64>> = (0..n).map(|_| vec![0.2 * normal(&mut r), 0.2 * normal(&mut r)]).collect();
        let y = affine(&x, rotation(theta), [vx, vy]);
        let s = learn_transition(0, 1, &x, &y).unwrap();
        for (p, q) in x.iter().zip(&y) {
            prop_assert!(e1(&s.apply(p), q) <= 1e-8);
        }
    }
}
