mod common;

use atlas_core::embedding::{estimate_dim, extend, mds};
use atlas_core::rng::{self, normal};
use common::{dist_matrix, e1, max_rel_err, orthonormal_frame};
use nalgebra::DMatrix;
use proptest::prelude::*;

/// `n` points on a random `d`-dimensional affine plane in R^`big`.
fn plane_points(n: usize, d: usize, big: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut r = rng::stream(seed, "plane", 0);
    let raw: Vec<Vec<f64>> = (0..d)
        .map(|_| (0..big).map(|_| normal(&mut r)).collect())
        .collect();
    let frame = orthonormal_frame(&raw);
    let offset: Vec<f64> = (0..big).map(|_| normal(&mut r)).collect();
    (0..n)
        .map(|_| {
            let c: Vec<f64> = (0..d).map(|_| normal(&mut r)).collect();
            (0..big)
                .map(|a| offset[a] + (0..d).map(|i| c[i] * frame[i][a]).sum::<f64>())
                .collect()
        })
        .collect()
}

fn chart_distances(coords: &[Vec<f64>]) -> DMatrix<f64> {
    dist_matrix(coords)
}

#[test]
fn plane_isometry_recovered() {
    for (d, big) in [(1, 5), (2, 10), (3, 40)] {
        let pts = plane_points(30, d, big, d as u64);
        let dist = dist_matrix(&pts);
        let e = mds(&dist, d).unwrap();
        let err = max_rel_err(&dist, &chart_distances(&e.landmark_coords), 1e-12);
        assert!(err <= 1e-8, "d = {d}: relative error {err}");
    }
}

#[test]
fn plane_test_point_extension() {
    let pts = plane_points(25, 2, 12, 5);
    let (landmarks, tests) = pts.split_at(20);
    let e = mds(&dist_matrix(landmarks), 2).unwrap();
    for z in tests {
        let row: Vec<f64> = landmarks.iter().map(|l| e1(z, l)).collect();
        let c = extend(&e, &row).unwrap();
        for (l, lc) in row.iter().zip(&e.landmark_coords) {
            let got = e1(&c, lc);
            assert!((got - l).abs() <= 1e-6 * l, "{got} vs {l}");
        }
    }
}

#[test]
fn triangle_345_distances() {
    let dist = DMatrix::from_row_slice(3, 3, &[0.0, 3.0, 4.0, 3.0, 0.0, 5.0, 4.0, 5.0, 0.0]);
    let e = mds(&dist, 2).unwrap();
    assert!(max_rel_err(&dist, &chart_distances(&e.landmark_coords), 0.0) <= 1e-8);
}

#[test]
fn dimension_cutoff_examples() {
    let delta: f64 = 0.3;
    let c = (delta / 4.0).powi(2);
    assert_eq!(estimate_dim(&[1.0, 0.9, 0.5 * c], delta), 2);
    assert_eq!(estimate_dim(&[0.5 * c, 0.1 * c], delta), 1);
    assert_eq!(estimate_dim(&[], delta), 1);
}

#[test]
fn sign_convention_is_fixed() {
    let pts = plane_points(12, 2, 6, 9);
    let e = mds(&dist_matrix(&pts), 2).unwrap();
    for a in 0..2 {
        let col: Vec<f64> = e.landmark_coords.iter().map(|c| c[a]).collect();
        let big = col
            .iter()
            .cloned()
            .fold(0.0f64, |m, v| if v.abs() > m.abs() { v } else { m });
        assert!(big > 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn isometry_property(seed in 0u64..10_000, d in 1usize..4, extra in 0usize..6, n in 6usize..30) {
        let pts = plane_points(n, d, d + extra, seed);
        let dist = dist_matrix(&pts);
        let e = mds(&dist, d).unwrap();
        // Random draws can be nearly degenerate; measure against the scale.
        let scale = dist.max();
        let got = chart_distances(&e.landmark_coords);
        let worst = (0..n).flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| (got[(i, j)] - dist[(i, j)]).abs())
            .fold(0.0, f64::max);
        prop_assert!(worst <= 1e-8 * scale, "{} vs scale {}", worst, scale);
    }

    #[test]
    fn landmark_self_extension(seed in 0u64..10_000, n in 4usize..20) {
        let pts = plane_points(n, 2, 4, seed);
        let dist = dist_matrix(&pts);
        let e = mds(&dist, 2).unwrap();
        for j in 0..n {
            let row: Vec<f64> = (0..n).map(|i| dist[(j, i)]).collect();
            let c = extend(&e, &row).unwrap();
            for a in 0..2 {
                prop_assert!((c[a] - e.landmark_coords[j][a]).abs() <= 1e-8 * dist.max());
            }
        }
    }

    #[test]
    fn coordinates_are_centered(seed in 0u64..10_000, n in 3usize..25) {
        let pts = plane_points(n, 2, 5, seed);
        let e = mds(&dist_matrix(&pts), 2).unwrap();
        for a in 0..2 {
            let s: f64 = e.landmark_coords.iter().map(|c| c[a]).sum();
            prop_assert!(s.abs() <= 1e-9 * n as f64);
        }
    }
}
