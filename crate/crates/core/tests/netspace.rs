mod common;

use atlas_core::netspace::{build_delta_net, nearest_net_index, DeltaNet};
use atlas_core::rng;
use atlas_core::systems::sde::double_well_grid;
use common::{e1, verify_net};
use proptest::prelude::*;
use rand::Rng;

#[test]
fn double_well_grid_net() {
    let grid = double_well_grid(0.01);
    assert_eq!(grid.len(), 201);
    let net = build_delta_net(&grid, 0.1, e1).unwrap();
    verify_net(&grid, &net, 0.1, e1).unwrap();
    assert!((15..=30).contains(&net.len()));
}

#[test]
fn random_square_net() {
    let mut r = rng::stream(11, "square", 0);
    let pts: Vec<Vec<f64>> = (0..50)
        .map(|_| vec![r.random::<f64>(), r.random::<f64>()])
        .collect();
    let net = build_delta_net(&pts, 0.3, e1).unwrap();
    verify_net(&pts, &net, 0.3, e1).unwrap();
}

#[test]
fn nearest_examples() {
    let net = DeltaNet::from_points(vec![vec![0.0], vec![0.15], vec![0.31]], 0.1, e1);
    assert_eq!(nearest_net_index(&net, &vec![0.2], e1), 1);
    assert_eq!(nearest_net_index(&net, &vec![0.31], e1), 2);
    let net = DeltaNet::from_points(
        vec![vec![5.0], vec![0.0], vec![9.0], vec![7.0], vec![2.0]],
        0.1,
        e1,
    );
    assert_eq!(nearest_net_index(&net, &vec![1.0], e1), 1);
}

#[test]
fn opaque_distance_is_respected() {
    // Discrete metric: every distinct pair is at distance 1.
    let pts: Vec<u32> = vec![3, 1, 3, 2];
    let d = |a: &u32, b: &u32| if a == b { 0.0 } else { 1.0 };
    let net = build_delta_net(&pts, 0.5, d).unwrap();
    assert_eq!(net.points, vec![3, 1, 2]);
    assert!(net.neighbors.iter().all(|n| n.len() == 2));
}

fn points(dim: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(-1.0f64..1.0, dim), 1..120)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn greedy_net_passes_verifier(pts in points(2), delta in 0.02f64..0.8) {
        let net = build_delta_net(&pts, delta, e1).unwrap();
        prop_assert!(verify_net(&pts, &net, delta, e1).is_ok());
        // Balls of radius delta/2 around distinct net points are disjoint.
        for a in 0..net.len() {
            for b in (a + 1)..net.len() {
                prop_assert!(e1(&net.points[a], &net.points[b]) > delta);
            }
        }
    }

    #[test]
    fn greedy_net_is_deterministic(pts in points(3), delta in 0.05f64..0.5) {
        let a = build_delta_net(&pts, delta, e1).unwrap();
        let b = build_delta_net(&pts, delta, e1).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn nearest_is_a_minimizer(pts in points(2), x in prop::collection::vec(-1.0f64..1.0, 2)) {
        let net = build_delta_net(&pts, 0.2, e1).unwrap();
        let i = nearest_net_index(&net, &x, e1);
        let best = net.points.iter().map(|y| e1(&x, y)).fold(f64::INFINITY, f64::min);
        prop_assert_eq!(e1(&x, &net.points[i]), best);
        prop_assert!(net.points[..i].iter().all(|y| e1(&x, y) > best));
    }
}
