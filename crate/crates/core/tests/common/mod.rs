#![allow(dead_code)]

use atlas_core::learn::{Chart, TransitionMap};
use atlas_core::netspace::DeltaNet;
use atlas_core::AtlasModel;
use nalgebra::DMatrix;
use std::collections::BTreeMap;

/// Exhaustive check of net separation (> delta), covering (<= delta) and
/// the 2-delta neighbor rule against the full input set.
pub fn verify_net<P, F: Fn(&P, &P) -> f64>(
    input: &[P],
    net: &DeltaNet<P>,
    delta: f64,
    dist: F,
) -> Result<(), String> {
    let n = net.points.len();
    for a in 0..n {
        for b in (a + 1)..n {
            let r = dist(&net.points[a], &net.points[b]);
            if r <= delta {
                return Err(format!("net points {a},{b} at distance {r} <= {delta}"));
            }
            let linked = net.neighbors[a].contains(&b);
            if linked != (r <= 2.0 * delta) || net.neighbors[b].contains(&a) != linked {
                return Err(format!("neighbor rule violated for {a},{b} (distance {r})"));
            }
        }
        if net.neighbors[a].contains(&a) {
            return Err(format!("self loop at {a}"));
        }
    }
    for (i, x) in input.iter().enumerate() {
        if !net.points.iter().any(|y| dist(x, y) <= delta) {
            return Err(format!("input point {i} not covered"));
        }
    }
    Ok(())
}

pub fn e1(a: &Vec<f64>, b: &Vec<f64>) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).powi(2))
        .sum::<f64>()
        .sqrt()
}

pub fn dist_matrix(pts: &[Vec<f64>]) -> DMatrix<f64> {
    let n = pts.len();
    DMatrix::from_fn(n, n, |i, j| e1(&pts[i], &pts[j]))
}

/// Maximum relative discrepancy between two distance matrices, ignoring
/// pairs whose reference distance is below `floor`.
pub fn max_rel_err(reference: &DMatrix<f64>, got: &DMatrix<f64>, floor: f64) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..reference.nrows() {
        for j in 0..reference.ncols() {
            let r = reference[(i, j)];
            if r > floor {
                worst = worst.max((got[(i, j)] - r).abs() / r);
            }
        }
    }
    worst
}

/// Random orthonormal D x d frame by Gram-Schmidt on the given raw columns.
pub fn orthonormal_frame(raw: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::new();
    for v in raw {
        let mut w = v.clone();
        for u in &out {
            let dot: f64 = w.iter().zip(u).map(|(a, b)| a * b).sum();
            w.iter_mut().zip(u).for_each(|(a, b)| *a -= dot * b);
        }
        let n = w.iter().map(|a| a * a).sum::<f64>().sqrt();
        w.iter_mut().for_each(|a| *a /= n);
        out.push(w);
    }
    out
}

/// Model with a single chart and no transitions.
pub fn single_chart(
    delta: f64,
    b: Vec<f64>,
    sigma: Vec<Vec<f64>>,
    dt: f64,
) -> AtlasModel<Vec<f64>> {
    let d = b.len();
    let net = DeltaNet {
        delta,
        points: vec![vec![0.0; d]],
        neighbors: vec![vec![]],
    };
    let mut centers = BTreeMap::new();
    centers.insert(0, vec![0.0; d]);
    let chart = Chart {
        k: 0,
        b,
        sigma,
        centers,
    };
    AtlasModel::new(delta, d, 10.0 * dt, dt, net, vec![chart], vec![])
        .expect("valid single-chart model")
}

/// Two 1-D charts at ambient 0 and `gap`, sharing a common orientation;
/// switching maps are pure shifts.
pub fn two_chart_line(
    delta: f64,
    gap: f64,
    b: [f64; 2],
    sigma: [f64; 2],
    dt: f64,
) -> AtlasModel<Vec<f64>> {
    let net = DeltaNet {
        delta,
        points: vec![vec![0.0], vec![gap]],
        neighbors: vec![vec![1], vec![0]],
    };
    let chart = |k: usize| {
        let mut centers = BTreeMap::new();
        centers.insert(k, vec![0.0]);
        let other = 1 - k;
        centers.insert(other, vec![if k == 0 { gap } else { -gap }]);
        Chart {
            k,
            b: vec![b[k]],
            sigma: vec![vec![sigma[k]]],
            centers,
        }
    };
    let tm = |k: usize, j: usize| TransitionMap {
        k,
        j,
        mu_kj: vec![if k == 0 { gap / 2.0 } else { -gap / 2.0 }],
        mu_jk: vec![if j == 0 { gap / 2.0 } else { -gap / 2.0 }],
        t: vec![vec![1.0]],
    };
    AtlasModel::new(
        delta,
        1,
        10.0 * dt,
        dt,
        net,
        vec![chart(0), chart(1)],
        vec![tm(0, 1), tm(1, 0)],
    )
    .expect("valid two-chart model")
}
