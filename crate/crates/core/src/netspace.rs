//! Metric state spaces and δ-nets.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{AtlasError, Result};
use crate::rng::SimRng;

/// Ambient coordinates of a point in a Euclidean-like state space.
pub type AmbientPoint = Vec<f64>;

/// The three inputs of atlas learning: a distance, a microscale simulator and
/// a set of points covering the region of interest.
pub trait StateSpace: Sync {
    type Point: Clone + Send + Sync;

    fn distance(&self, a: &Self::Point, b: &Self::Point) -> f64;

    /// Run `n_paths` independent paths of duration `t0` from `start` and
    /// return their endpoints.
    fn simulate(
        &self,
        start: &Self::Point,
        n_paths: usize,
        t0: f64,
        rng: &mut SimRng,
    ) -> Result<Vec<Self::Point>>;

    fn initial_points(&self) -> &[Self::Point];

    /// Step size of the microscale simulator, when it has one.
    fn micro_dt(&self) -> Option<f64> {
        None
    }
}

pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    crate::linalg::dist2(a, b).sqrt()
}

/// Greedy δ-net with its 2δ neighbor graph.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeltaNet<P> {
    pub delta: f64,
    pub points: Vec<P>,
    pub neighbors: Vec<Vec<usize>>,
}

impl<P> DeltaNet<P> {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Build from explicit net points, computing the neighbor graph.
    pub fn from_points<F>(points: Vec<P>, delta: f64, distance: F) -> Self
    where
        F: Fn(&P, &P) -> f64,
    {
        let n = points.len();
        let mut neighbors = vec![Vec::new(); n];
        for a in 0..n {
            for b in (a + 1)..n {
                if distance(&points[a], &points[b]) <= 2.0 * delta {
                    neighbors[a].push(b);
                    neighbors[b].push(a);
                }
            }
        }
        for list in &mut neighbors {
            list.sort_unstable();
        }
        DeltaNet {
            delta,
            points,
            neighbors,
        }
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.neighbors
            .iter()
            .enumerate()
            .flat_map(|(k, list)| list.iter().map(move |&j| (k, j)))
    }
}

/// Scan `points` in order, keeping each one that is farther than `delta` from
/// every point kept so far.
pub fn build_delta_net<P, F>(points: &[P], delta: f64, distance: F) -> Result<DeltaNet<P>>
where
    P: Clone,
    F: Fn(&P, &P) -> f64,
{
    if points.is_empty() {
        return Err(AtlasError::NoPoints);
    }
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(AtlasError::invalid("delta", "must be positive and finite"));
    }
    let mut kept: Vec<P> = Vec::new();
    for x in points {
        if kept.iter().all(|y| distance(x, y) > delta) {
            kept.push(x.clone());
        }
    }
    Ok(DeltaNet::from_points(kept, delta, distance))
}

/// Index of the net point closest to `x`; ties go to the smallest index.
pub fn nearest_net_index<P, F>(net: &DeltaNet<P>, x: &P, distance: F) -> usize
where
    F: Fn(&P, &P) -> f64,
{
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (k, y) in net.points.iter().enumerate() {
        let d = distance(x, y);
        if d < best_d {
            best_d = d;
            best = k;
        }
    }
    best
}

/// Read points from a headerless CSV file, one point per row.
pub fn read_points_csv(path: impl AsRef<Path>) -> Result<Vec<AmbientPoint>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)?;
    let mut out = Vec::new();
    let mut dim = None;
    for record in reader.records() {
        let record = record?;
        let point = record
            .iter()
            .map(|s| {
                s.parse::<f64>()
                    .map_err(|e| AtlasError::Config(format!("bad coordinate `{s}`: {e}")))
            })
            .collect::<Result<Vec<f64>>>()?;
        match dim {
            None => dim = Some(point.len()),
            Some(d) if d != point.len() => {
                return Err(AtlasError::DimensionMismatch {
                    expected: d,
                    found: point.len(),
                })
            }
            _ => {}
        }
        out.push(point);
    }
    Ok(out)
}
