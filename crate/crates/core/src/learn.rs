//! The learning phase: landmarks, chart embeddings, local constant-coefficient
//! SDE estimates and least-squares switching maps between neighboring charts.

use std::collections::{BTreeMap, HashMap};

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::embedding::{extend, mds, ChartCoords};
use crate::error::{AtlasError, Result};
use crate::linalg::{from_rows, pinv, psd_sqrt, to_rows, PINV_RTOL};
use crate::netspace::{build_delta_net, DeltaNet, StateSpace};
use crate::rng::{self, SimRng};

/// Relative slack on neighbor center distances before a warning is raised.
pub const CENTER_SLACK: f64 = 0.3;

/// Parameters of atlas construction.
///
/// The experimental schedule is `t0 = delta^2`, `dt = t0 / 5`, `p = 10_000`
/// and `m = 2d`. The schedule that carries the accuracy guarantee instead uses
/// `dt ~ delta / ln(1/delta)` and `p ~ delta^-4`; both are plain fields here.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AtlasParams {
    pub delta: f64,
    pub d: usize,
    pub m: usize,
    pub p: usize,
    pub t0: f64,
    pub dt: f64,
}

impl AtlasParams {
    pub fn experimental(delta: f64, d: usize) -> Self {
        let t0 = delta * delta;
        AtlasParams {
            delta,
            d,
            m: 2 * d,
            p: 10_000,
            t0,
            dt: t0 / 5.0,
        }
    }

    /// Simulator step `delta / ln(1/delta)` (only meaningful for delta < 1).
    pub fn theoretical_dt(delta: f64) -> f64 {
        delta / (1.0 / delta).ln()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0) || !self.delta.is_finite() {
            return Err(AtlasError::invalid("delta", "must be > 0"));
        }
        if self.d < 1 {
            return Err(AtlasError::invalid("d", "must be >= 1"));
        }
        if self.m < self.d {
            return Err(AtlasError::invalid(
                "m",
                format!("must be >= d = {}", self.d),
            ));
        }
        if self.p < 2 {
            return Err(AtlasError::invalid("p", "must be >= 2"));
        }
        if !(self.t0 > 0.0) || !self.t0.is_finite() {
            return Err(AtlasError::invalid("t0", "must be > 0"));
        }
        if !(self.dt > 0.0) || self.dt >= self.t0 {
            return Err(AtlasError::invalid("dt", "must satisfy 0 < dt < t0"));
        }
        Ok(())
    }
}

/// Local constant-coefficient model of one chart.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Chart {
    pub k: usize,
    /// Drift, length per time.
    pub b: Vec<f64>,
    /// Symmetric PSD diffusion, length per sqrt(time).
    pub sigma: Vec<Vec<f64>>,
    /// Images of the net points `y_j` for `j = k` and every neighbor `j`.
    pub centers: BTreeMap<usize, ChartCoords>,
}

/// Affine switching map `S_kj(x) = (x - mu_kj) T + mu_jk` on row vectors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransitionMap {
    pub k: usize,
    pub j: usize,
    pub mu_kj: Vec<f64>,
    pub mu_jk: Vec<f64>,
    #[serde(rename = "T")]
    pub t: Vec<Vec<f64>>,
}

impl TransitionMap {
    pub fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        let d = self.mu_kj.len();
        for (b, o) in out.iter_mut().enumerate().take(d) {
            let mut acc = self.mu_jk[b];
            for a in 0..d {
                acc += (x[a] - self.mu_kj[a]) * self.t[a][b];
            }
            *o = acc;
        }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; x.len()];
        self.apply_into(x, &mut out);
        out
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(bound(
    serialize = "P: Serialize + Clone",
    deserialize = "P: Deserialize<'de>"
))]
struct ModelRecord<P> {
    delta: f64,
    d: usize,
    t0: f64,
    dt: f64,
    net: DeltaNet<P>,
    charts: Vec<Chart>,
    transitions: Vec<TransitionMap>,
}

/// Per-chart lookup tables used by the stepping loop.
#[derive(Clone, Debug, Default)]
pub(crate) struct ChartTable {
    /// Candidate chart indices, ascending (includes the chart itself).
    pub cand: Vec<usize>,
    /// Flattened centers, `cand.len() * d`.
    pub centers: Vec<f64>,
    /// Transition id per candidate (`usize::MAX` for the chart itself).
    pub trans: Vec<usize>,
    pub drift: Vec<f64>,
    /// Row-major `d x d`.
    pub sigma: Vec<f64>,
}

/// The learned atlas. Immutable once built.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(
    try_from = "ModelRecord<P>",
    into = "ModelRecord<P>",
    bound(
        serialize = "P: Serialize + Clone",
        deserialize = "P: Deserialize<'de>"
    )
)]
pub struct AtlasModel<P> {
    delta: f64,
    d: usize,
    t0: f64,
    dt: f64,
    net: DeltaNet<P>,
    charts: Vec<Chart>,
    transitions: Vec<TransitionMap>,
    tables: Vec<ChartTable>,
}

impl<P: PartialEq> PartialEq for AtlasModel<P> {
    fn eq(&self, other: &Self) -> bool {
        self.delta == other.delta
            && self.d == other.d
            && self.t0 == other.t0
            && self.dt == other.dt
            && self.net == other.net
            && self.charts == other.charts
            && self.transitions == other.transitions
    }
}

impl<P> From<AtlasModel<P>> for ModelRecord<P> {
    fn from(m: AtlasModel<P>) -> Self {
        ModelRecord {
            delta: m.delta,
            d: m.d,
            t0: m.t0,
            dt: m.dt,
            net: m.net,
            charts: m.charts,
            transitions: m.transitions,
        }
    }
}

impl<P> TryFrom<ModelRecord<P>> for AtlasModel<P> {
    type Error = AtlasError;

    fn try_from(r: ModelRecord<P>) -> Result<Self> {
        AtlasModel::new(r.delta, r.d, r.t0, r.dt, r.net, r.charts, r.transitions)
    }
}

impl<P> AtlasModel<P> {
    /// Assemble and validate a model.
    pub fn new(
        delta: f64,
        d: usize,
        t0: f64,
        dt: f64,
        net: DeltaNet<P>,
        charts: Vec<Chart>,
        transitions: Vec<TransitionMap>,
    ) -> Result<Self> {
        let bad = |msg: String| Err(AtlasError::InvalidModel(msg));
        if !(delta > 0.0) || d == 0 || !(dt > 0.0) || !(t0 > dt) {
            return bad(format!(
                "parameters out of range (delta={delta}, d={d}, t0={t0}, dt={dt})"
            ));
        }
        if charts.len() != net.len() || net.neighbors.len() != net.len() {
            return bad(format!(
                "{} charts for {} net points",
                charts.len(),
                net.len()
            ));
        }
        let mut index = HashMap::new();
        for (id, t) in transitions.iter().enumerate() {
            if t.mu_kj.len() != d
                || t.mu_jk.len() != d
                || t.t.len() != d
                || t.t.iter().any(|r| r.len() != d)
            {
                return bad(format!("transition ({}, {}) has wrong dimension", t.k, t.j));
            }
            if index.insert((t.k, t.j), id).is_some() {
                return bad(format!("duplicate transition ({}, {})", t.k, t.j));
            }
        }
        let mut tables = Vec::with_capacity(charts.len());
        for (k, chart) in charts.iter().enumerate() {
            if chart.k != k {
                return bad(format!("chart at position {k} has index {}", chart.k));
            }
            if chart.b.len() != d
                || chart.sigma.len() != d
                || chart.sigma.iter().any(|r| r.len() != d)
            {
                return bad(format!("chart {k} has wrong dimension"));
            }
            let mut expected: Vec<usize> = net.neighbors[k].clone();
            expected.push(k);
            expected.sort_unstable();
            let keys: Vec<usize> = chart.centers.keys().copied().collect();
            if keys != expected {
                return bad(format!("chart {k} centers do not match its neighbors"));
            }
            let mut table = ChartTable {
                drift: chart.b.clone(),
                sigma: chart.sigma.iter().flatten().copied().collect(),
                ..Default::default()
            };
            for (&j, c) in &chart.centers {
                if c.len() != d {
                    return bad(format!("center ({k}, {j}) has wrong dimension"));
                }
                table.cand.push(j);
                table.centers.extend_from_slice(c);
                if j == k {
                    table.trans.push(usize::MAX);
                } else {
                    match index.get(&(k, j)) {
                        Some(&id) => table.trans.push(id),
                        None => return bad(format!("missing transition ({k}, {j})")),
                    }
                }
            }
            tables.push(table);
        }
        Ok(AtlasModel {
            delta,
            d,
            t0,
            dt,
            net,
            charts,
            transitions,
            tables,
        })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn net(&self) -> &DeltaNet<P> {
        &self.net
    }

    pub fn charts(&self) -> &[Chart] {
        &self.charts
    }

    pub fn transitions(&self) -> &[TransitionMap] {
        &self.transitions
    }

    pub fn n_charts(&self) -> usize {
        self.charts.len()
    }

    pub fn transition(&self, k: usize, j: usize) -> Option<&TransitionMap> {
        let table = self.tables.get(k)?;
        let pos = table.cand.iter().position(|&c| c == j)?;
        self.transitions.get(*table.trans.get(pos)?)
    }

    pub(crate) fn table(&self, k: usize) -> &ChartTable {
        &self.tables[k]
    }

    /// Same model with a different simulator step.
    pub fn with_dt(mut self, dt: f64) -> Result<Self> {
        if !(dt > 0.0) || dt >= self.t0 {
            return Err(AtlasError::invalid("dt", "must satisfy 0 < dt < t0"));
        }
        self.dt = dt;
        Ok(self)
    }
}

impl<P: Serialize + Clone> AtlasModel<P> {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }
}

impl<P: for<'de> Deserialize<'de>> AtlasModel<P> {
    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// `A_k`: the net point followed by `m` endpoints of paths of length `t0`.
pub fn generate_landmarks<S: StateSpace>(
    space: &S,
    y_k: &S::Point,
    m: usize,
    t0: f64,
    rng: &mut SimRng,
) -> Result<Vec<S::Point>> {
    let mut out = Vec::with_capacity(m + 1);
    out.push(y_k.clone());
    out.extend(space.simulate(y_k, m, t0, rng)?);
    Ok(out)
}

/// Drift `sum(x) / (p t0)` and diffusion `sqrt(Cov(x) / t0)` of endpoint
/// coordinates measured from the chart origin. Covariance is unbiased.
pub fn estimate_coefficients(
    endpoints: &[ChartCoords],
    t0: f64,
) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let p = endpoints.len();
    if p < 2 {
        return Err(AtlasError::invalid("p", "need at least 2 endpoints"));
    }
    let d = endpoints[0].len();
    let mut mean = vec![0.0; d];
    for x in endpoints {
        for (m, v) in mean.iter_mut().zip(x) {
            *m += v;
        }
    }
    for m in &mut mean {
        *m /= p as f64;
    }
    let mut cov = DMatrix::zeros(d, d);
    for x in endpoints {
        for a in 0..d {
            let da = x[a] - mean[a];
            for b in 0..d {
                cov[(a, b)] += da * (x[b] - mean[b]);
            }
        }
    }
    cov /= (p - 1) as f64 * t0;
    let drift = mean.iter().map(|m| m / t0).collect();
    Ok((drift, to_rows(&psd_sqrt(&cov))))
}

/// Result of fitting one chart.
#[derive(Clone, Debug)]
pub struct ChartFit {
    pub chart: Chart,
    /// Shifted coordinates of the `p` coefficient-estimation endpoints.
    pub endpoint_coords: Vec<ChartCoords>,
    /// Shifted coordinates of every landmark in `L_k`, keyed by the net
    /// index whose landmark set `A_j` they belong to.
    pub landmark_coords: BTreeMap<usize, Vec<ChartCoords>>,
    /// Landmark MDS spectrum (per-landmark variance).
    pub spectrum: Vec<f64>,
}

/// Fit chart `k`. `landmarks[j]` must hold `A_j` for `k` and each neighbor.
/// The `p` endpoints are extended into the landmark embedding; they do not
/// influence the eigenbasis.
pub fn learn_chart<S: StateSpace>(
    space: &S,
    net: &DeltaNet<S::Point>,
    landmarks: &[Vec<S::Point>],
    k: usize,
    params: &AtlasParams,
    rng: &mut SimRng,
) -> Result<ChartFit> {
    let wrap = |e: AtlasError| AtlasError::Chart {
        chart: k,
        source: Box::new(e),
    };
    let d = params.d;
    let mut members: Vec<usize> = net.neighbors[k].clone();
    members.push(k);
    members.sort_unstable();

    let mut points: Vec<&S::Point> = Vec::new();
    let mut spans: Vec<(usize, usize, usize)> = Vec::new();
    for &j in &members {
        let start = points.len();
        points.extend(landmarks[j].iter());
        spans.push((j, start, points.len()));
    }
    let n = points.len();
    if n < d + 1 {
        return Err(wrap(AtlasError::DegenerateLandmarks {
            chart: k,
            rank: n.saturating_sub(1),
            d,
        }));
    }
    let mut dist = DMatrix::zeros(n, n);
    for a in 0..n {
        for b in (a + 1)..n {
            let v = space.distance(points[a], points[b]);
            dist[(a, b)] = v;
            dist[(b, a)] = v;
        }
    }
    let emb = mds(&dist, d).map_err(wrap)?;
    if emb.rank < d {
        return Err(AtlasError::DegenerateLandmarks {
            chart: k,
            rank: emb.rank,
            d,
        });
    }

    let span_of = |j: usize| spans.iter().find(|s| s.0 == j).copied().expect("member");
    let origin = emb.landmark_coords[span_of(k).1].clone();
    let shift = |x: &[f64]| -> ChartCoords { x.iter().zip(&origin).map(|(a, o)| a - o).collect() };

    let mut centers = BTreeMap::new();
    let mut landmark_coords = BTreeMap::new();
    for &(j, start, end) in &spans {
        centers.insert(j, shift(&emb.landmark_coords[start]));
        landmark_coords.insert(
            j,
            emb.landmark_coords[start..end]
                .iter()
                .map(|c| shift(c))
                .collect::<Vec<_>>(),
        );
    }
    // exact zero for the chart's own center
    centers.insert(k, vec![0.0; d]);

    let endpoints = space
        .simulate(&net.points[k], params.p, params.t0, rng)
        .map_err(wrap)?;
    let mut row = vec![0.0; n];
    let mut endpoint_coords = Vec::with_capacity(endpoints.len());
    for e in &endpoints {
        for (r, l) in row.iter_mut().zip(&points) {
            *r = space.distance(e, l);
        }
        endpoint_coords.push(shift(&extend(&emb, &row).map_err(wrap)?));
    }
    drop(endpoints);

    let (b, sigma) = estimate_coefficients(&endpoint_coords, params.t0).map_err(wrap)?;
    Ok(ChartFit {
        chart: Chart {
            k,
            b,
            sigma,
            centers,
        },
        endpoint_coords,
        landmark_coords,
        spectrum: emb.eigenvalues,
    })
}

/// Least-squares affine map from chart `k` to chart `j`, fit on the images of
/// the shared landmarks (`x_rows` in chart `k`, `y_rows` in chart `j`, same
/// order).
pub fn learn_transition(
    k: usize,
    j: usize,
    x_rows: &[ChartCoords],
    y_rows: &[ChartCoords],
) -> Result<TransitionMap> {
    if x_rows.len() != y_rows.len() {
        return Err(AtlasError::DimensionMismatch {
            expected: x_rows.len(),
            found: y_rows.len(),
        });
    }
    let n = x_rows.len();
    let d = x_rows.first().map(|r| r.len()).unwrap_or(0);
    if d == 0 || n < d + 1 {
        return Err(AtlasError::invalid(
            "landmarks",
            format!("transition ({k}, {j}) needs at least d + 1 shared landmarks, got {n}"),
        ));
    }
    let mean = |rows: &[ChartCoords]| -> Vec<f64> {
        let mut m = vec![0.0; d];
        for r in rows {
            for (a, v) in m.iter_mut().zip(r) {
                *a += v;
            }
        }
        m.iter().map(|v| v / n as f64).collect()
    };
    let mu_kj = mean(x_rows);
    let mu_jk = mean(y_rows);
    let x = from_rows(x_rows, d) - DMatrix::from_fn(n, d, |_, c| mu_kj[c]);
    let y = from_rows(y_rows, d) - DMatrix::from_fn(n, d, |_, c| mu_jk[c]);
    let (x_pinv, _) = pinv(&x, PINV_RTOL);
    let t = x_pinv * y;
    Ok(TransitionMap {
        k,
        j,
        mu_kj,
        mu_jk,
        t: to_rows(&t),
    })
}

/// Side information produced while learning.
#[derive(Clone, Debug, Default)]
pub struct LearnDiagnostics {
    pub spectra: Vec<Vec<f64>>,
    pub landmark_counts: Vec<usize>,
    pub warnings: Vec<String>,
}

pub fn learn_atlas<S>(space: &S, params: &AtlasParams, seed: u64) -> Result<AtlasModel<S::Point>>
where
    S: StateSpace,
{
    learn_atlas_with_diagnostics(space, params, seed).map(|(m, _)| m)
}

/// Build the δ-net from `space.initial_points()` and learn every chart and
/// switching map. Charts are learned in parallel; each chart draws from its
/// own seed-derived streams, so the result does not depend on scheduling.
pub fn learn_atlas_with_diagnostics<S>(
    space: &S,
    params: &AtlasParams,
    seed: u64,
) -> Result<(AtlasModel<S::Point>, LearnDiagnostics)>
where
    S: StateSpace,
{
    params.validate()?;
    let net = build_delta_net(space.initial_points(), params.delta, |a, b| {
        space.distance(a, b)
    })?;
    learn_atlas_on_net(space, net, params, seed)
}

/// Learning on a prebuilt net.
pub fn learn_atlas_on_net<S>(
    space: &S,
    net: DeltaNet<S::Point>,
    params: &AtlasParams,
    seed: u64,
) -> Result<(AtlasModel<S::Point>, LearnDiagnostics)>
where
    S: StateSpace,
{
    params.validate()?;
    let n = net.len();

    let landmarks: Vec<Vec<S::Point>> = (0..n)
        .into_par_iter()
        .map(|k| {
            let mut rng = rng::stream(seed, "landmarks", k as u64);
            generate_landmarks(space, &net.points[k], params.m, params.t0, &mut rng).map_err(|e| {
                AtlasError::Chart {
                    chart: k,
                    source: Box::new(e),
                }
            })
        })
        .collect::<Vec<_>>()
        .into_iter()
        .collect::<Result<_>>()?;

    let fits: Vec<Result<ChartFit>> = (0..n)
        .into_par_iter()
        .map(|k| {
            let mut rng = rng::stream(seed, "paths", k as u64);
            learn_chart(space, &net, &landmarks, k, params, &mut rng)
        })
        .collect();
    let mut errors = Vec::new();
    let mut ok = Vec::with_capacity(n);
    for f in fits {
        match f {
            Ok(f) => ok.push(f),
            Err(e) => errors.push(e),
        }
    }
    if !errors.is_empty() {
        return Err(if errors.len() == 1 {
            errors.pop().expect("one error")
        } else {
            AtlasError::Charts(errors)
        });
    }
    drop(landmarks);

    let edges: Vec<(usize, usize)> = net.edges().collect();
    let transitions: Vec<TransitionMap> = edges
        .par_iter()
        .map(|&(k, j)| {
            let shared = |fit: &ChartFit| -> Vec<ChartCoords> {
                fit.landmark_coords[&k]
                    .iter()
                    .chain(fit.landmark_coords[&j].iter())
                    .cloned()
                    .collect()
            };
            learn_transition(k, j, &shared(&ok[k]), &shared(&ok[j]))
        })
        .collect::<Result<_>>()?;

    let mut diag = LearnDiagnostics::default();
    for fit in &ok {
        let k = fit.chart.k;
        for (&j, c) in &fit.chart.centers {
            if j == k {
                continue;
            }
            let r = crate::linalg::norm(c);
            let lo = params.delta * (1.0 - CENTER_SLACK);
            let hi = 2.0 * params.delta * (1.0 + CENTER_SLACK);
            if r < lo || r > hi {
                diag.warnings.push(format!(
                    "chart {k}: center of neighbor {j} at distance {r:.4} outside [{lo:.4}, {hi:.4}]"
                ));
            }
        }
        diag.landmark_counts
            .push(fit.landmark_coords.values().map(Vec::len).sum());
        diag.spectra.push(fit.spectrum.clone());
    }
    let charts = ok.into_iter().map(|f| f.chart).collect();
    let model = AtlasModel::new(
        params.delta,
        params.d,
        params.t0,
        params.dt,
        net,
        charts,
        transitions,
    )?;
    Ok((model, diag))
}
