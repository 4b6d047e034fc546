//! Evaluation harness: soft-binned distributions, multiscale L1 comparison
//! and metastable transition-time statistics.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{AtlasError, Result};
use crate::learn::AtlasModel;

/// Probability weights over an indexed set of centers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SoftDistribution {
    pub weights: Vec<f64>,
}

impl SoftDistribution {
    pub fn total(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// Soft binning of weighted samples onto centers.
///
/// Each sample spreads its weight over the centers within `2 delta` in
/// proportion to `exp(-dist^2 / delta^2)`. A sample with no center in range
/// is assigned wholly to its nearest center (ties to the smallest index).
pub fn soft_bin<S, C, F>(
    samples: &[S],
    sample_weights: &[f64],
    centers: &[C],
    delta: f64,
    distance: F,
) -> Result<SoftDistribution>
where
    F: Fn(&S, &C) -> f64,
{
    if samples.is_empty() {
        return Err(AtlasError::EmptySamples);
    }
    if centers.is_empty() {
        return Err(AtlasError::invalid("centers", "must be nonempty"));
    }
    if sample_weights.len() != samples.len() {
        return Err(AtlasError::DimensionMismatch {
            expected: samples.len(),
            found: sample_weights.len(),
        });
    }
    let total: f64 = sample_weights.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(AtlasError::invalid(
            "sample_weights",
            format!("sum to {total}, not 1"),
        ));
    }
    let m = centers.len();
    let mut out = vec![0.0; m];
    let mut w = vec![0.0; m];
    let mut dists = vec![0.0; m];
    for (x, &nu) in samples.iter().zip(sample_weights) {
        let mut sum = 0.0;
        for (j, c) in centers.iter().enumerate() {
            let r = distance(x, c);
            dists[j] = r;
            w[j] = if r < 2.0 * delta {
                (-(r * r) / (delta * delta)).exp()
            } else {
                0.0
            };
            sum += w[j];
        }
        if sum > 0.0 {
            for j in 0..m {
                out[j] += nu * w[j] / sum;
            }
        } else {
            let mut best = 0;
            for j in 1..m {
                if dists[j] < dists[best] {
                    best = j;
                }
            }
            out[best] += nu;
        }
    }
    Ok(SoftDistribution { weights: out })
}

pub fn soft_bin_uniform<S, C, F>(
    samples: &[S],
    centers: &[C],
    delta: f64,
    distance: F,
) -> Result<SoftDistribution>
where
    F: Fn(&S, &C) -> f64,
{
    if samples.is_empty() {
        return Err(AtlasError::EmptySamples);
    }
    let nu = vec![1.0 / samples.len() as f64; samples.len()];
    soft_bin(samples, &nu, centers, delta, distance)
}

pub fn l1_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

/// Fine net (scale `delta`) and coarse net (scale `delta_c`) used to bin
/// both simulators' samples.
pub struct BinningGrid<'a, P> {
    pub fine: &'a [P],
    pub coarse: &'a [P],
    pub delta: f64,
    pub delta_c: f64,
}

impl<P> BinningGrid<'_, P> {
    /// Bin samples on the fine net (with a caller-provided sample-to-fine
    /// distance), then push the result to the coarse net with the ambient
    /// distance.
    pub fn coarse_distribution<S, F, G>(
        &self,
        samples: &[S],
        to_fine: F,
        ambient: G,
    ) -> Result<SoftDistribution>
    where
        F: Fn(&S, usize) -> f64,
        G: Fn(&P, &P) -> f64,
    {
        let idx: Vec<usize> = (0..self.fine.len()).collect();
        let fine = soft_bin_uniform(samples, &idx, self.delta, |s, &j| to_fine(s, j))?;
        soft_bin(self.fine, &fine.weights, self.coarse, self.delta_c, ambient)
    }
}

/// Per-initial-condition, per-time L1 distances between coarse-binned
/// distributions of two simulators.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub times: Vec<f64>,
    /// `l1[ic][slice]`.
    pub l1: Vec<Vec<f64>>,
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    /// `histograms[ic][slice] = (p_a, p_b)` on the coarse net.
    pub histograms: Vec<Vec<(Vec<f64>, Vec<f64>)>>,
}

impl ComparisonReport {
    pub fn new(times: Vec<f64>) -> Self {
        ComparisonReport {
            times,
            ..Default::default()
        }
    }

    pub fn push_ic(&mut self, hist: Vec<(Vec<f64>, Vec<f64>)>) -> Result<()> {
        if hist.len() != self.times.len() {
            return Err(AtlasError::SliceMismatch {
                left: self.times.len(),
                right: hist.len(),
            });
        }
        self.l1
            .push(hist.iter().map(|(a, b)| l1_distance(a, b)).collect());
        self.histograms.push(hist);
        self.aggregate();
        Ok(())
    }

    fn aggregate(&mut self) {
        let n = self.l1.len();
        let slices = self.times.len();
        self.mean = (0..slices)
            .map(|s| self.l1.iter().map(|r| r[s]).sum::<f64>() / n as f64)
            .collect();
        self.std = (0..slices)
            .map(|s| {
                if n < 2 {
                    return 0.0;
                }
                let m = self.mean[s];
                (self.l1.iter().map(|r| (r[s] - m).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
            })
            .collect();
    }

    /// Columns `time, mean, std, ic_0, ic_1, ...`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["time".to_string(), "mean".to_string(), "std".to_string()];
        header.extend((0..self.l1.len()).map(|i| format!("ic_{i}")));
        w.write_record(&header)?;
        for (s, t) in self.times.iter().enumerate() {
            let mut rec = vec![
                t.to_string(),
                self.mean[s].to_string(),
                self.std[s].to_string(),
            ];
            rec.extend(self.l1.iter().map(|r| r[s].to_string()));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Flat histogram file: `time, ic, bin, p_a, p_b`.
    pub fn write_histograms<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["time", "ic", "bin", "p_a", "p_b"])?;
        for (ic, slices) in self.histograms.iter().enumerate() {
            for (t, (a, b)) in self.times.iter().zip(slices) {
                for (bin, (pa, pb)) in a.iter().zip(b).enumerate() {
                    w.write_record(&[
                        t.to_string(),
                        ic.to_string(),
                        bin.to_string(),
                        pa.to_string(),
                        pb.to_string(),
                    ])?;
                }
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Compare two families of samples, `samples_x[ic][slice]`, slice by slice.
pub fn multiscale_compare<A, B, P, FA, FB, G>(
    times: &[f64],
    samples_a: &[Vec<Vec<A>>],
    samples_b: &[Vec<Vec<B>>],
    grid: &BinningGrid<'_, P>,
    dist_a: FA,
    dist_b: FB,
    ambient: G,
) -> Result<ComparisonReport>
where
    FA: Fn(&A, usize) -> f64,
    FB: Fn(&B, usize) -> f64,
    G: Fn(&P, &P) -> f64,
{
    if samples_a.len() != samples_b.len() {
        return Err(AtlasError::SliceMismatch {
            left: samples_a.len(),
            right: samples_b.len(),
        });
    }
    let mut report = ComparisonReport::new(times.to_vec());
    for (a, b) in samples_a.iter().zip(samples_b) {
        if a.len() != times.len() || b.len() != times.len() {
            return Err(AtlasError::SliceMismatch {
                left: a.len(),
                right: b.len(),
            });
        }
        let hist = a
            .iter()
            .zip(b)
            .map(|(sa, sb)| {
                let pa = grid.coarse_distribution(sa, &dist_a, &ambient)?;
                let pb = grid.coarse_distribution(sb, &dist_b, &ambient)?;
                Ok((pa.weights, pb.weights))
            })
            .collect::<Result<Vec<_>>>()?;
        report.push_ic(hist)?;
    }
    Ok(report)
}

/// Labeled ball `{x : dist(x, center) < radius}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Region<P> {
    pub label: u32,
    pub center: P,
    pub radius: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionSpec<P> {
    pub regions: Vec<Region<P>>,
}

impl<P> RegionSpec<P> {
    pub fn balls(centers: Vec<P>, radius: f64) -> Self {
        RegionSpec {
            regions: centers
                .into_iter()
                .enumerate()
                .map(|(i, center)| Region {
                    label: i as u32 + 1,
                    center,
                    radius,
                })
                .collect(),
        }
    }

    /// Label of the first region containing `x`, or 0.
    pub fn label<F: Fn(&P, &P) -> f64>(&self, x: &P, distance: F) -> u32 {
        self.regions
            .iter()
            .find(|r| distance(x, &r.center) < r.radius)
            .map(|r| r.label)
            .unwrap_or(0)
    }

    /// Pairs of labels that both contain at least one of `samples`.
    pub fn overlaps<F: Fn(&P, &P) -> f64>(&self, samples: &[P], distance: F) -> Vec<(u32, u32)> {
        let mut out = Vec::new();
        for x in samples {
            let inside: Vec<u32> = self
                .regions
                .iter()
                .filter(|r| distance(x, &r.center) < r.radius)
                .map(|r| r.label)
                .collect();
            for a in 0..inside.len() {
                for b in (a + 1)..inside.len() {
                    let pair = (inside[a], inside[b]);
                    if !out.contains(&pair) {
                        out.push(pair);
                    }
                }
            }
        }
        out
    }
}

pub fn classify<P, F: Fn(&P, &P) -> f64>(
    points: &[P],
    regions: &RegionSpec<P>,
    distance: F,
) -> Vec<u32> {
    points.iter().map(|x| regions.label(x, &distance)).collect()
}

/// Labels of an atlas chart-index sequence, classifying the lifted net points.
pub fn classify_charts<P, F: Fn(&P, &P) -> f64>(
    model: &AtlasModel<P>,
    charts: &[usize],
    regions: &RegionSpec<P>,
    distance: F,
) -> Vec<u32> {
    let per_chart = classify(&model.net().points, regions, distance);
    charts.iter().map(|&i| per_chart[i]).collect()
}

/// Pooled samples of region-to-region transition times.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TransitionStats {
    pub samples: BTreeMap<(u32, u32), Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransitionEntry {
    pub from: u32,
    pub to: u32,
    pub count: usize,
    pub mean: f64,
}

impl TransitionStats {
    pub fn count(&self, from: u32, to: u32) -> usize {
        self.samples.get(&(from, to)).map_or(0, Vec::len)
    }

    /// Mean transition time, `None` when there are no samples.
    pub fn mean(&self, from: u32, to: u32) -> Option<f64> {
        let s = self.samples.get(&(from, to))?;
        if s.is_empty() {
            None
        } else {
            Some(s.iter().sum::<f64>() / s.len() as f64)
        }
    }

    pub fn total(&self) -> usize {
        self.samples.values().map(Vec::len).sum()
    }

    pub fn merge(&mut self, other: TransitionStats) {
        for (k, v) in other.samples {
            self.samples.entry(k).or_default().extend(v);
        }
    }

    pub fn entries(&self) -> Vec<TransitionEntry> {
        self.samples
            .iter()
            .filter(|(_, v)| !v.is_empty())
            .map(|(&(from, to), v)| TransitionEntry {
                from,
                to,
                count: v.len(),
                mean: v.iter().sum::<f64>() / v.len() as f64,
            })
            .collect()
    }
}

/// Transition times from a time-ordered label sequence (0 = no region).
///
/// Leading unlabeled steps are skipped. From the step at which a region `i`
/// is entered, the number of steps until a different region `j` is first
/// entered is one sample of `tau_{i,j}`; returns to `i` in between do not
/// restart the clock. Times are reported as steps times `dt_per_step`.
pub fn transition_times(labels: &[u32], dt_per_step: f64) -> Result<TransitionStats> {
    let start = labels
        .iter()
        .position(|&l| l != 0)
        .ok_or(AtlasError::NoRegionVisits)?;
    let mut stats = TransitionStats::default();
    let mut current = labels[start];
    let mut entered = start;
    for (n, &l) in labels.iter().enumerate().skip(start + 1) {
        if l != 0 && l != current {
            stats
                .samples
                .entry((current, l))
                .or_default()
                .push((n - entered) as f64 * dt_per_step);
            current = l;
            entered = n;
        }
    }
    Ok(stats)
}

/// One sample of the 1-D effective potential.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PotentialPoint {
    pub x: f64,
    pub drift: f64,
    pub diffusion: f64,
    pub potential: f64,
}

/// For a model over a 1-D ambient space: map every chart drift back to the
/// ambient orientation and integrate `-drift` along the sorted net points
/// (trapezoid rule, zero at the leftmost point).
pub fn effective_potential_1d(model: &AtlasModel<Vec<f64>>) -> Vec<PotentialPoint> {
    let net = model.net();
    let mut pts: Vec<(f64, f64, f64)> = model
        .charts()
        .iter()
        .map(|c| {
            let y = net.points[c.k][0];
            let orientation = net.neighbors[c.k]
                .iter()
                .map(|&j| (j, net.points[j][0] - y))
                .max_by(|a, b| {
                    a.1.abs()
                        .partial_cmp(&b.1.abs())
                        .unwrap_or(std::cmp::Ordering::Equal)
                })
                .map(|(j, dy)| (c.centers[&j][0] * dy).signum())
                .unwrap_or(1.0);
            (y, orientation * c.b[0], c.sigma[0][0].abs())
        })
        .collect();
    pts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
    let mut out = Vec::with_capacity(pts.len());
    let mut u = 0.0;
    for (n, &(x, drift, diffusion)) in pts.iter().enumerate() {
        if n > 0 {
            let (xp, fp, _) = pts[n - 1];
            u -= 0.5 * (fp + drift) * (x - xp);
        }
        out.push(PotentialPoint {
            x,
            drift,
            diffusion,
            potential: u,
        });
    }
    out
}

/// Indices of strict interior local minima of `values`.
pub fn local_minima(values: &[f64]) -> Vec<usize> {
    (1..values.len().saturating_sub(1))
        .filter(|&i| values[i] < values[i - 1] && values[i] < values[i + 1])
        .collect()
}

/// Indices of strict interior local maxima of `values`.
pub fn local_maxima(values: &[f64]) -> Vec<usize> {
    (1..values.len().saturating_sub(1))
        .filter(|&i| values[i] > values[i - 1] && values[i] > values[i + 1])
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d1(a: &f64, b: &f64) -> f64 {
        (a - b).abs()
    }

    #[test]
    fn sample_on_isolated_center() {
        let centers = [0.0, 1.0, 2.0];
        let d = soft_bin_uniform(&[1.0], &centers, 0.1, d1).unwrap();
        assert_eq!(d.weights, vec![0.0, 1.0, 0.0]);
    }

    #[test]
    fn equidistant_sample_splits_evenly() {
        let centers = [0.0, 0.2, 5.0];
        let d = soft_bin_uniform(&[0.1], &centers, 0.1, d1).unwrap();
        assert!((d.weights[0] - 0.5).abs() < 1e-15 && (d.weights[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn orphans_go_to_nearest_center() {
        let centers = [0.0, 1.0];
        let d = soft_bin_uniform(&[0.7, 10.0], &centers, 0.1, d1).unwrap();
        assert_eq!(d.weights, vec![0.0, 1.0]);
    }

    #[test]
    fn hand_computed_table() {
        // centers at 0 and 0.15, delta = 0.1, samples at 0.05, 0.15, -0.3
        let centers = [0.0, 0.15];
        let samples = [0.05, 0.15, -0.3];
        let d = soft_bin_uniform(&samples, &centers, 0.1, d1).unwrap();
        let e = |r: f64| (-(r * r) / 0.01f64).exp();
        let s0 = (e(0.05) / (e(0.05) + e(0.1)), e(0.1) / (e(0.05) + e(0.1)));
        let s1 = (e(0.15) / (e(0.15) + e(0.0)), e(0.0) / (e(0.15) + e(0.0)));
        let expected = [(s0.0 + s1.0 + 1.0) / 3.0, (s0.1 + s1.1) / 3.0];
        for j in 0..2 {
            assert!((d.weights[j] - expected[j]).abs() < 1e-12);
        }
    }

    #[test]
    fn empty_samples_error() {
        assert!(matches!(
            soft_bin_uniform::<f64, f64, _>(&[], &[0.0], 0.1, d1),
            Err(AtlasError::EmptySamples)
        ));
    }

    #[test]
    fn golden_transition_sequence() {
        let labels = [0, 1, 1, 0, 0, 1, 0, 2, 0, 3, 3, 0, 1];
        let s = transition_times(&labels, 1.0).unwrap();
        assert_eq!(s.samples[&(1, 2)], vec![6.0]);
        assert_eq!(s.samples[&(2, 3)], vec![2.0]);
        assert_eq!(s.samples[&(3, 1)], vec![3.0]);
        assert_eq!(s.mean(1, 3), None);
        assert_eq!(s.mean(3, 2), None);
        assert_eq!(s.total(), 3);
    }

    #[test]
    fn alternating_sequence() {
        let s = transition_times(&[1, 2, 1, 2], 1.0).unwrap();
        assert_eq!(s.samples[&(1, 2)], vec![1.0, 1.0]);
        assert_eq!(s.mean(2, 1), Some(1.0));
    }

    #[test]
    fn single_region_and_no_region() {
        let s = transition_times(&[1, 1, 0, 1], 0.5).unwrap();
        assert_eq!(s.total(), 0);
        assert!(matches!(
            transition_times(&[0, 0], 1.0),
            Err(AtlasError::NoRegionVisits)
        ));
    }

    #[test]
    fn physical_time_units() {
        let s = transition_times(&[1, 0, 2], 0.25).unwrap();
        assert_eq!(s.mean(1, 2), Some(0.5));
    }

    #[test]
    fn double_well_regions() {
        let regions = RegionSpec::balls(vec![vec![0.0], vec![1.0]], 0.25);
        let pts = vec![vec![0.0], vec![0.5], vec![1.0]];
        let labels = classify(&pts, &regions, |a: &Vec<f64>, b: &Vec<f64>| {
            (a[0] - b[0]).abs()
        });
        assert_eq!(labels, vec![1, 0, 2]);
        assert!(regions
            .overlaps(&pts, |a, b| (a[0] - b[0]).abs())
            .is_empty());
    }

    #[test]
    fn report_statistics() {
        let mut r = ComparisonReport::new(vec![1.0]);
        r.push_ic(vec![(vec![1.0, 0.0], vec![0.0, 1.0])]).unwrap();
        r.push_ic(vec![(vec![1.0, 0.0], vec![1.0, 0.0])]).unwrap();
        assert_eq!(r.l1, vec![vec![2.0], vec![0.0]]);
        assert_eq!(r.mean, vec![1.0]);
        assert!((r.std[0] - 2f64.sqrt()).abs() < 1e-15);
        assert!(r.push_ic(vec![]).is_err());
    }

    #[test]
    fn extrema() {
        let v = [3.0, 1.0, 2.0, 0.5, 4.0];
        assert_eq!(local_minima(&v), vec![1, 3]);
        assert_eq!(local_maxima(&v), vec![2]);
    }
}
