//! Threshold estimators.
//!
//! On periodic lattices each replica contributes the fraction of bonds present
//! when a cluster first wraps the torus. Its ensemble mean at size `L` drifts
//! towards `p_c` as `L^(-1/nu)` with the two-dimensional `nu = 4/3`, so the
//! point estimate is the weighted least-squares intercept of
//! `p(L) = p_c + a * L^(-3/4)` across the simulated sizes.
//!
//! Graphs without usable winding data (or whose loops wind trivially, such as
//! the long-range contracted graphs) use the peak of the canonical mean
//! finite-cluster size instead.

use serde::{Deserialize, Serialize};

use super::convolve::{binomial_upper_tail, BinomialWindow};
use super::ensemble::map_replicas;
use super::sweep::{run_site_sweep, run_sweep, run_sweep_with, SweepOptions, WrapEvents};
use super::SweepGraph;
use crate::error::{Error, Result};
use crate::lattice::{build_lattice, Boundary, Geometry};

/// Correlation-length exponent of two-dimensional percolation.
pub const NU_2D: f64 = 4.0 / 3.0;

/// Resolution of the grid on which susceptibility peaks are located.
const PEAK_GRID_STEPS: usize = 2000;

/// Wrapping record of one replica: how many additions the sweep had and when
/// it first wrapped.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WrapSample {
    pub steps: usize,
    pub wrap: WrapEvents,
}

impl WrapSample {
    /// Canonical probability that this replica wraps (either axis) at
    /// occupation probability `p`.
    pub fn wrap_probability(&self, p: f64) -> f64 {
        match self.wrap.any {
            Some(k) => binomial_upper_tail(self.steps, p, k as usize),
            None => 0.0,
        }
    }
}

/// Ensemble wrapping probability at `p`.
pub fn wrap_probability(samples: &[WrapSample], p: f64) -> f64 {
    samples.iter().map(|s| s.wrap_probability(p)).sum::<f64>() / samples.len() as f64
}

/// Occupation probability where the ensemble wrapping probability reaches
/// `level`, by bisection on the convolved curve. `None` if even full
/// occupation stays below `level`.
pub fn wrap_crossing(samples: &[WrapSample], level: f64, tolerance: f64) -> Option<f64> {
    wrap_crossing_in(samples, level, tolerance, 0.0, 1.0).map(|(lo, hi)| 0.5 * (lo + hi))
}

/// Bisection inside a caller-supplied bracket. The bracket is widened to
/// `[0, 1]` on whichever side fails its invariant (lower end below `level`,
/// upper end at or above it). Returns the final bracket.
pub(crate) fn wrap_crossing_in(
    samples: &[WrapSample],
    level: f64,
    tolerance: f64,
    lo: f64,
    hi: f64,
) -> Option<(f64, f64)> {
    if wrap_probability(samples, 1.0) < level {
        return None;
    }
    let mut lo = if lo > 0.0 && wrap_probability(samples, lo) < level {
        lo
    } else {
        0.0
    };
    let mut hi = if hi < 1.0 && wrap_probability(samples, hi) >= level {
        hi
    } else {
        1.0
    };
    if lo >= hi {
        lo = 0.0;
        hi = 1.0;
    }
    while hi - lo > tolerance {
        let mid = 0.5 * (lo + hi);
        if wrap_probability(samples, mid) >= level {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some((lo, hi))
}

/// Threshold estimate at one linear size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizeEstimate {
    #[serde(rename = "L")]
    pub size: usize,
    pub p_hat: f64,
    pub stderr: f64,
    /// Fraction of replicas that wrapped at all (1 for peak estimates).
    pub wrapped: f64,
}

/// Threshold estimate across sizes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdEstimate {
    pub geometry: String,
    #[serde(rename = "L_list")]
    pub sizes: Vec<usize>,
    pub p_c_hat: f64,
    /// Statistical uncertainty of `p_c_hat`.
    pub sigma: f64,
    /// Distance between `p_c_hat` and the largest-size value.
    pub systematic: f64,
    pub criterion: String,
    pub per_size: Vec<SizeEstimate>,
}

fn wrap_samples<G, F>(
    size: usize,
    replicas: usize,
    base_seed: u64,
    workers: usize,
    sites: bool,
    make_graph: &F,
) -> Result<Option<Vec<WrapSample>>>
where
    G: SweepGraph,
    F: Fn(usize, u64) -> Result<G> + Sync + Send,
{
    let samples = map_replicas(replicas, base_seed, workers, |seed| {
        let graph = make_graph(size, seed)?;
        let curve = if sites {
            run_site_sweep(&graph, seed)?
        } else {
            run_sweep(&graph, seed)?
        };
        Ok(curve.wrap.map(|wrap| WrapSample {
            steps: curve.steps(),
            wrap,
        }))
    })?;
    Ok(samples.into_iter().collect())
}

fn mean_wrap_fraction(size: usize, samples: &[WrapSample]) -> Result<SizeEstimate> {
    let hits: Vec<f64> = samples
        .iter()
        .filter_map(|s| s.wrap.any.map(|k| k as f64 / s.steps as f64))
        .collect();
    if hits.is_empty() {
        return Err(Error::NonPercolating(format!(
            "no replica wrapped at L = {size}"
        )));
    }
    let (mean, stderr) = mean_stderr(&hits);
    Ok(SizeEstimate {
        size,
        p_hat: mean,
        stderr,
        wrapped: hits.len() as f64 / samples.len() as f64,
    })
}

fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Bond threshold of a periodic lattice geometry.
pub fn estimate_threshold(
    geometry: Geometry,
    sizes: &[usize],
    replicas: usize,
    base_seed: u64,
    workers: usize,
) -> Result<ThresholdEstimate> {
    let mut est = estimate_threshold_with(sizes, replicas, base_seed, workers, |l, _| {
        build_lattice(geometry, l, Boundary::Periodic)
    })?;
    est.geometry = geometry.name().to_string();
    Ok(est)
}

/// Bond threshold for graphs built per (size, replica seed).
///
/// Uses the extrapolated wrapping estimator when the graphs carry winding
/// data and falls back to susceptibility peaks otherwise.
pub fn estimate_threshold_with<G, F>(
    sizes: &[usize],
    replicas: usize,
    base_seed: u64,
    workers: usize,
    make_graph: F,
) -> Result<ThresholdEstimate>
where
    G: SweepGraph,
    F: Fn(usize, u64) -> Result<G> + Sync + Send,
{
    if sizes.len() < 2 {
        return Err(Error::InvalidParameter("need at least two sizes".into()));
    }
    let mut per_size = Vec::with_capacity(sizes.len());
    for &l in sizes {
        match wrap_samples(l, replicas, base_seed, workers, false, &make_graph)? {
            Some(samples) => per_size.push(mean_wrap_fraction(l, &samples)?),
            None => {
                return susceptibility_over_sizes(sizes, replicas, base_seed, workers, &make_graph)
            }
        }
    }
    Ok(extrapolate(per_size, "wrap_mean_fss"))
}

fn susceptibility_over_sizes<G, F>(
    sizes: &[usize],
    replicas: usize,
    base_seed: u64,
    workers: usize,
    make_graph: &F,
) -> Result<ThresholdEstimate>
where
    G: SweepGraph,
    F: Fn(usize, u64) -> Result<G> + Sync + Send,
{
    let mut per_size = Vec::with_capacity(sizes.len());
    for &l in sizes {
        let peak = susceptibility_peak(replicas, base_seed, workers, |seed| make_graph(l, seed))?;
        per_size.push(SizeEstimate {
            size: l,
            p_hat: peak.p_c_hat,
            stderr: peak.sigma,
            wrapped: 1.0,
        });
    }
    let last = per_size.last().expect("sizes checked non-empty");
    let lo = per_size
        .iter()
        .map(|s| s.p_hat)
        .fold(f64::INFINITY, f64::min);
    let hi = per_size
        .iter()
        .map(|s| s.p_hat)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(ThresholdEstimate {
        geometry: String::new(),
        sizes: sizes.to_vec(),
        p_c_hat: last.p_hat,
        sigma: last.stderr,
        systematic: 0.5 * (hi - lo),
        criterion: "susceptibility_peak".into(),
        per_size,
    })
}

/// Weighted least-squares fit of `p(L) = p_c + a * L^(-1/nu)`.
fn extrapolate(per_size: Vec<SizeEstimate>, criterion: &str) -> ThresholdEstimate {
    let xs: Vec<f64> = per_size
        .iter()
        .map(|s| (s.size as f64).powf(-1.0 / NU_2D))
        .collect();
    let ys: Vec<f64> = per_size.iter().map(|s| s.p_hat).collect();
    // floor the weights so a zero-variance size cannot dominate
    let floor = per_size
        .iter()
        .map(|s| s.stderr)
        .fold(0.0, f64::max)
        .max(1e-9)
        * 1e-3;
    let ws: Vec<f64> = per_size
        .iter()
        .map(|s| 1.0 / s.stderr.max(floor).powi(2))
        .collect();
    let sw: f64 = ws.iter().sum();
    let sx: f64 = ws.iter().zip(&xs).map(|(w, x)| w * x).sum();
    let sy: f64 = ws.iter().zip(&ys).map(|(w, y)| w * y).sum();
    let sxx: f64 = ws.iter().zip(&xs).map(|(w, x)| w * x * x).sum();
    let sxy: f64 = ws
        .iter()
        .zip(&xs)
        .zip(&ys)
        .map(|((w, x), y)| w * x * y)
        .sum();
    let det = sw * sxx - sx * sx;
    let intercept = (sxx * sy - sx * sxy) / det;
    let sigma = (sxx / det).sqrt();
    let last = per_size.last().expect("non-empty sizes");
    ThresholdEstimate {
        geometry: String::new(),
        sizes: per_size.iter().map(|s| s.size).collect(),
        p_c_hat: intercept,
        sigma,
        systematic: (intercept - last.p_hat).abs(),
        criterion: criterion.to_string(),
        per_size,
    }
}

/// Site threshold with every bond present: the occupation probability at
/// which the ensemble wrapping probability of site sweeps crosses 1/2 at the
/// largest size.
pub fn estimate_site_threshold(
    geometry: Geometry,
    sizes: &[usize],
    replicas: usize,
    base_seed: u64,
    workers: usize,
) -> Result<ThresholdEstimate> {
    if sizes.is_empty() {
        return Err(Error::InvalidParameter("need at least one size".into()));
    }
    let make = |l, _| build_lattice(geometry, l, Boundary::Periodic);
    let mut per_size = Vec::with_capacity(sizes.len());
    for &l in sizes {
        let samples = wrap_samples(l, replicas, base_seed, workers, true, &make)?
            .expect("periodic lattices carry winding data");
        let q = wrap_crossing(&samples, 0.5, 1e-6)
            .ok_or_else(|| Error::NonPercolating(format!("no wrapping at L = {l}")))?;
        per_size.push(SizeEstimate {
            size: l,
            p_hat: q,
            stderr: crossing_stderr(&samples, q),
            wrapped: samples.iter().filter(|s| s.wrap.any.is_some()).count() as f64
                / samples.len() as f64,
        });
    }
    let last = per_size.last().unwrap();
    let lo = per_size
        .iter()
        .map(|s| s.p_hat)
        .fold(f64::INFINITY, f64::min);
    let hi = per_size
        .iter()
        .map(|s| s.p_hat)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(ThresholdEstimate {
        geometry: geometry.name().to_string(),
        sizes: sizes.to_vec(),
        p_c_hat: last.p_hat,
        sigma: last.stderr,
        systematic: 0.5 * (hi - lo),
        criterion: "site_wrap_crossing".into(),
        per_size,
    })
}

/// Delta-method standard error of a wrapping-probability crossing: spread of
/// the per-replica probabilities at `x` divided by the slope of the mean.
pub(crate) fn crossing_stderr(samples: &[WrapSample], x: f64) -> f64 {
    let values: Vec<f64> = samples.iter().map(|s| s.wrap_probability(x)).collect();
    let (_, se) = mean_stderr(&values);
    let h = 2e-3;
    let (a, b) = ((x - h).max(0.0), (x + h).min(1.0));
    let slope = (wrap_probability(samples, b) - wrap_probability(samples, a)) / (b - a);
    if slope > 0.0 {
        se / slope
    } else {
        f64::INFINITY
    }
}

/// Location of the susceptibility maximum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeakEstimate {
    pub p_c_hat: f64,
    /// Delete-one-block jackknife error.
    pub sigma: f64,
    pub height: f64,
}

/// Bond probability maximising the ensemble-mean canonical susceptibility
/// (mean finite-cluster size per active node), for graphs built per replica.
pub fn susceptibility_peak<G, F>(
    replicas: usize,
    base_seed: u64,
    workers: usize,
    make_graph: F,
) -> Result<PeakEstimate>
where
    G: SweepGraph,
    F: Fn(u64) -> Result<G> + Sync + Send,
{
    let grid: Vec<f64> = (0..=PEAK_GRID_STEPS)
        .map(|i| i as f64 / PEAK_GRID_STEPS as f64)
        .collect();
    let rows = map_replicas(replicas, base_seed, workers, |seed| {
        let graph = make_graph(seed)?;
        let curve = run_sweep_with(
            &graph,
            seed,
            SweepOptions {
                susceptibility: true,
            },
        )?;
        let steps = curve.steps();
        let chi = curve.susceptibility.expect("requested");
        Ok(grid
            .iter()
            .map(|&p| BinomialWindow::new(steps, p).expectation(&chi))
            .collect::<Vec<f64>>())
    })?;

    let peak_of = |members: &mut dyn Iterator<Item = &Vec<f64>>| -> (f64, f64) {
        let mut sum = vec![0.0; grid.len()];
        let mut count = 0usize;
        for row in members {
            for (s, v) in sum.iter_mut().zip(row) {
                *s += v;
            }
            count += 1;
        }
        let mean: Vec<f64> = sum.iter().map(|s| s / count as f64).collect();
        refine_peak(&grid, &mean)
    };

    let (p, height) = peak_of(&mut rows.iter());
    let blocks = rows.len().min(10);
    let sigma = if blocks >= 2 {
        let per_block = rows.len().div_ceil(blocks);
        let estimates: Vec<f64> = (0..blocks)
            .map(|b| {
                let mut it = rows
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| i / per_block != b)
                    .map(|(_, r)| r);
                peak_of(&mut it).0
            })
            .collect();
        let mean = estimates.iter().sum::<f64>() / blocks as f64;
        let ss: f64 = estimates.iter().map(|e| (e - mean).powi(2)).sum();
        (ss * (blocks - 1) as f64 / blocks as f64).sqrt()
    } else {
        1.0 / PEAK_GRID_STEPS as f64
    };
    Ok(PeakEstimate {
        p_c_hat: p,
        sigma,
        height,
    })
}

/// Grid argmax refined by a parabola through its neighbours.
fn refine_peak(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let (i, &y) = ys
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty grid");
    if i == 0 || i + 1 == ys.len() {
        return (xs[i], y);
    }
    let (y0, y2) = (ys[i - 1], ys[i + 1]);
    let denom = y0 - 2.0 * y + y2;
    if denom >= 0.0 {
        return (xs[i], y);
    }
    let shift = 0.5 * (y0 - y2) / denom;
    (
        xs[i] + shift * (xs[i + 1] - xs[i]),
        y - 0.25 * (y0 - y2) * shift,
    )
}
