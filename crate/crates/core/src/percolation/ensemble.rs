use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::convolve::ReplicaCanonical;
use super::sweep::run_sweep;
use super::SweepGraph;
use crate::error::{Error, Result};

/// Ensemble-mean observables on a grid of bond probabilities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CanonicalCurve {
    pub p_grid: Vec<f64>,
    pub f_lcc: Vec<f64>,
    pub f_lcc_stderr: Vec<f64>,
    /// Probability that some cluster wraps; absent without winding data.
    pub wrap_prob: Option<Vec<f64>>,
    pub wrap_stderr: Option<Vec<f64>>,
    pub replicas: usize,
    pub nodes: usize,
}

impl CanonicalCurve {
    /// Average per-replica curves in the given order.
    pub fn from_replicas(p_grid: &[f64], nodes: usize, samples: &[ReplicaCanonical]) -> Self {
        let (f_lcc, f_lcc_stderr) =
            mean_and_stderr(samples.iter().map(|s| s.f_lcc.as_slice()), p_grid.len());
        let wrap = if samples.iter().all(|s| s.wrap.is_some()) && !samples.is_empty() {
            Some(mean_and_stderr(
                samples.iter().map(|s| s.wrap.as_deref().unwrap()),
                p_grid.len(),
            ))
        } else {
            None
        };
        let (wrap_prob, wrap_stderr) = match wrap {
            Some((m, s)) => (Some(m), Some(s)),
            None => (None, None),
        };
        CanonicalCurve {
            p_grid: p_grid.to_vec(),
            f_lcc,
            f_lcc_stderr,
            wrap_prob,
            wrap_stderr,
            replicas: samples.len(),
            nodes,
        }
    }

    /// Interpolated `p` at which `f_lcc` first reaches `level`.
    pub fn crossing(&self, level: f64) -> Option<f64> {
        first_crossing(&self.p_grid, &self.f_lcc, level)
    }

    /// CSV with columns `p, f_lcc_mean, f_lcc_stderr, wrap_prob`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "p,f_lcc_mean,f_lcc_stderr,wrap_prob")?;
        for i in 0..self.p_grid.len() {
            let wrap = self
                .wrap_prob
                .as_ref()
                .map(|w| w[i].to_string())
                .unwrap_or_default();
            writeln!(
                out,
                "{},{},{},{}",
                self.p_grid[i], self.f_lcc[i], self.f_lcc_stderr[i], wrap
            )?;
        }
        Ok(())
    }
}

/// Linear interpolation of the first upward crossing of `level`.
pub(crate) fn first_crossing(xs: &[f64], ys: &[f64], level: f64) -> Option<f64> {
    if ys.first().is_some_and(|&y| y >= level) {
        return xs.first().copied();
    }
    xs.windows(2).zip(ys.windows(2)).find_map(|(x, y)| {
        (y[0] < level && y[1] >= level)
            .then(|| x[0] + (level - y[0]) * (x[1] - x[0]) / (y[1] - y[0]))
    })
}

fn mean_and_stderr<'a>(
    rows: impl Iterator<Item = &'a [f64]> + Clone,
    width: usize,
) -> (Vec<f64>, Vec<f64>) {
    let count = rows.clone().count();
    let mut mean = vec![0.0; width];
    for row in rows.clone() {
        for (m, v) in mean.iter_mut().zip(row) {
            *m += v;
        }
    }
    for m in &mut mean {
        *m /= count as f64;
    }
    let mut stderr = vec![0.0; width];
    if count > 1 {
        for row in rows {
            for ((s, m), v) in stderr.iter_mut().zip(&mean).zip(row) {
                *s += (v - m) * (v - m);
            }
        }
        for s in &mut stderr {
            *s = (*s / (count - 1) as f64).sqrt() / (count as f64).sqrt();
        }
    }
    (mean, stderr)
}

/// Seed for replica `index` of an ensemble.
pub fn replica_seed(base_seed: u64, index: usize) -> u64 {
    base_seed.wrapping_add(index as u64)
}

/// Run `job(seed)` for every replica on a pool of `workers` threads
/// (`0` = rayon default) and return the results in replica order.
pub fn map_replicas<T, F>(replicas: usize, base_seed: u64, workers: usize, job: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync + Send,
{
    if replicas == 0 {
        return Err(Error::InvalidParameter(
            "replicas must be at least 1".into(),
        ));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("worker pool: {e}")))?;
    pool.install(|| {
        (0..replicas)
            .into_par_iter()
            .map(|r| job(replica_seed(base_seed, r)))
            .collect()
    })
}

/// Ensemble over one fixed graph: replica `r` sweeps with seed `base_seed + r`.
pub fn ensemble_run<G: SweepGraph>(
    graph: &G,
    replicas: usize,
    p_grid: &[f64],
    base_seed: u64,
    workers: usize,
) -> Result<CanonicalCurve> {
    let samples = map_replicas(replicas, base_seed, workers, |seed| {
        let curve = run_sweep(graph, seed)?;
        ReplicaCanonical::from_curve(&curve, p_grid)
    })?;
    Ok(CanonicalCurve::from_replicas(
        p_grid,
        graph.node_count(),
        &samples,
    ))
}

/// Ensemble where each replica builds its own graph from its seed (fresh
/// dilution or transparency pattern) before sweeping with the same seed.
pub fn ensemble_with<G, F>(
    replicas: usize,
    p_grid: &[f64],
    base_seed: u64,
    workers: usize,
    make_graph: F,
) -> Result<CanonicalCurve>
where
    G: SweepGraph,
    F: Fn(u64) -> Result<G> + Sync + Send,
{
    let results = map_replicas(replicas, base_seed, workers, |seed| {
        let graph = make_graph(seed)?;
        let curve = run_sweep(&graph, seed)?;
        Ok((
            graph.node_count(),
            ReplicaCanonical::from_curve(&curve, p_grid)?,
        ))
    })?;
    let nodes = results[0].0;
    let samples: Vec<ReplicaCanonical> = results.into_iter().map(|(_, s)| s).collect();
    Ok(CanonicalCurve::from_replicas(p_grid, nodes, &samples))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_lattice, Boundary, Geometry};
    use crate::percolation::{convolve_binomial, run_sweep};

    fn grid() -> Vec<f64> {
        (0..=20).map(|i| i as f64 / 20.0).collect()
    }

    #[test]
    fn single_replica_is_convolved_sweep() {
        let lat = build_lattice(Geometry::Square, 16, Boundary::Periodic).unwrap();
        let e = ensemble_run(&lat, 1, &grid(), 42, 1).unwrap();
        let c = convolve_binomial(&run_sweep(&lat, 42).unwrap(), &grid()).unwrap();
        assert_eq!(e, c);
        assert!(e.f_lcc_stderr.iter().all(|&s| s == 0.0));
    }

    #[test]
    fn worker_count_does_not_change_output() {
        let lat = build_lattice(Geometry::Hexagonal, 24, Boundary::Periodic).unwrap();
        let a = ensemble_run(&lat, 12, &grid(), 7, 1).unwrap();
        let b = ensemble_run(&lat, 12, &grid(), 7, 8).unwrap();
        assert_eq!(a, b);
        let mut ca = Vec::new();
        let mut cb = Vec::new();
        a.write_csv(&mut ca).unwrap();
        b.write_csv(&mut cb).unwrap();
        assert_eq!(ca, cb);
    }

    #[test]
    fn curve_bounds_and_wrap_monotone() {
        let lat = build_lattice(Geometry::Square, 24, Boundary::Periodic).unwrap();
        let c = ensemble_run(&lat, 8, &grid(), 1, 0).unwrap();
        let n = lat.node_count() as f64;
        assert!(c
            .f_lcc
            .iter()
            .all(|&f| f >= 1.0 / n - 1e-15 && f <= 1.0 + 1e-12));
        assert!((c.f_lcc[0] - 1.0 / n).abs() < 1e-15);
        assert!((c.f_lcc[20] - 1.0).abs() < 1e-12);
        let w = c.wrap_prob.unwrap();
        assert!(w.windows(2).all(|x| x[0] <= x[1] + 1e-12));
    }

    #[test]
    fn zero_replicas_rejected() {
        let lat = build_lattice(Geometry::Square, 4, Boundary::Periodic).unwrap();
        assert!(ensemble_run(&lat, 0, &grid(), 1, 1).is_err());
    }

    #[test]
    fn crossing_interpolates() {
        let xs = [0.0, 0.5, 1.0];
        let ys = [0.0, 0.2, 1.0];
        assert!((first_crossing(&xs, &ys, 0.6).unwrap() - 0.75).abs() < 1e-12);
        assert_eq!(first_crossing(&xs, &ys, 2.0), None);
    }
}
