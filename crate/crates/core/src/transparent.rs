//! Long-range architecture built from a square lattice in which only a
//! fraction `epsilon` of nodes hold qubits and the rest are transparent.
//!
//! Cluster fractions are normalised by the total node count `N`, so the
//! largest cluster can never exceed `epsilon`. Faulty sites count as
//! transparent: a node is active with probability `epsilon * q`.
//!
//! Thresholds come from the susceptibility peak rather than from wrapping.
//! Contracted edges are long and the graph is locally tree-like, so almost
//! any short loop already winds the torus and wrapping happens far below the
//! point where a giant cluster appears.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{check_probability, Error, Result};
use crate::lattice::{build_lattice, contract_transparent, Boundary, Geometry, Lattice, Pairing};
use crate::percolation::{ensemble_with, susceptibility_peak, CanonicalCurve};
use crate::physics::{bond_prob_from_time, time_to_threshold, PhysicalParams, Scheme};

/// Smallest allowed number of expected active nodes, `epsilon * N`.
pub const MIN_ACTIVE_NODES: f64 = 100.0;

/// Lowest bond threshold reachable by a graph of degree at most four.
pub const THRESHOLD_FLOOR: f64 = 1.0 / 3.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransparentRunConfig {
    #[serde(rename = "L")]
    pub size: usize,
    pub epsilon: f64,
    /// Site yield; faulty sites become transparent.
    pub q: f64,
    pub replicas: usize,
    pub p_grid: Vec<f64>,
    pub params: PhysicalParams,
    pub pairing: Pairing,
    pub base_seed: u64,
    pub workers: usize,
}

impl TransparentRunConfig {
    /// Waveguide preset, full yield, straight-through pairing, a 101-point
    /// grid in `p`.
    pub fn new(size: usize, epsilon: f64, replicas: usize, base_seed: u64) -> Self {
        TransparentRunConfig {
            size,
            epsilon,
            q: 1.0,
            replicas,
            p_grid: (0..=100).map(|i| i as f64 / 100.0).collect(),
            params: PhysicalParams::preset(Scheme::Waveguide).expect("preset"),
            pairing: Pairing::StraightThrough,
            base_seed,
            workers: 0,
        }
    }

    pub fn active_probability(&self) -> f64 {
        self.epsilon * self.q
    }

    pub fn validate(&self) -> Result<()> {
        check_probability("epsilon", self.epsilon, false)?;
        check_probability("q", self.q, false)?;
        check_active_nodes(self.size, self.active_probability())?;
        if self.p_grid.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::InvalidParameter("p grid must lie in [0, 1]".into()));
        }
        self.params.validate()
    }

    fn lattice(&self) -> Result<Lattice> {
        build_lattice(Geometry::Square, self.size, Boundary::Periodic)
    }
}

fn check_active_nodes(size: usize, active_probability: f64) -> Result<()> {
    let expected = active_probability * (size * size) as f64;
    if expected < MIN_ACTIVE_NODES {
        return Err(Error::InvalidParameter(format!(
            "epsilon * N = {expected} is below {MIN_ACTIVE_NODES}; use a larger lattice"
        )));
    }
    Ok(())
}

/// Ensemble curve on contracted graphs; replica `r` draws its transparent set
/// and its edge order from seed `base_seed + r`.
pub fn transparent_curve(config: &TransparentRunConfig) -> Result<CanonicalCurve> {
    config.validate()?;
    let base = config.lattice()?;
    let active = config.active_probability();
    ensemble_with(
        config.replicas,
        &config.p_grid,
        config.base_seed,
        config.workers,
        |seed| contract_transparent(&base, active, config.pairing, seed),
    )
}

/// CSV with columns `epsilon,p,t_seconds,f_lcc_mean,f_lcc_stderr`.
pub fn write_transparent_csv<W: Write>(
    epsilon: f64,
    curve: &CanonicalCurve,
    params: &PhysicalParams,
    mut out: W,
) -> std::io::Result<()> {
    writeln!(out, "epsilon,p,t_seconds,f_lcc_mean,f_lcc_stderr")?;
    for i in 0..curve.p_grid.len() {
        let p = curve.p_grid[i];
        let t = time_to_threshold(p, params, 4).unwrap_or(f64::INFINITY);
        writeln!(
            out,
            "{epsilon},{p},{t},{},{}",
            curve.f_lcc[i], curve.f_lcc_stderr[i]
        )?;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpsilonThreshold {
    pub epsilon: f64,
    pub p_c_hat: f64,
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsilonThresholdTable {
    #[serde(rename = "L")]
    pub size: usize,
    pub replicas: usize,
    pub criterion: String,
    pub points: Vec<EpsilonThreshold>,
    /// Linear extrapolation of the small-epsilon points to `epsilon = 0`.
    pub extrapolated: Option<f64>,
}

/// Susceptibility-peak threshold of the contracted graph for each epsilon.
pub fn min_threshold_vs_epsilon(
    size: usize,
    epsilon_grid: &[f64],
    replicas: usize,
    base_seed: u64,
    workers: usize,
) -> Result<EpsilonThresholdTable> {
    let base = build_lattice(Geometry::Square, size, Boundary::Periodic)?;
    let mut points = Vec::with_capacity(epsilon_grid.len());
    for &epsilon in epsilon_grid {
        check_probability("epsilon", epsilon, false)?;
        check_active_nodes(size, epsilon)?;
        let peak = susceptibility_peak(replicas, base_seed, workers, |seed| {
            contract_transparent(&base, epsilon, Pairing::StraightThrough, seed)
        })?;
        points.push(EpsilonThreshold {
            epsilon,
            p_c_hat: peak.p_c_hat,
            sigma: peak.sigma,
        });
    }
    let extrapolated = extrapolate_to_zero(&points);
    Ok(EpsilonThresholdTable {
        size,
        replicas,
        criterion: "susceptibility_peak".into(),
        points,
        extrapolated,
    })
}

/// Least-squares line through the points with `epsilon <= 0.1`, evaluated at
/// zero. Needs at least two such points.
fn extrapolate_to_zero(points: &[EpsilonThreshold]) -> Option<f64> {
    let small: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| p.epsilon <= 0.1)
        .map(|p| (p.epsilon, p.p_c_hat))
        .collect();
    if small.len() < 2 {
        return None;
    }
    let n = small.len() as f64;
    let mx = small.iter().map(|p| p.0).sum::<f64>() / n;
    let my = small.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = small.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = small.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Some(my - sxy / sxx * mx)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimalEpsilon {
    pub epsilon: f64,
    /// Mean largest-cluster fraction of all `N` nodes at the optimum.
    pub f_lcc: f64,
    pub f_lcc_at_one: f64,
    pub p: f64,
    /// Bond probability below [`THRESHOLD_FLOOR`]: no epsilon percolates and
    /// the optimum is the largest sub-critical cluster.
    pub sub_critical: bool,
    pub evaluations: usize,
}

/// Epsilon maximising the mean largest cluster after entangling for
/// `t_budget` seconds, by golden-section search with both ends checked.
///
/// Every epsilon is evaluated on the same replica seeds, so transparent sets
/// are nested and the objective varies smoothly with epsilon.
pub fn optimal_epsilon(
    t_budget: f64,
    size: usize,
    params: &PhysicalParams,
    replicas: usize,
    base_seed: u64,
    workers: usize,
) -> Result<OptimalEpsilon> {
    if t_budget.is_nan() || t_budget <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "time budget must be positive, got {t_budget}"
        )));
    }
    let p = bond_prob_from_time(t_budget, params, 4)?;
    let base = build_lattice(Geometry::Square, size, Boundary::Periodic)?;
    let low = MIN_ACTIVE_NODES / (size * size) as f64;
    if low >= 1.0 {
        return Err(Error::InvalidParameter(format!("L = {size} is too small")));
    }
    let mut evaluations = 0;
    let mut objective = |epsilon: f64| -> Result<f64> {
        evaluations += 1;
        let curve = ensemble_with(replicas, &[p], base_seed, workers, |seed| {
            contract_transparent(&base, epsilon, Pairing::StraightThrough, seed)
        })?;
        Ok(curve.f_lcc[0])
    };

    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (low, 1.0);
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let (mut fc, mut fd) = (objective(c)?, objective(d)?);
    while b - a > 1e-3 {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = objective(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = objective(d)?;
        }
    }
    let (mut best, mut best_f) = if fc >= fd { (c, fc) } else { (d, fd) };
    let f_one = objective(1.0)?;
    let f_low = objective(low)?;
    if f_one >= best_f {
        best = 1.0;
        best_f = f_one;
    }
    if f_low > best_f {
        best = low;
        best_f = f_low;
    }
    Ok(OptimalEpsilon {
        epsilon: best,
        f_lcc: best_f,
        f_lcc_at_one: f_one,
        p,
        sub_critical: p < THRESHOLD_FLOOR,
        evaluations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::percolation::ensemble_run;

    #[test]
    fn epsilon_one_is_plain_square() {
        let cfg = TransparentRunConfig::new(24, 1.0, 6, 3);
        let curve = transparent_curve(&cfg).unwrap();
        let lat = build_lattice(Geometry::Square, 24, Boundary::Periodic).unwrap();
        let plain = ensemble_run(&lat, 6, &cfg.p_grid, 3, 0).unwrap();
        assert_eq!(curve, plain);
    }

    #[test]
    fn ceiling_is_epsilon() {
        let cfg = TransparentRunConfig::new(64, 0.5, 8, 5);
        let curve = transparent_curve(&cfg).unwrap();
        let top = *curve.f_lcc.last().unwrap();
        assert!((top - 0.5).abs() < 0.02, "{top}");
        for (f, s) in curve.f_lcc.iter().zip(&curve.f_lcc_stderr) {
            assert!(*f <= 0.5 + 3.0 * s + 0.02);
        }
    }

    #[test]
    fn yield_shrinks_active_fraction() {
        let mut cfg = TransparentRunConfig::new(64, 0.5, 4, 5);
        cfg.q = 0.5;
        let top = *transparent_curve(&cfg).unwrap().f_lcc.last().unwrap();
        assert!((top - 0.25).abs() < 0.02, "{top}");
    }

    #[test]
    fn too_few_active_nodes_rejected() {
        let cfg = TransparentRunConfig::new(32, 0.05, 2, 1);
        assert!(transparent_curve(&cfg).is_err());
        assert!(min_threshold_vs_epsilon(32, &[0.05], 2, 1, 1).is_err());
    }

    #[test]
    fn small_epsilon_lowers_threshold() {
        let table = min_threshold_vs_epsilon(128, &[1.0, 0.1], 16, 9, 0).unwrap();
        let (one, small) = (table.points[0].p_c_hat, table.points[1].p_c_hat);
        assert!((one - 0.5).abs() < 0.03, "{one}");
        assert!(small < one - 0.05, "{small} vs {one}");
        assert!(small > THRESHOLD_FLOOR - 0.02);
    }

    #[test]
    fn extrapolation_line() {
        let pts = [
            EpsilonThreshold {
                epsilon: 0.02,
                p_c_hat: 0.36,
                sigma: 0.0,
            },
            EpsilonThreshold {
                epsilon: 0.04,
                p_c_hat: 0.38,
                sigma: 0.0,
            },
            EpsilonThreshold {
                epsilon: 0.5,
                p_c_hat: 0.45,
                sigma: 0.0,
            },
        ];
        assert!((extrapolate_to_zero(&pts).unwrap() - 0.34).abs() < 1e-12);
        assert_eq!(extrapolate_to_zero(&pts[2..]), None);
    }

    #[test]
    fn long_budget_prefers_all_active() {
        let w = PhysicalParams::preset(Scheme::Waveguide).unwrap();
        let opt = optimal_epsilon(2.0, 32, &w, 4, 1, 0).unwrap();
        assert_eq!(opt.epsilon, 1.0);
        assert!(!opt.sub_critical);
        assert!(opt.f_lcc > 0.99);
    }

    #[test]
    fn csv_columns() {
        let mut cfg = TransparentRunConfig::new(16, 1.0, 2, 1);
        cfg.p_grid = vec![0.0, 0.5, 1.0];
        let curve = transparent_curve(&cfg).unwrap();
        let mut buf = Vec::new();
        write_transparent_csv(1.0, &curve, &cfg.params, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "epsilon,p,t_seconds,f_lcc_mean,f_lcc_stderr");
        assert!(lines[1].starts_with("1,0,0,"));
        assert!(lines[3].starts_with("1,1,inf,1,"));
    }
}
