//! Site-bond percolation: lattices with a fraction `1 - q` of faulty sites.
//!
//! For a site yield `q` the lattice percolates once the bond probability
//! passes some `p_min(q)`; through [`crate::physics`] that becomes the minimum
//! entanglement time. Every replica draws its own dilution and runs one bond
//! sweep, so the wrapping probability is known for all `p` at once and the
//! bisection for `p_min` runs on the convolved curve.

use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{check_probability, Error, Result};
use crate::lattice::{build_lattice, dilute_sites, Boundary, Geometry, Lattice};
use crate::percolation::{
    crossing_stderr, map_replicas, run_sweep, wrap_crossing_in, wrap_probability, WrapEvents,
    WrapSample,
};
use crate::physics::{bond_prob_from_time, time_to_threshold, PhysicalParams, Scheme};

pub const DEFAULT_TOLERANCE: f64 = 2e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointStatus {
    Percolating,
    NonPercolating,
}

impl fmt::Display for PointStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PointStatus::Percolating => "percolating",
            PointStatus::NonPercolating => "non_percolating",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct YieldCurvePoint {
    pub geometry: Geometry,
    pub q: f64,
    /// `None` when the diluted lattice never percolates.
    pub p_min: Option<f64>,
    pub p_min_stderr: Option<f64>,
    /// Infinite when non-percolating.
    pub t_min_seconds: f64,
    pub status: PointStatus,
    /// Final bisection bracket, reused to warm-start the next yield.
    #[serde(skip)]
    pub bracket: Option<(f64, f64)>,
}

impl YieldCurvePoint {
    pub fn percolates(&self) -> bool {
        self.status == PointStatus::Percolating
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct YieldConfig {
    /// Only the largest size decides percolation.
    pub sizes: Vec<usize>,
    pub replicas: usize,
    pub base_seed: u64,
    /// Bisection stops once the bracket on `p` is narrower than this.
    pub tolerance: f64,
    pub workers: usize,
    pub params: PhysicalParams,
}

impl YieldConfig {
    /// Waveguide preset, default tolerance, default worker pool.
    pub fn new(sizes: Vec<usize>, replicas: usize, base_seed: u64) -> Self {
        YieldConfig {
            sizes,
            replicas,
            base_seed,
            tolerance: DEFAULT_TOLERANCE,
            workers: 0,
            params: PhysicalParams::preset(Scheme::Waveguide).expect("preset"),
        }
    }

    fn size(&self) -> Result<usize> {
        self.sizes
            .iter()
            .copied()
            .max()
            .ok_or_else(|| Error::InvalidParameter("need at least one size".into()))
    }

    fn validate(&self) -> Result<()> {
        if self.tolerance.is_nan() || self.tolerance <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "tolerance must be positive, got {}",
                self.tolerance
            )));
        }
        self.params.validate()
    }
}

/// Wrapping records of `replicas` independently diluted copies of `base`.
pub fn diluted_wrap_samples(
    base: &Lattice,
    q: f64,
    config: &YieldConfig,
) -> Result<Vec<WrapSample>> {
    check_probability("q", q, false)?;
    map_replicas(config.replicas, config.base_seed, config.workers, |seed| {
        let lattice = dilute_sites(base, q, seed)?;
        if lattice.edge_count() == 0 {
            return Ok(WrapSample {
                steps: 0,
                wrap: WrapEvents::default(),
            });
        }
        let curve = run_sweep(&lattice, seed)?;
        Ok(WrapSample {
            steps: curve.steps(),
            wrap: curve.wrap.unwrap_or_default(),
        })
    })
}

fn periodic(geometry: Geometry, config: &YieldConfig) -> Result<Lattice> {
    config.validate()?;
    build_lattice(geometry, config.size()?, Boundary::Periodic)
}

/// Smallest bond probability at which the lattice with site yield `q` wraps
/// with probability at least 1/2.
pub fn min_bond_prob(geometry: Geometry, q: f64, config: &YieldConfig) -> Result<YieldCurvePoint> {
    let base = periodic(geometry, config)?;
    min_bond_prob_from(&base, q, config, None)
}

fn min_bond_prob_from(
    base: &Lattice,
    q: f64,
    config: &YieldConfig,
    warm: Option<(f64, f64)>,
) -> Result<YieldCurvePoint> {
    let geometry = base.geometry();
    let samples = diluted_wrap_samples(base, q, config)?;
    let (lo, hi) = warm.unwrap_or((0.0, 1.0));
    let Some((lo, hi)) = wrap_crossing_in(&samples, 0.5, config.tolerance, lo, hi) else {
        return Ok(YieldCurvePoint {
            geometry,
            q,
            p_min: None,
            p_min_stderr: None,
            t_min_seconds: f64::INFINITY,
            status: PointStatus::NonPercolating,
            bracket: None,
        });
    };
    let p = 0.5 * (lo + hi);
    Ok(YieldCurvePoint {
        geometry,
        q,
        p_min: Some(p),
        p_min_stderr: Some(crossing_stderr(&samples, p)),
        t_min_seconds: time_to_threshold(p, &config.params, geometry.degree())?,
        status: PointStatus::Percolating,
        bracket: Some((lo, hi)),
    })
}

/// [`min_bond_prob`] over an ascending grid of yields. Each bisection starts
/// from the bracket of the previous yield.
pub fn yield_curve(
    geometry: Geometry,
    q_grid: &[f64],
    config: &YieldConfig,
) -> Result<Vec<YieldCurvePoint>> {
    if q_grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidParameter("q grid must be ascending".into()));
    }
    let base = periodic(geometry, config)?;
    let mut points = Vec::with_capacity(q_grid.len());
    let mut warm = None;
    for &q in q_grid {
        let point = min_bond_prob_from(&base, q, config, warm)?;
        warm = point.bracket.or(warm);
        points.push(point);
    }
    Ok(points)
}

/// Smallest site yield at which the lattice percolates after entangling for
/// `t` seconds, to within `config.tolerance` in `q`. `None` if even `q = 1`
/// does not percolate.
pub fn min_site_yield(geometry: Geometry, t: f64, config: &YieldConfig) -> Result<Option<f64>> {
    let base = periodic(geometry, config)?;
    let p = bond_prob_from_time(t, &config.params, geometry.degree())?;
    let percolates = |q: f64| -> Result<bool> {
        Ok(wrap_probability(&diluted_wrap_samples(&base, q, config)?, p) >= 0.5)
    };
    if !percolates(1.0)? {
        return Ok(None);
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    while hi - lo > config.tolerance {
        let mid = 0.5 * (lo + hi);
        if percolates(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Some(0.5 * (lo + hi)))
}

/// CSV with columns `geometry,q,p_min,p_min_stderr,t_min_seconds,status`.
/// Non-percolating rows leave `p_min` and its error empty.
pub fn write_yield_csv<W: Write>(points: &[YieldCurvePoint], mut out: W) -> std::io::Result<()> {
    writeln!(out, "geometry,q,p_min,p_min_stderr,t_min_seconds,status")?;
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for p in points {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            p.geometry,
            p.q,
            opt(p.p_min),
            opt(p.p_min_stderr),
            p.t_min_seconds,
            p.status
        )?;
    }
    Ok(())
}
