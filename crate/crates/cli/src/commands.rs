use std::path::PathBuf;

use anyhow::{bail, Context as _};
use clap::Args;
use serde::Serialize;

use perc_core::lattice::{build_lattice, dilute_sites, Boundary, Geometry, Pairing};
use perc_core::percolation::{
    ensemble_run, ensemble_with, estimate_site_threshold, estimate_threshold, CanonicalCurve,
};
use perc_core::physics::{
    bond_prob_from_time, parse_seconds, threshold_time_lower_bound, time_to_threshold,
    PhysicalParams, Scheme,
};
use perc_core::site_bond::{write_yield_csv, yield_curve as core_yield_curve, YieldConfig};
use perc_core::transparent::{
    min_threshold_vs_epsilon, optimal_epsilon, transparent_curve, TransparentRunConfig,
};

use crate::grid::{duration, number, parse_grid, GridError};
use crate::manifest::Recorder;

pub struct Context {
    pub out: PathBuf,
    pub workers: usize,
    pub args: Vec<String>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DeviceArgs {
    /// Collection scheme preset.
    #[arg(long, default_value = "waveguide")]
    pub scheme: Scheme,
    /// Per-attempt success probability; overrides the preset.
    #[arg(long, conflicts_with = "eta")]
    pub p0: Option<f64>,
    /// Single-photon efficiency, giving p0 = eta^2 / 2.
    #[arg(long)]
    pub eta: Option<f64>,
    /// Attempt period, e.g. 5us.
    #[arg(long, default_value = "5us")]
    pub t0: String,
}

impl DeviceArgs {
    pub fn params(&self) -> anyhow::Result<PhysicalParams> {
        let t0 = parse_seconds(&self.t0)?;
        let params = match (self.p0, self.eta) {
            (Some(p0), _) => PhysicalParams::custom(p0, t0)?,
            (None, Some(eta)) => PhysicalParams::from_eta(eta, t0)?,
            (None, None) => {
                let mut p = PhysicalParams::preset(self.scheme)?;
                p.t0 = t0;
                p.validate()?;
                p
            }
        };
        Ok(params)
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SweepArgs {
    #[arg(long, default_value = "square")]
    pub geometry: Geometry,
    #[arg(long = "L", default_value_t = 256)]
    pub size: usize,
    #[arg(long, default_value = "periodic")]
    pub boundary: Boundary,
    #[command(flatten)]
    pub device: DeviceArgs,
    /// Attempt round-robin degree; defaults to the lattice degree.
    #[arg(long)]
    pub d: Option<usize>,
    /// Bond probabilities, `start:stop:count` or a comma list.
    #[arg(long, conflicts_with = "t_grid")]
    pub p_grid: Option<String>,
    /// Entanglement times, e.g. `0:200ms:101`.
    #[arg(long)]
    pub t_grid: Option<String>,
    #[arg(long, default_value_t = 10)]
    pub replicas: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Fraction of active (non-transparent) nodes; square lattices only.
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Site yield.
    #[arg(long, default_value_t = 1.0)]
    pub q: f64,
}

#[derive(Debug, Serialize)]
struct SweepSummary {
    geometry: Geometry,
    #[serde(rename = "L")]
    size: usize,
    d: usize,
    ceiling: f64,
    half_ceiling_p: Option<f64>,
    half_ceiling_t: Option<f64>,
    t_c_closed_form: f64,
}

pub fn sweep(ctx: &Context, a: &SweepArgs) -> anyhow::Result<()> {
    let params = a.device.params()?;
    let d = a.d.unwrap_or(a.geometry.degree());
    let (p_grid, t_grid) = match &a.t_grid {
        Some(text) => {
            let ts = parse_grid(text, duration)?;
            let ps = ts
                .iter()
                .map(|&t| bond_prob_from_time(t, &params, d))
                .collect::<Result<Vec<f64>, _>>()?;
            (ps, ts)
        }
        None => {
            let ps = parse_grid(a.p_grid.as_deref().unwrap_or("0:1:201"), number)?;
            if ps.iter().any(|p| !(0.0..=1.0).contains(p)) {
                return Err(GridError("bond probabilities must lie in [0, 1]".into()).into());
            }
            let ts = ps
                .iter()
                .map(|&p| time_to_threshold(p, &params, d).unwrap_or(f64::INFINITY))
                .collect();
            (ps, ts)
        }
    };

    let lattice = build_lattice(a.geometry, a.size, a.boundary)?;
    let (curve, active_fraction) = match a.epsilon {
        Some(epsilon) => {
            if a.geometry != Geometry::Square {
                return Err(perc_core::Error::UnsupportedGeometry(a.geometry.name()).into());
            }
            if a.boundary != Boundary::Periodic {
                bail!("transparent runs use periodic boundaries");
            }
            let mut cfg = TransparentRunConfig::new(a.size, epsilon, a.replicas, a.seed);
            cfg.q = a.q;
            cfg.p_grid = p_grid.clone();
            cfg.params = params;
            cfg.pairing = Pairing::StraightThrough;
            cfg.workers = ctx.workers;
            (transparent_curve(&cfg)?, epsilon * a.q)
        }
        None if a.q < 1.0 => {
            let curve = ensemble_with(a.replicas, &p_grid, a.seed, ctx.workers, |seed| {
                dilute_sites(&lattice, a.q, seed)
            })?;
            (curve, a.q)
        }
        None => (
            ensemble_run(&lattice, a.replicas, &p_grid, a.seed, ctx.workers)?,
            1.0,
        ),
    };

    let ceiling = if p_grid.last() == Some(&1.0) {
        *curve.f_lcc.last().expect("non-empty grid")
    } else {
        active_fraction
    };
    let half_p = curve.crossing(0.5 * ceiling);
    let summary = SweepSummary {
        geometry: a.geometry,
        size: a.size,
        d,
        ceiling,
        half_ceiling_p: half_p,
        half_ceiling_t: half_p.and_then(|p| time_to_threshold(p, &params, d).ok()),
        t_c_closed_form: time_to_threshold(a.geometry.bond_threshold(), &params, d)?,
    };

    let stem = match a.epsilon {
        Some(e) => format!("sweep-{}-L{}-eps{}", a.geometry, a.size, e),
        None => format!("sweep-{}-L{}", a.geometry, a.size),
    };
    let mut rec = Recorder::new(&ctx.out)?;
    rec.write(&format!("{stem}.csv"), &sweep_csv(&curve, &t_grid))?;
    rec.write(
        &format!("{stem}.json"),
        (serde_json::to_string_pretty(&summary)? + "\n").as_bytes(),
    )?;
    rec.finish(&stem, "sweep", &ctx.args, a, Some(a.seed))?;
    match summary.half_ceiling_t {
        Some(t) => println!(
            "{stem}: half-ceiling at p = {:.4}, t = {:.6} s (closed form {:.6} s)",
            half_p.unwrap_or(f64::NAN),
            t,
            summary.t_c_closed_form
        ),
        None => println!("{stem}: half ceiling not reached on this grid"),
    }
    Ok(())
}

fn sweep_csv(curve: &CanonicalCurve, t_grid: &[f64]) -> Vec<u8> {
    let mut out = String::from("p,t_seconds,f_lcc_mean,f_lcc_stderr,wrap_prob\n");
    for i in 0..curve.p_grid.len() {
        let wrap = curve
            .wrap_prob
            .as_ref()
            .map(|w| w[i].to_string())
            .unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            curve.p_grid[i], t_grid[i], curve.f_lcc[i], curve.f_lcc_stderr[i], wrap
        ));
    }
    out.into_bytes()
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ThresholdArgs {
    #[arg(long, default_value = "square")]
    pub geometry: Geometry,
    /// Linear sizes for the finite-size extrapolation.
    #[arg(long, value_delimiter = ',', default_value = "64,128,256")]
    pub sizes: Vec<usize>,
    #[arg(long, default_value_t = 200)]
    pub replicas: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Site threshold with every bond present.
    #[arg(long, conflicts_with = "transparent")]
    pub site: bool,
    /// Transparent-node architecture on a square lattice.
    #[arg(long)]
    pub transparent: bool,
    /// Active fractions for `--transparent`.
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "0.01",
        requires = "transparent"
    )]
    pub epsilon: Vec<f64>,
    /// Lattice size for `--transparent`.
    #[arg(long = "L", default_value_t = 1024, requires = "transparent")]
    pub size: usize,
}

#[derive(Debug, Serialize)]
struct ThresholdReport<T: Serialize> {
    #[serde(flatten)]
    estimate: T,
    exact: Option<f64>,
}

pub fn threshold(ctx: &Context, a: &ThresholdArgs) -> anyhow::Result<()> {
    let mut rec = Recorder::new(&ctx.out)?;
    let (stem, json, line) = if a.transparent {
        if a.geometry != Geometry::Square {
            return Err(perc_core::Error::UnsupportedGeometry(a.geometry.name()).into());
        }
        let table = min_threshold_vs_epsilon(a.size, &a.epsilon, a.replicas, a.seed, ctx.workers)?;
        let line = table
            .points
            .iter()
            .map(|p| format!("eps={}: {:.4} +- {:.4}", p.epsilon, p.p_c_hat, p.sigma))
            .collect::<Vec<_>>()
            .join("; ");
        let report = ThresholdReport {
            estimate: table,
            exact: None,
        };
        (
            format!("threshold-transparent-L{}", a.size),
            serde_json::to_string_pretty(&report)?,
            line,
        )
    } else if a.site {
        let est = estimate_site_threshold(a.geometry, &a.sizes, a.replicas, a.seed, ctx.workers)?;
        let line = format!("site threshold {:.4} +- {:.4}", est.p_c_hat, est.sigma);
        let report = ThresholdReport {
            estimate: est,
            exact: None,
        };
        (
            format!("threshold-{}-site", a.geometry),
            serde_json::to_string_pretty(&report)?,
            line,
        )
    } else {
        let est = estimate_threshold(a.geometry, &a.sizes, a.replicas, a.seed, ctx.workers)?;
        let line = format!("bond threshold {:.4} +- {:.4}", est.p_c_hat, est.sigma);
        let report = ThresholdReport {
            estimate: est,
            exact: Some(a.geometry.bond_threshold()),
        };
        (
            format!("threshold-{}", a.geometry),
            serde_json::to_string_pretty(&report)?,
            line,
        )
    };
    rec.write(&format!("{stem}.json"), (json + "\n").as_bytes())?;
    rec.finish(&stem, "threshold", &ctx.args, a, Some(a.seed))?;
    println!("{stem}: {line}");
    Ok(())
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct YieldArgs {
    #[arg(long, default_value = "square")]
    pub geometry: Geometry,
    /// Ascending site yields.
    #[arg(long, default_value = "0.6:1:9")]
    pub q_grid: String,
    #[arg(long, value_delimiter = ',', default_value = "128")]
    pub sizes: Vec<usize>,
    #[arg(long, default_value_t = 100)]
    pub replicas: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Bisection tolerance in bond probability.
    #[arg(long, default_value_t = perc_core::site_bond::DEFAULT_TOLERANCE)]
    pub tolerance: f64,
    #[command(flatten)]
    pub device: DeviceArgs,
}

pub fn yield_curve(ctx: &Context, a: &YieldArgs) -> anyhow::Result<()> {
    let q_grid = parse_grid(&a.q_grid, number)?;
    let mut cfg = YieldConfig::new(a.sizes.clone(), a.replicas, a.seed);
    cfg.tolerance = a.tolerance;
    cfg.workers = ctx.workers;
    cfg.params = a.device.params()?;
    let points = core_yield_curve(a.geometry, &q_grid, &cfg)?;
    let mut csv = Vec::new();
    write_yield_csv(&points, &mut csv)?;
    let stem = format!("yield-{}", a.geometry);
    let mut rec = Recorder::new(&ctx.out)?;
    rec.write(&format!("{stem}.csv"), &csv)?;
    rec.finish(&stem, "yield", &ctx.args, a, Some(a.seed))?;
    let failed = points.iter().filter(|p| !p.percolates()).count();
    println!(
        "{stem}: {} point(s), {failed} non-percolating",
        points.len()
    );
    Ok(())
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PhysicsArgs {
    #[command(flatten)]
    pub device: DeviceArgs,
    /// Degree for an extra custom entry (needs --p-c).
    #[arg(long, requires = "p_c")]
    pub d: Option<usize>,
    /// Threshold for an extra custom entry (needs --d).
    #[arg(long, requires = "d")]
    pub p_c: Option<f64>,
    /// Coherence budget to compare threshold times against, e.g. 1s.
    #[arg(long, default_value = "1s")]
    pub coherence: String,
}

#[derive(Debug, Serialize)]
struct LatticeTime {
    lattice: String,
    d: usize,
    p_c: f64,
    t_c: f64,
    t_c_over_t_lb: f64,
    within_coherence: bool,
}

#[derive(Debug, Serialize)]
struct PhysicsReport {
    scheme: Scheme,
    p0: f64,
    t0: f64,
    eta: Option<f64>,
    t_lb: f64,
    coherence: f64,
    lattices: Vec<LatticeTime>,
}

pub fn physics(ctx: &Context, a: &PhysicsArgs) -> anyhow::Result<()> {
    let params = a.device.params()?;
    let coherence = parse_seconds(&a.coherence)?;
    let t_lb = threshold_time_lower_bound(&params)?;
    let entry = |name: String, d: usize, p_c: f64| -> anyhow::Result<LatticeTime> {
        let t_c = time_to_threshold(p_c, &params, d)?;
        Ok(LatticeTime {
            lattice: name,
            d,
            p_c,
            t_c,
            t_c_over_t_lb: t_c / t_lb,
            within_coherence: t_c <= coherence,
        })
    };
    let mut lattices = Geometry::ALL
        .iter()
        .map(|g| entry(g.name().to_string(), g.degree(), g.bond_threshold()))
        .collect::<anyhow::Result<Vec<_>>>()?;
    if let (Some(d), Some(p_c)) = (a.d, a.p_c) {
        lattices.push(entry("custom".into(), d, p_c)?);
    }
    let report = PhysicsReport {
        scheme: params.scheme,
        p0: params.p0,
        t0: params.t0,
        eta: params.eta,
        t_lb,
        coherence,
        lattices,
    };
    let json = serde_json::to_string_pretty(&report)? + "\n";
    let stem = format!("physics-{}", params.scheme);
    let mut rec = Recorder::new(&ctx.out)?;
    rec.write(&format!("{stem}.json"), json.as_bytes())?;
    rec.finish(&stem, "physics", &ctx.args, a, None)?;
    print!("{json}");
    Ok(())
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct OptimumArgs {
    /// Entanglement time budget, e.g. 50ms.
    #[arg(long)]
    pub budget: String,
    #[arg(long = "L", default_value_t = 256)]
    pub size: usize,
    #[arg(long, default_value_t = 8)]
    pub replicas: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[command(flatten)]
    pub device: DeviceArgs,
}

pub fn optimum(ctx: &Context, a: &OptimumArgs) -> anyhow::Result<()> {
    let params = a.device.params()?;
    let budget = parse_seconds(&a.budget).context("--budget")?;
    let opt = optimal_epsilon(budget, a.size, &params, a.replicas, a.seed, ctx.workers)?;
    let json = serde_json::to_string_pretty(&opt)? + "\n";
    let stem = format!("optimum-L{}", a.size);
    let mut rec = Recorder::new(&ctx.out)?;
    rec.write(&format!("{stem}.json"), json.as_bytes())?;
    rec.finish(&stem, "optimum", &ctx.args, a, Some(a.seed))?;
    println!(
        "{stem}: epsilon = {:.4}, f_lcc = {:.5} (epsilon = 1: {:.5}){}",
        opt.epsilon,
        opt.f_lcc,
        opt.f_lcc_at_one,
        if opt.sub_critical {
            ", sub-critical"
        } else {
            ""
        }
    );
    Ok(())
}
