//! End-to-end examples for the yield and transparent-node modules.

use perc_core::lattice::{build_lattice, Boundary, Geometry};
use perc_core::percolation::{ensemble_run, susceptibility_peak};
use perc_core::physics::{bond_prob_from_time, PhysicalParams, Scheme};
use perc_core::site_bond::{min_bond_prob, YieldConfig};
use perc_core::transparent::{
    min_threshold_vs_epsilon, optimal_epsilon, transparent_curve, TransparentRunConfig,
    THRESHOLD_FLOOR,
};

#[test]
fn full_yield_reduces_to_bond_threshold() {
    let cfg = YieldConfig::new(vec![256], 200, 5);
    let pt = min_bond_prob(Geometry::Square, 1.0, &cfg).unwrap();
    let p = pt.p_min.unwrap();
    assert!((p - 0.5).abs() <= 0.005, "{p}");
    let partial = min_bond_prob(Geometry::Square, 0.9, &cfg)
        .unwrap()
        .p_min
        .unwrap();
    assert!(partial > p && partial < 1.0, "{partial}");
}

#[test]
fn yield_ordering_at_three_quarters() {
    let cfg = YieldConfig::new(vec![128], 100, 5);
    let t: Vec<f64> = [Geometry::Triangular, Geometry::Square, Geometry::Hexagonal]
        .iter()
        .map(|&g| min_bond_prob(g, 0.75, &cfg).unwrap().t_min_seconds)
        .collect();
    // hexagonal still percolates here since its site threshold is about 0.697
    assert!(t.iter().all(|t| t.is_finite()));
    assert!(t[0] < t[1] && t[1] < t[2], "{t:?}");
}

#[test]
fn transparent_curves_cross() {
    // sparser graphs take off at lower p but level off at epsilon
    let mut prev: Option<(f64, f64)> = None;
    for eps in [1.0, 0.7, 0.4] {
        let curve = transparent_curve(&TransparentRunConfig::new(128, eps, 8, 2)).unwrap();
        let top = *curve.f_lcc.last().unwrap();
        assert!((top - eps).abs() < 0.01, "eps = {eps}: {top}");
        let rise = curve.crossing(0.1).unwrap();
        if let Some((prev_rise, prev_top)) = prev {
            assert!(rise < prev_rise, "eps = {eps}: {rise} vs {prev_rise}");
            assert!(top < prev_top);
        }
        prev = Some((rise, top));
    }
}

#[test]
fn half_active_fully_bonded_is_connected() {
    let mut cfg = TransparentRunConfig::new(128, 0.5, 4, 8);
    cfg.p_grid = vec![1.0];
    let f = transparent_curve(&cfg).unwrap().f_lcc[0];
    assert!((f - 0.5).abs() < 0.01, "{f}");
}

#[test]
fn thresholds_fall_with_epsilon() {
    let grid = [1.0, 0.4, 0.1, 0.02];
    let table = min_threshold_vs_epsilon(512, &grid, 40, 3, 0).unwrap();
    let ps: Vec<f64> = table.points.iter().map(|p| p.p_c_hat).collect();
    assert!(ps.windows(2).all(|w| w[1] < w[0]), "{ps:?}");
    assert!(ps.iter().all(|&p| p >= THRESHOLD_FLOOR - 0.02));
    assert!((ps[0] - 0.5).abs() < 0.01, "{}", ps[0]);
}

#[test]
fn plain_lattice_peak_and_wrap_agree() {
    let lat = build_lattice(Geometry::Square, 256, Boundary::Periodic).unwrap();
    let peak = susceptibility_peak(20, 1, 0, |_| Ok(lat.clone())).unwrap();
    assert!((peak.p_c_hat - 0.5).abs() < 0.01, "{peak:?}");
}

#[test]
fn optimum_is_interior_below_square_threshold() {
    let w = PhysicalParams::preset(Scheme::Waveguide).unwrap();
    // budget giving p = 0.42 on degree four
    let t = 4.0 * w.t0 * (1.0f64 - 0.42).ln() / (1.0 - w.p0).ln();
    assert!((bond_prob_from_time(t, &w, 4).unwrap() - 0.42).abs() < 1e-12);
    let opt = optimal_epsilon(t, 128, &w, 6, 4, 0).unwrap();
    assert!(opt.epsilon > 0.0 && opt.epsilon < 1.0, "{opt:?}");
    assert!(opt.f_lcc >= opt.f_lcc_at_one);
    assert!(!opt.sub_critical);
}

#[test]
fn short_budget_is_flagged() {
    let w = PhysicalParams::preset(Scheme::Waveguide).unwrap();
    let opt = optimal_epsilon(0.01, 64, &w, 4, 4, 0).unwrap();
    assert!(opt.sub_critical);
    assert!(opt.f_lcc >= opt.f_lcc_at_one);
}

#[test]
fn plain_ensemble_matches_full_activity() {
    let lat = build_lattice(Geometry::Square, 64, Boundary::Periodic).unwrap();
    let cfg = TransparentRunConfig::new(64, 1.0, 5, 9);
    assert_eq!(
        transparent_curve(&cfg).unwrap(),
        ensemble_run(&lat, 5, &cfg.p_grid, 9, 0).unwrap()
    );
}
