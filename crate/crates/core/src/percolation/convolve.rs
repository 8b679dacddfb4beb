//! Microcanonical to canonical conversion.
//!
//! For `M` trials and probability `p` the binomial masses are built outward
//! from the mode with the ratio recurrence
//! `B(n+1)/B(n) = (M-n)/(n+1) * p/(1-p)`, starting from an unnormalised mode
//! weight of one, and normalised by their sum. No factorials or powers of
//! `M` are formed, so the scheme is stable for `M` in the tens of millions.
//!
//! The window always covers `mean +/- 8 sigma` and is widened until edge
//! weights fall below `1e-20` of the mode; masses beyond it are bounded by the
//! geometric series of the edge ratios and reported as `tail_bound`.

use super::sweep::MicrocanonicalCurve;
use super::CanonicalCurve;
use crate::error::{check_probability, Result};

const EDGE_CUTOFF: f64 = 1e-20;
const SIGMA_SPAN: f64 = 8.0;

/// Normalised binomial masses on `start..start + weights.len()`.
#[derive(Debug, Clone)]
pub struct BinomialWindow {
    pub start: usize,
    pub weights: Vec<f64>,
    /// Upper bound on the probability mass outside the window.
    pub tail_bound: f64,
}

impl BinomialWindow {
    pub fn new(trials: usize, p: f64) -> Self {
        let m = trials;
        if p <= 0.0 {
            return Self::point(0);
        }
        if p >= 1.0 {
            return Self::point(m);
        }
        let odds = p / (1.0 - p);
        let mode = (((m + 1) as f64) * p).floor().min(m as f64) as usize;
        let sigma = (m as f64 * p * (1.0 - p)).sqrt();
        let mean = m as f64 * p;
        let span_lo = (mean - SIGMA_SPAN * sigma).floor().max(0.0) as usize;
        let span_hi = ((mean + SIGMA_SPAN * sigma).ceil() as usize).min(m);

        let mut upper = Vec::new();
        let mut w = 1.0f64;
        let mut n = mode;
        let mut upper_ratio = 0.0;
        while n < m {
            let ratio = (m - n) as f64 / (n + 1) as f64 * odds;
            if n >= span_hi && w < EDGE_CUTOFF {
                upper_ratio = ratio;
                break;
            }
            w *= ratio;
            n += 1;
            upper.push(w);
        }
        let hi = n;

        let mut lower = Vec::new();
        let mut w = 1.0f64;
        let mut n = mode;
        let mut lower_ratio = 0.0;
        while n > 0 {
            let ratio = n as f64 / (m - n + 1) as f64 / odds;
            if n <= span_lo && w < EDGE_CUTOFF {
                lower_ratio = ratio;
                break;
            }
            w *= ratio;
            n -= 1;
            lower.push(w);
        }
        let lo = n;

        let mut weights = Vec::with_capacity(hi - lo + 1);
        weights.extend(lower.iter().rev());
        weights.push(1.0);
        weights.extend(upper.iter());
        let sum: f64 = weights.iter().sum();
        for x in &mut weights {
            *x /= sum;
        }

        let geometric = |edge: f64, r: f64| if r > 0.0 { edge * r / (1.0 - r) } else { 0.0 };
        let tail_bound = if lo > 0 {
            geometric(weights[0], lower_ratio)
        } else {
            0.0
        } + if hi < m {
            geometric(*weights.last().unwrap(), upper_ratio)
        } else {
            0.0
        };

        BinomialWindow {
            start: lo,
            weights,
            tail_bound,
        }
    }

    fn point(n: usize) -> Self {
        BinomialWindow {
            start: n,
            weights: vec![1.0],
            tail_bound: 0.0,
        }
    }

    pub fn end(&self) -> usize {
        self.start + self.weights.len()
    }

    /// `sum_n B(n) * values[n]` over the window.
    pub fn expectation(&self, values: &[f64]) -> f64 {
        self.weights
            .iter()
            .zip(&values[self.start..self.end()])
            .map(|(w, v)| w * v)
            .sum()
    }

    /// `sum_n B(n) * counts[n] * scale`, for integer-valued curves.
    pub fn expectation_counts(&self, counts: &[u32], scale: f64) -> f64 {
        let s: f64 = self
            .weights
            .iter()
            .zip(&counts[self.start..self.end()])
            .map(|(w, &c)| w * c as f64)
            .sum();
        s * scale
    }

    /// `P(X >= k)`.
    pub fn upper_tail(&self, k: usize) -> f64 {
        if k <= self.start {
            return 1.0;
        }
        if k >= self.end() {
            return 0.0;
        }
        self.weights[k - self.start..].iter().sum()
    }
}

/// Probability that `Binomial(trials, p)` reaches `k`.
pub fn binomial_upper_tail(trials: usize, p: f64, k: usize) -> f64 {
    BinomialWindow::new(trials, p).upper_tail(k)
}

/// Canonical (fixed-`p`) view of a single sweep.
///
/// The result is a one-replica [`CanonicalCurve`]; standard errors are zero.
pub fn convolve_binomial(curve: &MicrocanonicalCurve, p_grid: &[f64]) -> Result<CanonicalCurve> {
    let sample = ReplicaCanonical::from_curve(curve, p_grid)?;
    Ok(CanonicalCurve::from_replicas(
        p_grid,
        curve.nodes,
        &[sample],
    ))
}

/// Per-replica canonical values, before ensemble averaging.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicaCanonical {
    pub f_lcc: Vec<f64>,
    /// `None` when the sweep had no winding information.
    pub wrap: Option<Vec<f64>>,
}

impl ReplicaCanonical {
    pub fn from_curve(curve: &MicrocanonicalCurve, p_grid: &[f64]) -> Result<Self> {
        let steps = curve.steps();
        let scale = 1.0 / curve.nodes as f64;
        let mut f_lcc = Vec::with_capacity(p_grid.len());
        let mut wrap = curve.wrap.map(|_| Vec::with_capacity(p_grid.len()));
        for &p in p_grid {
            check_probability("p", p, true)?;
            let window = BinomialWindow::new(steps, p);
            debug_assert!(window.tail_bound < 1e-10);
            f_lcc.push(window.expectation_counts(&curve.lcc, scale));
            if let (Some(w), Some(events)) = (wrap.as_mut(), curve.wrap) {
                w.push(match events.any {
                    Some(k) => window.upper_tail(k as usize),
                    None => 0.0,
                });
            }
        }
        Ok(ReplicaCanonical { f_lcc, wrap })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Binomial pmf from log-factorial sums, independent of the recurrence.
    fn pmf_oracle(m: usize, n: usize, p: f64) -> f64 {
        let ln_fact = |k: usize| (1..=k).map(|i| (i as f64).ln()).sum::<f64>();
        let ln = ln_fact(m) - ln_fact(n) - ln_fact(m - n)
            + n as f64 * p.ln()
            + (m - n) as f64 * (1.0 - p).ln();
        ln.exp()
    }

    #[test]
    fn matches_log_factorial_oracle() {
        for &(m, p) in &[(10usize, 0.3), (200, 0.5), (5000, 0.02), (5000, 0.97)] {
            let w = BinomialWindow::new(m, p);
            for (i, &x) in w.weights.iter().enumerate() {
                let n = w.start + i;
                let exact = pmf_oracle(m, n, p);
                if exact > 1e-12 {
                    assert!(
                        (x - exact).abs() / exact < 1e-9,
                        "m={m} p={p} n={n}: {x} vs {exact}"
                    );
                }
            }
        }
    }

    #[test]
    fn extremes_are_point_masses() {
        let w0 = BinomialWindow::new(100, 0.0);
        assert_eq!((w0.start, w0.weights.as_slice()), (0, &[1.0][..]));
        let w1 = BinomialWindow::new(100, 1.0);
        assert_eq!((w1.start, w1.weights.as_slice()), (100, &[1.0][..]));
    }

    #[test]
    fn window_mass_at_large_m() {
        let m = 18_000_000;
        for &p in &[1e-7, 0.001, 0.3, 0.5, 0.9, 1.0 - 1e-7] {
            let w = BinomialWindow::new(m, p);
            assert!(w.tail_bound < 1e-10, "p={p}: tail {}", w.tail_bound);
            let sigma = (m as f64 * p * (1.0 - p)).sqrt();
            let mean = m as f64 * p;
            assert!(w.start as f64 <= (mean - 8.0 * sigma).max(0.0) + 1.0);
            assert!(w.end() as f64 >= (mean + 8.0 * sigma).min(m as f64));
            let total: f64 = w.weights.iter().sum();
            assert!((total - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn small_mean_keeps_tail_mass() {
        // Poisson-like regime where +/- 8 sigma is narrower than one trial
        let w = BinomialWindow::new(1000, 1e-7);
        assert!(w.tail_bound < 1e-10);
        assert!((w.weights[0] - (1.0f64 - 1e-7).powi(1000)).abs() < 1e-12);
    }

    #[test]
    fn upper_tail_oracle() {
        let (m, p) = (60usize, 0.35);
        for k in [0usize, 10, 21, 30, 61] {
            let exact: f64 = (k.min(m + 1)..=m).map(|n| pmf_oracle(m, n, p)).sum();
            assert!(
                (binomial_upper_tail(m, p, k) - exact).abs() < 1e-12,
                "k={k}"
            );
        }
    }

    #[test]
    fn mean_of_identity_curve() {
        let m = 1000;
        let values: Vec<f64> = (0..=m).map(|n| n as f64).collect();
        for &p in &[0.1, 0.5, 0.77] {
            let w = BinomialWindow::new(m, p);
            assert!((w.expectation(&values) - m as f64 * p).abs() < 1e-8);
        }
    }
}
