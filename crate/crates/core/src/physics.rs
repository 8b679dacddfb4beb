//! Device parameters and the closed-form maps between entanglement time and
//! bond probability.
//!
//! Each node serialises its attempts round-robin over its `d` neighbours, one
//! attempt every `t0`, so after time `t` a given bond has seen `t / (t0 d)`
//! attempts and exists with probability `1 - (1 - p0)^(t / (t0 d))`.
//! All times are in seconds.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Photon collection scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    BullseyeSil,
    Waveguide,
    Cavity,
    Custom,
}

impl Scheme {
    pub const PRESETS: [Scheme; 3] = [Scheme::BullseyeSil, Scheme::Waveguide, Scheme::Cavity];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::BullseyeSil => "bullseye_sil",
            Scheme::Waveguide => "waveguide",
            Scheme::Cavity => "cavity",
            Scheme::Custom => "custom",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bullseye_sil" | "bullseye" | "sil" => Ok(Scheme::BullseyeSil),
            "waveguide" => Ok(Scheme::Waveguide),
            "cavity" => Ok(Scheme::Cavity),
            "custom" => Ok(Scheme::Custom),
            other => Err(Error::InvalidParameter(format!("unknown scheme '{other}'"))),
        }
    }
}

/// Attempt period shared by all presets (initialisation included).
pub const DEFAULT_T0: f64 = 5e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    /// Bell-measurement success probability per attempt.
    pub p0: f64,
    /// Attempt period in seconds.
    pub t0: f64,
    /// Single-photon efficiency, when `p0` was derived from it.
    pub eta: Option<f64>,
    pub scheme: Scheme,
    /// Transmission per transparent node traversed. Bond success is taken as
    /// independent of length, so this stays at 1 unless set explicitly.
    pub hop_transmission: f64,
}

impl PhysicalParams {
    pub fn preset(scheme: Scheme) -> Result<Self> {
        let p0 = match scheme {
            Scheme::BullseyeSil => 5e-5,
            Scheme::Waveguide => 2e-4,
            Scheme::Cavity => 5e-2,
            Scheme::Custom => {
                return Err(Error::InvalidParameter(
                    "custom scheme has no preset".into(),
                ))
            }
        };
        Ok(PhysicalParams {
            p0,
            t0: DEFAULT_T0,
            eta: None,
            scheme,
            hop_transmission: 1.0,
        })
    }

    pub fn custom(p0: f64, t0: f64) -> Result<Self> {
        let params = PhysicalParams {
            p0,
            t0,
            eta: None,
            scheme: Scheme::Custom,
            hop_transmission: 1.0,
        };
        params.validate()?;
        Ok(params)
    }

    /// Heralding probability `p0 = eta^2 / 2` for two-photon detection.
    pub fn from_eta(eta: f64, t0: f64) -> Result<Self> {
        if !(eta > 0.0 && eta <= 1.0) {
            return Err(Error::InvalidProbability {
                name: "eta",
                value: eta,
                range: "(0, 1]",
            });
        }
        let mut params = Self::custom(eta * eta / 2.0, t0)?;
        params.eta = Some(eta);
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p0 > 0.0 && self.p0 < 1.0) {
            return Err(Error::InvalidProbability {
                name: "p0",
                value: self.p0,
                range: "(0, 1)",
            });
        }
        if !(self.t0 > 0.0 && self.t0.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "t0 must be positive, got {}",
                self.t0
            )));
        }
        if let Some(eta) = self.eta {
            let expected = eta * eta / 2.0;
            if ((self.p0 - expected) / expected).abs() > 1e-12 {
                return Err(Error::InvalidParameter(format!(
                    "p0 = {} inconsistent with eta = {eta} (eta^2/2 = {expected})",
                    self.p0
                )));
            }
        }
        if !(self.hop_transmission > 0.0 && self.hop_transmission <= 1.0) {
            return Err(Error::InvalidProbability {
                name: "hop_transmission",
                value: self.hop_transmission,
                range: "(0, 1]",
            });
        }
        Ok(())
    }

    /// Per-attempt success for a bond routed through `hops` transparent nodes.
    pub fn p0_for_hops(&self, hops: u32) -> f64 {
        self.p0 * self.hop_transmission.powi(2 * hops as i32)
    }
}

/// How fractional attempt counts are treated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttemptCounting {
    /// `t / (t0 d)` used as is.
    #[default]
    Continuous,
    /// Only completed attempts count: `floor(t / (t0 d))`.
    Discrete,
}

fn check_degree(d: usize) -> Result<()> {
    if d == 0 {
        return Err(Error::InvalidParameter("degree must be at least 1".into()));
    }
    Ok(())
}

/// Bond probability after entangling for `t` seconds on a degree-`d` lattice.
pub fn bond_prob_from_time(t: f64, params: &PhysicalParams, d: usize) -> Result<f64> {
    bond_prob_from_time_with(t, params, d, AttemptCounting::Continuous)
}

pub fn bond_prob_from_time_with(
    t: f64,
    params: &PhysicalParams,
    d: usize,
    counting: AttemptCounting,
) -> Result<f64> {
    params.validate()?;
    check_degree(d)?;
    if t.is_nan() || t < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "time must be non-negative, got {t}"
        )));
    }
    let mut attempts = t / (params.t0 * d as f64);
    if counting == AttemptCounting::Discrete {
        attempts = attempts.floor();
    }
    Ok(-(attempts * (-params.p0).ln_1p()).exp_m1())
}

/// Time at which the bond probability reaches `p_c`; the exact inverse of
/// [`bond_prob_from_time`].
pub fn time_to_threshold(p_c: f64, params: &PhysicalParams, d: usize) -> Result<f64> {
    params.validate()?;
    check_degree(d)?;
    if !(0.0..1.0).contains(&p_c) {
        return Err(Error::InvalidProbability {
            name: "p_c",
            value: p_c,
            range: "[0, 1)",
        });
    }
    Ok(params.t0 * d as f64 * (-p_c).ln_1p() / (-params.p0).ln_1p())
}

/// Minimum time to a universal resource without feed-forward,
/// `-t0 / ln(1 - p0)`: the infinite-degree limit of [`degree_bound_time`].
pub fn threshold_time_lower_bound(params: &PhysicalParams) -> Result<f64> {
    params.validate()?;
    Ok(-params.t0 / (-params.p0).ln_1p())
}

/// Threshold time on a degree-`d` lattice saturating `p_c >= 1/(d-1)` (the
/// Bethe lattice). Needs `d >= 3`.
pub fn degree_bound_time(params: &PhysicalParams, d: usize) -> Result<f64> {
    if d < 3 {
        return Err(Error::InvalidParameter(format!(
            "degree bound needs d >= 3, got {d}"
        )));
    }
    time_to_threshold(1.0 / (d as f64 - 1.0), params, d)
}

/// Parse a duration such as `5us`, `5µs`, `69.31ms`, `0.5s` or a bare number
/// of seconds.
pub fn parse_seconds(text: &str) -> Result<f64> {
    let s = text.trim();
    // divide rather than multiply so "5us" is exactly 5e-6
    let (number, per_second) = [
        ("ns", 1e9),
        ("us", 1e6),
        ("µs", 1e6),
        ("μs", 1e6),
        ("ms", 1e3),
        ("s", 1.0),
    ]
    .iter()
    .find_map(|(suffix, div)| s.strip_suffix(suffix).map(|n| (n.trim(), *div)))
    .unwrap_or((s, 1.0));
    let value: f64 = number
        .parse()
        .map_err(|_| Error::InvalidParameter(format!("cannot parse duration '{text}'")))?;
    if !value.is_finite() || value < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "invalid duration '{text}'"
        )));
    }
    Ok(value / per_second)
}
