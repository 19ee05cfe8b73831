//! RIP-based recurrence constants and performance bounds.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Which noise constant to use. The squared form `4(1+δ²)/(1-δ)³` comes out
/// of the SIPP recurrence; the linear form `4(1+δ)/(1-δ)³` is the looser
/// constant used for the distributed recurrence.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CVariant {
    Squared,
    Linear,
}

impl CVariant {
    pub fn as_str(self) -> &'static str {
        match self {
            CVariant::Squared => "squared",
            CVariant::Linear => "linear",
        }
    }
}

impl fmt::Display for CVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CVariant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "squared" => Ok(CVariant::Squared),
            "linear" => Ok(CVariant::Linear),
            other => Err(Error::Config(format!("unknown c variant '{other}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundConstants {
    pub delta: f64,
    pub variant: CVariant,
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

pub fn a_sipp(delta: f64) -> f64 {
    delta * (1.0 + delta).powi(2) / (1.0 - delta).powi(4)
}

pub fn b_sipp(delta: f64) -> f64 {
    (1.0 + delta) / (2.0 * (1.0 - delta))
}

pub fn c_sipp(delta: f64, variant: CVariant) -> f64 {
    let num = match variant {
        CVariant::Squared => 1.0 + delta * delta,
        CVariant::Linear => 1.0 + delta,
    };
    4.0 * num / (1.0 - delta).powi(3)
}

pub fn bound_constants(delta: f64, variant: CVariant) -> Result<BoundConstants> {
    if !(0.0..1.0).contains(&delta) {
        return Err(Error::invalid(format!("delta_3T = {delta} outside [0, 1)")));
    }
    Ok(BoundConstants { delta, variant, a: a_sipp(delta), b: b_sipp(delta), c: c_sipp(delta, variant) })
}

/// Root of `1 - 5r + 4r² - 5r³ + r⁴` in `(0, 1)`, where `a_sipp(r) = 1`.
pub fn convergence_root() -> f64 {
    let f = |r: f64| 1.0 - 5.0 * r + 4.0 * r * r - 5.0 * r.powi(3) + r.powi(4);
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while hi - lo > 1e-15 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LStarMode {
    /// `l* = ceil(log(‖e‖/‖x‖) / log a)` iterations.
    Finite,
    /// `l* → ∞`.
    Infinite,
}

/// Coefficients of the SIPP bounds
/// `‖x_{T̂^c}‖ <= support_si·‖x_{T_si^c}‖ + support_noise·‖e‖` and
/// `‖x - x̂‖ <= signal_si·‖x_{T_si^c}‖ + signal_noise·‖e‖`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SippBound {
    pub constants: BoundConstants,
    pub mode: LStarMode,
    pub feasible: bool,
    pub support_si: f64,
    pub support_noise: f64,
    pub signal_si: f64,
    pub signal_noise: f64,
}

pub fn sipp_bound(k: &BoundConstants, mode: LStarMode) -> SippBound {
    let (a, b, c, d) = (k.a, k.b, k.c, k.delta);
    let feasible = a < 1.0;
    let (support_si, support_noise, signal_si, signal_noise) = if feasible {
        let noise = match mode {
            LStarMode::Finite => 1.0 - a + c,
            LStarMode::Infinite => c,
        };
        (
            b / (1.0 - a),
            noise / (1.0 - a),
            b / ((1.0 - d) * (1.0 - a)),
            noise / ((1.0 - d) * (1.0 - a)) + 1.0 / (1.0 - d).sqrt(),
        )
    } else {
        (f64::INFINITY, f64::INFINITY, f64::INFINITY, f64::INFINITY)
    };
    SippBound { constants: *k, mode, feasible, support_si, support_noise, signal_si, signal_noise }
}

/// Coefficients of the DIPP bounds `‖x_{T̂^c}‖ <= support_noise·‖e‖` and
/// `‖x - x̂‖ <= signal_noise·‖e‖`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DippBound {
    pub constants: BoundConstants,
    pub a_co: f64,
    /// `a_co·b / (1 - a)`.
    pub rate: f64,
    pub feasible: bool,
    pub support_noise: f64,
    pub signal_noise: f64,
}

pub fn dipp_bound(k: &BoundConstants, a_co: f64) -> Result<DippBound> {
    if !(0.0..=1.0).contains(&a_co) {
        return Err(Error::invalid(format!("a_co = {a_co} outside [0, 1]")));
    }
    let (a, b, c, d) = (k.a, k.b, k.c, k.delta);
    let rate = if a < 1.0 { a_co * b / (1.0 - a) } else { f64::INFINITY };
    let feasible = a < 1.0 && rate < 1.0;
    let (support_noise, signal_noise) = if feasible {
        let denom = 1.0 - a - a_co * b;
        (1.0 + (1.0 - a + c) / denom, (1.0 - a + c) / ((1.0 - d) * denom) + 2.0 / (1.0 - d))
    } else {
        (f64::INFINITY, f64::INFINITY)
    };
    Ok(DippBound { constants: *k, a_co, rate, feasible, support_noise, signal_noise })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct IterationCount {
    /// `None` when the count is unbounded (noise-free) or undefined.
    pub count: Option<u64>,
    /// `‖e‖/‖x‖ < rate < 1`.
    pub feasible: bool,
}

/// `ceil(log(‖e‖/‖x‖) / log(rate))`, at least 1.
pub fn iteration_count(rate: f64, e_norm: f64, x_norm: f64) -> IterationCount {
    let ratio = e_norm / x_norm;
    let feasible = ratio < rate && rate < 1.0;
    let count = if rate > 0.0 && rate < 1.0 && ratio > 0.0 && ratio.is_finite() {
        Some(((ratio.ln() / rate.ln()).ceil()).max(1.0) as u64)
    } else {
        None
    };
    IterationCount { count, feasible }
}
