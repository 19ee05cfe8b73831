//! Vote-based support fusion: consensus builds the jointly supported set
//! `Ĵ`, expansion pads it back to `T` indices of side information.

use std::str::FromStr;

use crate::error::{Error, Result};
use crate::math::{norm_on, supp_select_within, SupportSet, VoteVector};

/// Minimum number of votes for an index to enter `Ĵ`.
pub const VOTE_THRESHOLD: u32 = 2;

/// How to cut `Ĵ` down to `T` indices when more qualify.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Truncation {
    /// Lowest indices first.
    #[default]
    Lexicographic,
    /// Most votes first, then lowest index.
    ByVotes,
}

impl FromStr for Truncation {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "lexicographic" | "lex" => Ok(Truncation::Lexicographic),
            "votes" | "by_votes" => Ok(Truncation::ByVotes),
            other => Err(Error::Config(format!("unknown truncation rule '{other}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FusionOutput {
    pub j_hat: SupportSet,
    pub i_hat: SupportSet,
    pub t_si: SupportSet,
}

/// Votes once for every index of `own` and of each neighbor support, and
/// keeps indices with at least two votes.
pub fn consensus(neighbors: &[SupportSet], own: &SupportSet, t: usize, n: usize) -> Result<SupportSet> {
    consensus_with(neighbors, own, t, n, Truncation::Lexicographic)
}

pub fn consensus_with(
    neighbors: &[SupportSet],
    own: &SupportSet,
    t: usize,
    n: usize,
    rule: Truncation,
) -> Result<SupportSet> {
    let mut votes = VoteVector::zeros(n);
    for s in std::iter::once(own).chain(neighbors) {
        if s.len() != t {
            return Err(Error::invalid(format!("support of size {} in consensus, expected {t}", s.len())));
        }
        votes.accumulate(s)?;
    }
    let counts = votes.counts();
    let mut qualified: Vec<usize> = (0..n).filter(|&i| counts[i] >= VOTE_THRESHOLD).collect();
    if qualified.len() > t {
        if rule == Truncation::ByVotes {
            qualified.sort_by(|&a, &b| counts[b].cmp(&counts[a]).then(a.cmp(&b)));
        }
        qualified.truncate(t);
    }
    Ok(SupportSet::from_indices(qualified))
}

/// Pads `j_hat` with the `T - |Ĵ|` largest entries of `x_prev` outside `Ĵ`.
pub fn expansion(j_hat: &SupportSet, x_prev: &[f64], t: usize) -> Result<FusionOutput> {
    if j_hat.len() > t {
        return Err(Error::invalid(format!("|Ĵ| = {} exceeds T = {t}", j_hat.len())));
    }
    if t > x_prev.len() {
        return Err(Error::invalid(format!("T = {t} exceeds signal length {}", x_prev.len())));
    }
    j_hat.check_bound(x_prev.len())?;
    let rest = j_hat.complement(x_prev.len());
    let i_hat = supp_select_within(x_prev, &rest, t - j_hat.len())?;
    let t_si = i_hat.union(j_hat);
    Ok(FusionOutput { j_hat: j_hat.clone(), i_hat, t_si })
}

#[derive(Clone, Debug, PartialEq)]
pub struct AssumptionReport {
    /// `‖x_Ĵ‖²`.
    pub energy_j_hat: f64,
    /// `‖x_{T̂ \ Î}‖²`, the energy of the discarded estimate indices.
    pub energy_discarded: f64,
    /// `‖x_Ĵ‖² >= ‖x_{T̂ \ Î}‖²`.
    pub energy_dominates: bool,
    /// Fraction of `Ĵ` inside the true support, `None` when `Ĵ` is empty.
    pub j_hat_precision: Option<f64>,
    pub t_hat_precision: f64,
    /// `Ĵ` is at least as precise as `T̂` (vacuously true for empty `Ĵ`).
    pub reliability: bool,
}

fn precision(s: &SupportSet, truth: &SupportSet) -> f64 {
    s.intersection(truth).len() as f64 / s.len() as f64
}

/// Measures the energy and reliability conditions of one fusion step.
pub fn assumption_checks(
    x_true: &[f64],
    true_support: &SupportSet,
    t_hat: &SupportSet,
    i_hat: &SupportSet,
    j_hat: &SupportSet,
) -> AssumptionReport {
    let energy_j_hat = norm_on(x_true, j_hat).powi(2);
    let energy_discarded = norm_on(x_true, &t_hat.difference(i_hat)).powi(2);
    let j_hat_precision = (!j_hat.is_empty()).then(|| precision(j_hat, true_support));
    let t_hat_precision = if t_hat.is_empty() { 0.0 } else { precision(t_hat, true_support) };
    AssumptionReport {
        energy_j_hat,
        energy_discarded,
        energy_dominates: energy_j_hat >= energy_discarded,
        j_hat_precision,
        t_hat_precision,
        reliability: j_hat_precision.is_none_or(|p| p >= t_hat_precision),
    }
}
