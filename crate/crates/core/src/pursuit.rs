//! Subspace pursuit with side information (SIPP) and the plain subspace
//! pursuit (SP) baseline.

use crate::error::{Error, Result};
use crate::math::lstsq::least_squares_step;
use crate::math::{norm2, supp_select, supp_select_within, DenseMatrix, SupportSet};

#[derive(Clone, Debug, PartialEq)]
pub struct SippOptions {
    pub max_inner: usize,
    /// Stop as soon as the support estimate repeats. The iteration is a
    /// deterministic function of the previous support, so this never changes
    /// the output.
    pub fixed_point_stop: bool,
}

impl Default for SippOptions {
    fn default() -> Self {
        SippOptions { max_inner: 50, fixed_point_stop: true }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StopReason {
    ResidualIncrease,
    MaxIterations,
    FixedPoint,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SippResult {
    pub x_hat: Vec<f64>,
    pub support: SupportSet,
    pub residual: Vec<f64>,
    pub residual_norm: f64,
    pub iterations_used: usize,
    pub stop_reason: StopReason,
}

/// Every intermediate of one inner iteration `l`.
#[derive(Clone, Debug, PartialEq)]
pub struct SippIterationState {
    pub l: usize,
    /// Support and residual norm entering the iteration.
    pub prev_support: SupportSet,
    pub prev_residual_norm: f64,
    /// Matched-filter picks.
    pub t_grave: SupportSet,
    pub u_tilde: SupportSet,
    pub x_tilde: Vec<f64>,
    pub t_acute: SupportSet,
    pub u_check: SupportSet,
    pub x_check: Vec<f64>,
    pub t_hat: SupportSet,
    pub x_hat: Vec<f64>,
    pub r: Vec<f64>,
    pub residual_norm: f64,
    /// False for the final iterate rejected by the residual test.
    pub accepted: bool,
}

/// Keeps the `m` members of `set` with the largest `|scores|`.
fn cap_columns(set: SupportSet, scores: &[f64], m: usize, what: &str) -> Result<SupportSet> {
    if set.len() <= m {
        return Ok(set);
    }
    log::warn!("{what} has {} columns but only {m} measurements; keeping the {m} best matched-filter scores", set.len());
    supp_select_within(scores, &set, m)
}

fn check_inputs(y: &[f64], a: &DenseMatrix, t: usize, t_si: &SupportSet) -> Result<()> {
    if y.len() != a.rows() {
        return Err(Error::invalid(format!("y has length {} but A has {} rows", y.len(), a.rows())));
    }
    if t == 0 || t > a.cols() {
        return Err(Error::invalid(format!("sparsity {t} must lie in 1..={}", a.cols())));
    }
    if !t_si.is_empty() && t_si.len() != t {
        return Err(Error::invalid(format!("side information has {} indices, expected 0 or {t}", t_si.len())));
    }
    t_si.check_bound(a.cols())?;
    if t > a.rows() {
        return Err(Error::Singular { step: "setup", support: SupportSet::full(t) });
    }
    Ok(())
}

fn run(
    y: &[f64],
    a: &DenseMatrix,
    t: usize,
    t_si: &SupportSet,
    opts: &SippOptions,
    mut trace: Option<&mut Vec<SippIterationState>>,
) -> Result<SippResult> {
    check_inputs(y, a, t, t_si)?;
    if opts.max_inner == 0 {
        return Err(Error::invalid("max_inner must be at least 1"));
    }
    let m = a.rows();

    let mut support = SupportSet::empty();
    let mut x_hat = vec![0.0; a.cols()];
    let mut r = y.to_vec();
    let mut r_norm = norm2(y);
    let mut l = 0;

    let stop_reason = loop {
        if l == opts.max_inner {
            break StopReason::MaxIterations;
        }
        l += 1;
        let scores = a.tr_mul_vec(&r);
        let t_grave = supp_select(&scores, t)?;
        let u_tilde = cap_columns(t_grave.union(&support), &scores, m, "merged set")?;
        let x_tilde = least_squares_step(a, y, &u_tilde, "merge")?;
        let t_acute = supp_select_within(&x_tilde, &u_tilde, t)?;
        let u_check = cap_columns(t_acute.union(t_si), &scores, m, "side-information set")?;
        let x_check = least_squares_step(a, y, &u_check, "side_information")?;
        let t_hat = supp_select_within(&x_check, &u_check, t)?;
        let x_new = least_squares_step(a, y, &t_hat, "final")?;
        let mut r_new = a.mul_sparse(&x_new, &t_hat);
        for (ri, yi) in r_new.iter_mut().zip(y) {
            *ri = yi - *ri;
        }
        let r_new_norm = norm2(&r_new);
        let accepted = r_new_norm <= r_norm;
        let repeated = t_hat == support;

        if let Some(tr) = trace.as_deref_mut() {
            tr.push(SippIterationState {
                l,
                prev_support: support.clone(),
                prev_residual_norm: r_norm,
                t_grave,
                u_tilde,
                x_tilde,
                t_acute,
                u_check,
                x_check,
                t_hat: t_hat.clone(),
                x_hat: x_new.clone(),
                r: r_new.clone(),
                residual_norm: r_new_norm,
                accepted,
            });
        }

        if !accepted {
            // keep the previous, better iterate
            l -= 1;
            break StopReason::ResidualIncrease;
        }
        support = t_hat;
        x_hat = x_new;
        r = r_new;
        r_norm = r_new_norm;
        if repeated && opts.fixed_point_stop {
            break StopReason::FixedPoint;
        }
    };

    Ok(SippResult {
        x_hat,
        support,
        residual: r,
        residual_norm: r_norm,
        iterations_used: l,
        stop_reason,
    })
}

/// Recovers a `t`-sparse `x` from `y = A x + e` using the side-information
/// support `t_si`, which must be empty or have exactly `t` indices.
pub fn sipp_run(y: &[f64], a: &DenseMatrix, t: usize, t_si: &SupportSet, opts: &SippOptions) -> Result<SippResult> {
    run(y, a, t, t_si, opts, None)
}

/// [`sipp_run`] that also returns every computed iteration, including a
/// final rejected one.
pub fn sipp_run_traced(
    y: &[f64],
    a: &DenseMatrix,
    t: usize,
    t_si: &SupportSet,
    opts: &SippOptions,
) -> Result<(SippResult, Vec<SippIterationState>)> {
    let mut trace = Vec::new();
    let res = run(y, a, t, t_si, opts, Some(&mut trace))?;
    Ok((res, trace))
}

/// Subspace pursuit: SIPP without side information.
pub fn sp_run(y: &[f64], a: &DenseMatrix, t: usize, opts: &SippOptions) -> Result<SippResult> {
    sipp_run(y, a, t, &SupportSet::empty(), opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::sub;
    use crate::rng::{self, Domain};
    use crate::signal::{gen_matrix, gen_noise, gen_signal, sample_subset, SignalKind, Smnr};

    struct Instance {
        a: DenseMatrix,
        x: Vec<f64>,
        support: SupportSet,
        y: Vec<f64>,
    }

    fn instance(n: usize, m: usize, t: usize, smnr: Smnr, seed: u64) -> Instance {
        let mut r = rng::stream(seed, Domain::Trial, &[n as u64, m as u64, t as u64]);
        let a = gen_matrix(m, n, &mut r).unwrap();
        let pool: Vec<usize> = (0..n).collect();
        let s = sample_subset(&pool, t, &mut r).unwrap();
        let sig = gen_signal(n, &SupportSet::empty(), &s, SignalKind::Gaussian, &mut r).unwrap();
        let e = gen_noise(t, m, smnr, &mut r);
        let mut y = a.mul_vec(&sig.values);
        y.iter_mut().zip(&e).for_each(|(v, ei)| *v += ei);
        Instance { a, x: sig.values, support: s, y }
    }

    #[test]
    fn true_side_information_gives_exact_recovery() {
        for seed in 0..20 {
            let inst = instance(100, 40, 8, Smnr::Clean, seed);
            let res = sipp_run(&inst.y, &inst.a, 8, &inst.support, &SippOptions::default()).unwrap();
            let err = norm2(&sub(&inst.x, &res.x_hat));
            assert!(err <= 1e-8 * norm2(&inst.x), "seed {seed}: error {err}");
            assert_eq!(res.support, inst.support);
        }
    }

    #[test]
    fn sp_wrapper_is_bitwise_identical() {
        for seed in 0..100 {
            let inst = instance(60, 24, 4, Smnr::Db(20.0), seed);
            let a = sp_run(&inst.y, &inst.a, 4, &SippOptions::default()).unwrap();
            let b = sipp_run(&inst.y, &inst.a, 4, &SupportSet::empty(), &SippOptions::default()).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn sp_recovers_clean_signals() {
        let trials = 100;
        let exact = (0..trials)
            .filter(|&seed| {
                let inst = instance(200, 80, 10, Smnr::Clean, 1000 + seed);
                let res = sp_run(&inst.y, &inst.a, 10, &SippOptions::default()).unwrap();
                norm2(&sub(&inst.x, &res.x_hat)) <= 1e-6 * norm2(&inst.x)
            })
            .count();
        assert!(exact as f64 >= 0.99 * trials as f64, "exact recoveries {exact}");
    }

    #[test]
    fn too_few_measurements_is_a_rank_error() {
        let inst = instance(20, 3, 2, Smnr::Clean, 1);
        assert!(matches!(sp_run(&inst.y, &inst.a, 5, &SippOptions::default()), Err(Error::Singular { .. })));
    }

    #[test]
    fn invalid_side_information() {
        let inst = instance(20, 10, 2, Smnr::Clean, 1);
        let bad = SupportSet::from_indices([1]);
        assert!(matches!(
            sipp_run(&inst.y, &inst.a, 2, &bad, &SippOptions::default()),
            Err(Error::InvalidArgument(_))
        ));
        assert!(sipp_run(&inst.y, &inst.a, 0, &SupportSet::empty(), &SippOptions::default()).is_err());
        assert!(sipp_run(&inst.y[..5], &inst.a, 2, &SupportSet::empty(), &SippOptions::default()).is_err());
    }

    #[test]
    fn fixed_point_stop_does_not_change_output() {
        for seed in 0..30 {
            let inst = instance(80, 30, 6, Smnr::Db(10.0), seed);
            let fast = sp_run(&inst.y, &inst.a, 6, &SippOptions::default()).unwrap();
            let slow = sp_run(&inst.y, &inst.a, 6, &SippOptions { fixed_point_stop: false, ..Default::default() }).unwrap();
            assert_eq!(fast.support, slow.support);
            assert_eq!(fast.x_hat, slow.x_hat);
        }
    }

    #[test]
    fn max_iterations_respected() {
        let inst = instance(80, 30, 6, Smnr::Db(10.0), 3);
        let res = sp_run(&inst.y, &inst.a, 6, &SippOptions { max_inner: 1, fixed_point_stop: false }).unwrap();
        assert_eq!(res.iterations_used, 1);
        assert_eq!(res.stop_reason, StopReason::MaxIterations);
    }

    #[test]
    fn trace_matches_result() {
        let inst = instance(80, 30, 6, Smnr::Db(5.0), 8);
        let si = SupportSet::from_indices(inst.support.iter().take(3).chain([0, 1, 2]));
        let si = if si.len() == 6 { si } else { SupportSet::empty() };
        let (res, trace) = sipp_run_traced(&inst.y, &inst.a, 6, &si, &SippOptions::default()).unwrap();
        let last_accepted = trace.iter().rev().find(|s| s.accepted).unwrap();
        assert_eq!(last_accepted.t_hat, res.support);
        assert_eq!(last_accepted.l, res.iterations_used);
        for st in &trace {
            assert_eq!(st.t_hat.len(), 6);
            assert!(st.u_tilde.len() <= 12 && st.u_check.len() <= 12);
            assert!(st.t_acute.is_subset(&st.u_tilde));
            assert!(st.t_hat.is_subset(&st.u_check));
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(48))]

            #[test]
            fn returned_iterate_is_the_best_visited(seed in any::<u64>(), snr in -5.0f64..30.0, with_si in any::<bool>()) {
                let (n, m, t) = (60, 20, 4);
                let inst = instance(n, m, t, Smnr::Db(snr), seed);
                let si = if with_si {
                    // a partially wrong side-information set
                    let wrong: Vec<usize> = (0..n).filter(|i| !inst.support.contains(*i)).take(2).collect();
                    SupportSet::from_indices(inst.support.iter().take(t - 2).chain(wrong))
                } else {
                    SupportSet::empty()
                };
                let (res, trace) = sipp_run_traced(&inst.y, &inst.a, t, &si, &SippOptions::default()).unwrap();
                prop_assert_eq!(res.support.len(), t);
                for st in &trace {
                    prop_assert!(res.residual_norm <= st.residual_norm);
                }
                let r = sub(&inst.y, &inst.a.mul_vec(&res.x_hat));
                prop_assert!((norm2(&r) - res.residual_norm).abs() <= 1e-10 * res.residual_norm.max(1e-300));
                let g = inst.a.tr_mul_vec(&r);
                let aty = norm2(&inst.a.tr_mul_vec(&inst.y));
                let on_support: f64 = res.support.iter().map(|j| g[j] * g[j]).sum::<f64>().sqrt();
                prop_assert!(on_support <= 1e-8 * aty);
                if res.stop_reason == StopReason::ResidualIncrease {
                    let rejected = trace.last().unwrap();
                    prop_assert!(!rejected.accepted);
                    prop_assert!(res.residual_norm < rejected.residual_norm);
                }
                for i in 0..n {
                    if !res.support.contains(i) {
                        prop_assert_eq!(res.x_hat[i], 0.0);
                    }
                }
            }
        }
    }
}
