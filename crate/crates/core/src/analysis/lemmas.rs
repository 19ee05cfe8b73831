//! Numerical checks of the RIP inequalities behind the recovery guarantees,
//! evaluated on traced SIPP runs and fusion steps with a known `δ_3T`.

use nalgebra::{DMatrix, DVector};

use crate::analysis::bounds::{a_sipp, b_sipp, c_sipp, CVariant};
use crate::error::{Error, Result};
use crate::fusion::{assumption_checks, expansion};
use crate::math::{norm2, norm_off, norm_on, sub, DenseMatrix, SupportSet};
use crate::pursuit::{sipp_run_traced, SippOptions, SippResult};

/// Slack for `lhs <= rhs`: `lhs <= rhs (1 + REL_TOL) + ABS_TOL`.
pub const REL_TOL: f64 = 1e-9;
pub const ABS_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct LemmaCheck {
    pub name: &'static str,
    /// Inner iteration the check refers to, if any.
    pub iteration: Option<usize>,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

impl LemmaCheck {
    fn le(name: &'static str, iteration: Option<usize>, lhs: f64, rhs: f64) -> Self {
        LemmaCheck { name, iteration, lhs, rhs, holds: lhs <= rhs * (1.0 + REL_TOL) + ABS_TOL }
    }

    fn eq(name: &'static str, lhs: f64, rhs: f64) -> Self {
        let holds = (lhs - rhs).abs() <= REL_TOL * lhs.abs().max(rhs.abs()).max(1.0);
        LemmaCheck { name, iteration: None, lhs, rhs, holds }
    }
}

#[derive(Clone, Debug)]
pub struct LemmaSuite {
    pub delta: f64,
    pub result: SippResult,
    pub checks: Vec<LemmaCheck>,
}

impl LemmaSuite {
    pub fn all_hold(&self) -> bool {
        self.checks.iter().all(|c| c.holds)
    }

    pub fn failures(&self) -> impl Iterator<Item = &LemmaCheck> {
        self.checks.iter().filter(|c| !c.holds)
    }
}

fn columns(a: &DenseMatrix, s: &SupportSet) -> DMatrix<f64> {
    let idx = s.as_slice();
    DMatrix::from_fn(a.rows(), idx.len(), |i, j| a.get(i, idx[j]))
}

fn restrict(x: &[f64], s: &SupportSet) -> DVector<f64> {
    DVector::from_iterator(s.len(), s.iter().map(|i| x[i]))
}

fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().svd(false, false).singular_values.iter().cloned().fold(0.0, f64::max)
}

/// Operator-norm and near-orthogonality inequalities on the column set `s`
/// (at most `3T` columns) and the disjoint set `rest`.
fn rip_checks(a: &DenseMatrix, y: &[f64], x: &[f64], s: &SupportSet, rest: &SupportSet, delta: f64, out: &mut Vec<LemmaCheck>) {
    if s.is_empty() {
        return;
    }
    let a_s = columns(a, s);
    let yv = DVector::from_column_slice(y);
    let y_norm = yv.norm();
    out.push(LemmaCheck::le("adjoint_norm", None, (a_s.transpose() * &yv).norm(), (1.0 + delta).sqrt() * y_norm));
    if let Ok(pinv) = a_s.clone().pseudo_inverse(1e-300) {
        out.push(LemmaCheck::le("pseudo_inverse_norm", None, (pinv * &yv).norm(), y_norm / (1.0 - delta).sqrt()));
    }
    let gram = a_s.transpose() * &a_s;
    let v = restrict(x, s);
    let v_norm = v.norm();
    if v_norm > 0.0 {
        let gv = (&gram * &v).norm();
        out.push(LemmaCheck::le("gram_lower", None, (1.0 - delta) * v_norm, gv));
        out.push(LemmaCheck::le("gram_upper", None, gv, (1.0 + delta) * v_norm));
        if let Some(inv) = gram.clone().try_inverse() {
            let iv = (inv * &v).norm();
            out.push(LemmaCheck::le("gram_inverse_lower", None, v_norm / (1.0 + delta), iv));
            out.push(LemmaCheck::le("gram_inverse_upper", None, iv, v_norm / (1.0 - delta)));
        }
    }
    if !rest.is_empty() {
        let cross = a_s.transpose() * columns(a, rest);
        out.push(LemmaCheck::le("near_orthogonality", None, spectral_norm(&cross), delta));
        let tail = norm_on(x, rest);
        let ax = a.mul_sparse(x, rest);
        let proj = a_s.transpose() * DVector::from_vec(ax);
        out.push(LemmaCheck::le("cross_term", None, proj.norm(), delta * tail));
    }
}

/// Runs SIPP on `y = A x + e` with side information `t_si` and checks every
/// inequality of the convergence argument at every inner iteration, using
/// `delta` as the RIP constant of order `3T`. The recurrence uses the
/// squared noise constant.
pub fn lemma_suite(
    a: &DenseMatrix,
    x: &[f64],
    e: &[f64],
    t_si: &SupportSet,
    delta: f64,
    opts: &SippOptions,
) -> Result<LemmaSuite> {
    if !(0.0..1.0).contains(&delta) {
        return Err(Error::invalid(format!("delta_3T = {delta} outside [0, 1)")));
    }
    if x.len() != a.cols() || e.len() != a.rows() {
        return Err(Error::invalid("signal or noise length does not match the matrix"));
    }
    let truth = SupportSet::from_indices((0..x.len()).filter(|&i| x[i] != 0.0));
    if truth.is_empty() {
        return Err(Error::invalid("signal is zero"));
    }
    let t = truth.len();
    let mut y = a.mul_sparse(x, &truth);
    for (yi, ei) in y.iter_mut().zip(e) {
        *yi += ei;
    }
    let (result, trace) = sipp_run_traced(&y, a, t, t_si, opts)?;

    let e_norm = norm2(e);
    let (ka, kb, kc) = (a_sipp(delta), b_sipp(delta), c_sipp(delta, CVariant::Squared));
    let tail_si = norm_off(x, t_si);
    let mut checks = Vec::new();

    rip_checks(a, &y, x, &result.support, &truth.difference(&result.support), delta, &mut checks);

    for st in &trace {
        let l = Some(st.l);
        let tail_prev = norm_off(x, &st.prev_support);
        let tail_hat = norm_off(x, &st.t_hat);
        let err = norm2(&sub(x, &st.x_hat));
        checks.push(LemmaCheck::le(
            "ls_error_upper",
            l,
            err,
            tail_hat / (1.0 - delta) + e_norm / (1.0 - delta).sqrt(),
        ));
        checks.push(LemmaCheck::le("ls_error_lower", l, tail_hat, err));
        checks.push(LemmaCheck::le(
            "final_pruning",
            l,
            tail_hat,
            (1.0 + delta) / (1.0 - delta) * norm_off(x, &st.u_check) + 2.0 / (1.0 - delta).sqrt() * e_norm,
        ));
        checks.push(LemmaCheck::le(
            "intermediate_pruning",
            l,
            norm_off(x, &st.t_acute),
            (1.0 + delta) / (1.0 - delta) * norm_off(x, &st.u_tilde) + 2.0 / (1.0 - delta).sqrt() * e_norm,
        ));
        checks.push(LemmaCheck::le(
            "merge",
            l,
            norm_off(x, &st.u_tilde),
            2.0 * delta / (1.0 - delta).powi(2) * tail_prev + 2.0 * (1.0 + delta).sqrt() / (1.0 - delta) * e_norm,
        ));
        checks.push(LemmaCheck::le("recurrence", l, tail_hat, ka * tail_prev + kb * tail_si + kc * e_norm));
    }
    Ok(LemmaSuite { delta, result, checks })
}

/// Energy identity and the improvement guarantee of one fusion step that
/// turns the estimate `(x_hat, t_hat)` and the consensus set `j_hat` into
/// side information. The improvement is only checked when the energy
/// condition `‖x_Ĵ‖² >= ‖x_{T̂ \ Î}‖²` holds.
pub fn fusion_checks(x: &[f64], truth: &SupportSet, x_hat: &[f64], t_hat: &SupportSet, j_hat: &SupportSet) -> Result<Vec<LemmaCheck>> {
    let t = t_hat.len();
    let fused = expansion(j_hat, x_hat, t)?;
    let mut out = Vec::new();
    // both statements assume x_hat vanishes off t_hat, so Î ⊆ T̂
    if !fused.i_hat.is_subset(t_hat) {
        return Ok(out);
    }
    let lhs = norm_off(x, &fused.t_si).powi(2);
    let rhs = norm_off(x, t_hat).powi(2) + norm_on(x, &t_hat.difference(&fused.i_hat)).powi(2)
        - norm_on(x, j_hat).powi(2);
    out.push(LemmaCheck::eq("fusion_energy_identity", lhs, rhs));
    let report = assumption_checks(x, truth, t_hat, &fused.i_hat, j_hat);
    if report.energy_dominates {
        out.push(LemmaCheck::le("fusion_improvement", None, norm_off(x, &fused.t_si), norm_off(x, t_hat)));
    }
    Ok(out)
}

/// `‖x_{T_si^c}‖ / ‖x_{T̂^c}‖` for one fusion step. When `T̂` already covers
/// the support the ratio is reported as 0 with the flag set.
pub fn a_co_measure(x: &[f64], t_hat: &SupportSet, t_si: &SupportSet) -> (f64, bool) {
    let before = norm_off(x, t_hat);
    if before == 0.0 {
        return (0.0, true);
    }
    (norm_off(x, t_si) / before, false)
}
