//! Least squares on column subsets via Householder QR.

use crate::error::{Error, Result};
use crate::math::matrix::{dot, DenseMatrix};
use crate::math::SupportSet;

/// Relative rank tolerance applied to the diagonal of R.
pub const RANK_TOL: f64 = 1e-10;

/// Householder QR of a tall `m x k` matrix, `k <= m`.
#[derive(Clone, Debug)]
pub struct Qr {
    m: usize,
    k: usize,
    // column-major R (upper triangle used)
    r: Vec<f64>,
    // Householder vectors, v_j has length m - j
    vs: Vec<Vec<f64>>,
    betas: Vec<f64>,
}

impl Qr {
    /// Factors the columns `support` of `a`. Fails with [`Error::Singular`]
    /// when the columns are numerically dependent or outnumber the rows.
    pub fn factor(a: &DenseMatrix, support: &SupportSet, step: &'static str) -> Result<Qr> {
        support.check_bound(a.cols())?;
        let m = a.rows();
        let k = support.len();
        let singular = || Error::Singular { step, support: support.clone() };
        if k > m {
            return Err(singular());
        }
        let mut r = vec![0.0; m * k];
        for (c, j) in support.iter().enumerate() {
            for i in 0..m {
                r[c * m + i] = a.get(i, j);
            }
        }
        let scale = (0..k)
            .map(|c| dot(&r[c * m..(c + 1) * m], &r[c * m..(c + 1) * m]).sqrt())
            .fold(0.0, f64::max);
        let tol = RANK_TOL * scale;

        let mut vs = Vec::with_capacity(k);
        let mut betas = Vec::with_capacity(k);
        for j in 0..k {
            let col = &r[j * m + j..(j + 1) * m];
            let norm = dot(col, col).sqrt();
            if !(norm > tol) {
                return Err(singular());
            }
            let alpha = if col[0] >= 0.0 { -norm } else { norm };
            let mut v = col.to_vec();
            v[0] -= alpha;
            let vv = dot(&v, &v);
            let beta = if vv > 0.0 { 2.0 / vv } else { 0.0 };
            r[j * m + j] = alpha;
            for i in j + 1..m {
                r[j * m + i] = 0.0;
            }
            for c in j + 1..k {
                let tail = &mut r[c * m + j..(c + 1) * m];
                let s = beta * dot(&v, tail);
                for (t, vi) in tail.iter_mut().zip(&v) {
                    *t -= s * vi;
                }
            }
            vs.push(v);
            betas.push(beta);
        }
        Ok(Qr { m, k, r, vs, betas })
    }

    pub fn ncols(&self) -> usize {
        self.k
    }

    /// Overwrites `b` with `Q^T b`.
    fn apply_qt(&self, b: &mut [f64]) {
        for (j, (v, &beta)) in self.vs.iter().zip(&self.betas).enumerate() {
            let tail = &mut b[j..];
            let s = beta * dot(v, tail);
            for (t, vi) in tail.iter_mut().zip(v) {
                *t -= s * vi;
            }
        }
    }

    /// Overwrites `b` with `Q b`.
    fn apply_q(&self, b: &mut [f64]) {
        for (j, (v, &beta)) in self.vs.iter().zip(&self.betas).enumerate().rev() {
            let tail = &mut b[j..];
            let s = beta * dot(v, tail);
            for (t, vi) in tail.iter_mut().zip(v) {
                *t -= s * vi;
            }
        }
    }

    /// Coefficients `u` minimizing `‖b - A_T u‖`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.m, "right-hand side has wrong length");
        let mut qtb = b.to_vec();
        self.apply_qt(&mut qtb);
        let (m, k) = (self.m, self.k);
        let mut u = vec![0.0; k];
        for i in (0..k).rev() {
            let mut s = qtb[i];
            for c in i + 1..k {
                s -= self.r[c * m + i] * u[c];
            }
            u[i] = s / self.r[i * m + i];
        }
        u
    }

    /// `b - A_T A_T^† b`, computed by zeroing the range component of `Q^T b`.
    pub fn residual(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.m, "right-hand side has wrong length");
        let mut w = b.to_vec();
        self.apply_qt(&mut w);
        w[..self.k].iter_mut().for_each(|v| *v = 0.0);
        self.apply_q(&mut w);
        w
    }
}

/// Solves `min ‖y - A_T u‖` and scatters `u` into a length-N vector that is
/// zero off `support`. An empty support yields the zero vector.
pub fn least_squares_on_support(a: &DenseMatrix, y: &[f64], support: &SupportSet) -> Result<Vec<f64>> {
    least_squares_step(a, y, support, "least_squares")
}

pub(crate) fn least_squares_step(
    a: &DenseMatrix,
    y: &[f64],
    support: &SupportSet,
    step: &'static str,
) -> Result<Vec<f64>> {
    if y.len() != a.rows() {
        return Err(Error::invalid("measurement length does not match matrix rows"));
    }
    let mut x = vec![0.0; a.cols()];
    if support.is_empty() {
        support.check_bound(a.cols())?;
        return Ok(x);
    }
    let qr = Qr::factor(a, support, step)?;
    for (j, u) in support.iter().zip(qr.solve(y)) {
        x[j] = u;
    }
    Ok(x)
}

/// `y - A_T A_T^† y`, the component of `y` orthogonal to the columns of `a_t`.
pub fn residual_projection(y: &[f64], a_t: &DenseMatrix) -> Result<Vec<f64>> {
    if y.len() != a_t.rows() {
        return Err(Error::invalid("measurement length does not match matrix rows"));
    }
    let qr = Qr::factor(a_t, &SupportSet::full(a_t.cols()), "residual_projection")?;
    Ok(qr.residual(y))
}

/// Moore-Penrose pseudo-inverse `(A^T A)^{-1} A^T` of a full column rank matrix.
pub fn pseudo_inverse(a_t: &DenseMatrix) -> Result<DenseMatrix> {
    let (m, k) = (a_t.rows(), a_t.cols());
    let qr = Qr::factor(a_t, &SupportSet::full(k), "pseudo_inverse")?;
    let mut out = DenseMatrix::zeros(k, m);
    let mut e = vec![0.0; m];
    for i in 0..m {
        e[i] = 1.0;
        for (r, v) in qr.solve(&e).into_iter().enumerate() {
            out.set(r, i, v);
        }
        e[i] = 0.0;
    }
    Ok(out)
}
