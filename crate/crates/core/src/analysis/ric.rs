//! Restricted isometry constants of small matrices.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng as _;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::math::DenseMatrix;
use crate::rng::Rng;

/// Largest number of column subsets [`ric_exact`] will enumerate.
pub const MAX_SUBSETS: u128 = 1_000_000;

/// `C(n, k)`, saturating.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

fn gram_of(a: &DenseMatrix) -> DMatrix<f64> {
    let g = a.gram();
    let n = a.cols();
    DMatrix::from_fn(n, n, |i, j| g.get(i, j))
}

fn subset_delta(g: &DMatrix<f64>, idx: &[usize]) -> f64 {
    let s = idx.len();
    let sub = DMatrix::from_fn(s, s, |i, j| g[(idx[i], idx[j])]);
    let eig = SymmetricEigen::new(sub).eigenvalues;
    let (lo, hi) = eig.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    (hi - 1.0).max(1.0 - lo)
}

/// Advances `idx` to the next `k`-combination of `0..n` whose first entry is
/// unchanged. Returns false when exhausted.
fn next_tail(idx: &mut [usize], n: usize) -> bool {
    let k = idx.len();
    let mut i = k;
    while i > 1 {
        i -= 1;
        if idx[i] < n - (k - i) {
            idx[i] += 1;
            for j in i + 1..k {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Exact `δ_s` of `a` by enumerating every `s`-column subset:
/// the largest `max(λ_max - 1, 1 - λ_min)` over the sub-Gram matrices.
pub fn ric_exact(a: &DenseMatrix, s: usize) -> Result<f64> {
    let n = a.cols();
    if s == 0 || s > n {
        return Err(Error::invalid(format!("order s = {s} outside 1..={n}")));
    }
    let subsets = binomial(n, s);
    if subsets > MAX_SUBSETS {
        return Err(Error::TooLarge { subsets, limit: MAX_SUBSETS });
    }
    let g = gram_of(a);
    let delta = (0..=n - s)
        .into_par_iter()
        .map(|first| {
            let mut idx: Vec<usize> = (first..first + s).collect();
            let mut best = subset_delta(&g, &idx);
            while next_tail(&mut idx, n) {
                best = best.max(subset_delta(&g, &idx));
            }
            best
        })
        .reduce(|| 0.0, f64::max);
    Ok(delta)
}

/// Lower bound on `δ_s` from `samples` random column subsets.
pub fn ric_sampled(a: &DenseMatrix, s: usize, samples: usize, rng: &mut Rng) -> Result<f64> {
    let n = a.cols();
    if s == 0 || s > n {
        return Err(Error::invalid(format!("order s = {s} outside 1..={n}")));
    }
    let g = gram_of(a);
    let mut pool: Vec<usize> = (0..n).collect();
    let mut best = 0.0f64;
    for _ in 0..samples {
        for i in 0..s {
            let j = rng.gen_range(i..n);
            pool.swap(i, j);
        }
        best = best.max(subset_delta(&g, &pool[..s]));
    }
    Ok(best)
}
