//! Reconstruction quality measures.

use crate::error::{Error, Result};
use crate::math::SupportSet;

/// SRER reported for (numerically) exact recovery.
pub const SRER_CAP_DB: f64 = 300.0;

/// Reconstructions at or above this SRER are at machine precision and are
/// reported as [`SRER_CAP_DB`]. Double-precision least squares on
/// well-conditioned systems lands around 280-320 dB, so a lower threshold
/// keeps the reported value independent of rounding noise.
pub const EXACT_THRESHOLD_DB: f64 = 240.0;

/// `1 - |T ∩ T̂| / |T|`.
pub fn support_distortion(truth: &SupportSet, estimate: &SupportSet) -> Result<f64> {
    if truth.is_empty() {
        return Err(Error::invalid("true support is empty"));
    }
    Ok(1.0 - truth.intersection(estimate).len() as f64 / truth.len() as f64)
}

/// Mean support distortion over a batch.
pub fn asce<'a>(batch: impl IntoIterator<Item = (&'a SupportSet, &'a SupportSet)>) -> Result<f64> {
    let mut sum = 0.0;
    let mut count = 0usize;
    for (t, t_hat) in batch {
        sum += support_distortion(t, t_hat)?;
        count += 1;
    }
    if count == 0 {
        return Err(Error::invalid("empty batch"));
    }
    Ok(sum / count as f64)
}

/// Running numerator and denominator of a batch SRER.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SrerAccumulator {
    pub signal_energy: f64,
    pub error_energy: f64,
    pub pairs: usize,
}

impl SrerAccumulator {
    pub fn add(&mut self, x: &[f64], x_hat: &[f64]) {
        assert_eq!(x.len(), x_hat.len(), "signal and estimate lengths differ");
        self.signal_energy += x.iter().map(|v| v * v).sum::<f64>();
        self.error_energy += x.iter().zip(x_hat).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
        self.pairs += 1;
    }

    pub fn merge(&mut self, other: &SrerAccumulator) {
        self.signal_energy += other.signal_energy;
        self.error_energy += other.error_energy;
        self.pairs += other.pairs;
    }

    /// SRER in dB and whether it was capped.
    pub fn value(&self) -> Result<(f64, bool)> {
        if self.pairs == 0 {
            return Err(Error::invalid("empty batch"));
        }
        Ok(srer_db_from_energies(self.signal_energy, self.error_energy))
    }
}

/// `10 log10(signal / error)`, capped at [`SRER_CAP_DB`].
pub fn srer_db_from_energies(signal: f64, error: f64) -> (f64, bool) {
    if error <= 0.0 {
        return (SRER_CAP_DB, true);
    }
    let db = 10.0 * (signal / error).log10();
    if db >= EXACT_THRESHOLD_DB {
        (SRER_CAP_DB, true)
    } else {
        (db, false)
    }
}

/// Ratio-of-sums SRER over a batch of `(x, x̂)` pairs.
pub fn srer<'a>(batch: impl IntoIterator<Item = (&'a [f64], &'a [f64])>) -> Result<f64> {
    let mut acc = SrerAccumulator::default();
    for (x, x_hat) in batch {
        acc.add(x, x_hat);
    }
    Ok(acc.value()?.0)
}

/// Fraction of measurements `M / N`.
pub fn alpha(m: usize, n: usize) -> f64 {
    m as f64 / n as f64
}

/// Sample mean and (n - 1) standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, var.sqrt())
}
