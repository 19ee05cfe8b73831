//! Index sets, vote counting and largest-magnitude selection.
//!
//! All indices are 0-based.

use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};

/// Strictly increasing set of column indices.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct SupportSet(Vec<usize>);

impl SupportSet {
    pub fn empty() -> Self {
        SupportSet(Vec::new())
    }

    /// Builds a set from arbitrary indices, sorting and removing duplicates.
    pub fn from_indices<I: IntoIterator<Item = usize>>(indices: I) -> Self {
        let mut v: Vec<usize> = indices.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        SupportSet(v)
    }

    /// Wraps an already sorted, duplicate-free vector.
    pub fn from_sorted(indices: Vec<usize>) -> Result<Self> {
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("support indices must be strictly increasing"));
        }
        Ok(SupportSet(indices))
    }

    /// `{0, 1, ..., n-1}`.
    pub fn full(n: usize) -> Self {
        SupportSet((0..n).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn into_vec(self) -> Vec<usize> {
        self.0
    }

    pub fn max(&self) -> Option<usize> {
        self.0.last().copied()
    }

    pub fn contains(&self, index: usize) -> bool {
        self.0.binary_search(&index).is_ok()
    }

    /// Fails unless every index is below `n`.
    pub fn check_bound(&self, n: usize) -> Result<()> {
        match self.max() {
            Some(m) if m >= n => Err(Error::invalid(format!(
                "support index {m} out of range for dimension {n}"
            ))),
            _ => Ok(()),
        }
    }

    pub fn union(&self, other: &SupportSet) -> SupportSet {
        let (a, b) = (&self.0, &other.0);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(b[j]);
                    j += 1;
                }
                Ordering::Equal => {
                    out.push(a[i]);
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        SupportSet(out)
    }

    pub fn intersection(&self, other: &SupportSet) -> SupportSet {
        SupportSet(self.iter().filter(|&i| other.contains(i)).collect())
    }

    pub fn difference(&self, other: &SupportSet) -> SupportSet {
        SupportSet(self.iter().filter(|&i| !other.contains(i)).collect())
    }

    /// `{0..n} \ self`.
    pub fn complement(&self, n: usize) -> SupportSet {
        SupportSet((0..n).filter(|&i| !self.contains(i)).collect())
    }

    pub fn is_subset(&self, other: &SupportSet) -> bool {
        self.iter().all(|i| other.contains(i))
    }
}

impl fmt::Debug for SupportSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.0.iter()).finish()
    }
}

impl FromIterator<usize> for SupportSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        SupportSet::from_indices(iter)
    }
}

/// Per-index vote counter used by consensus.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VoteVector {
    counts: Vec<u32>,
}

impl VoteVector {
    pub fn zeros(n: usize) -> Self {
        VoteVector { counts: vec![0; n] }
    }

    pub fn from_counts(counts: Vec<u32>) -> Self {
        VoteVector { counts }
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    /// Adds one vote to every index of `set`.
    pub fn accumulate(&mut self, set: &SupportSet) -> Result<()> {
        set.check_bound(self.counts.len())?;
        for i in set.iter() {
            self.counts[i] += 1;
        }
        Ok(())
    }
}

/// Functional form of [`VoteVector::accumulate`].
pub fn vote_accumulate(mut votes: VoteVector, set: &SupportSet) -> Result<VoteVector> {
    votes.accumulate(set)?;
    Ok(votes)
}

// Larger magnitude first, then lower index.
#[inline]
fn rank(x: &[f64], a: usize, b: usize) -> Ordering {
    x[b].abs().total_cmp(&x[a].abs()).then(a.cmp(&b))
}

/// Indices of the `k` largest-magnitude entries of `x`.
///
/// Always returns exactly `k` indices; ties (including among zeros) go to
/// the lower index.
pub fn supp_select(x: &[f64], k: usize) -> Result<SupportSet> {
    if k > x.len() {
        return Err(Error::invalid(format!(
            "cannot select {k} indices from a vector of length {}",
            x.len()
        )));
    }
    let mut idx: Vec<usize> = (0..x.len()).collect();
    Ok(select_from(x, &mut idx, k))
}

/// Like [`supp_select`] but only considers indices in `candidates`.
pub fn supp_select_within(x: &[f64], candidates: &SupportSet, k: usize) -> Result<SupportSet> {
    if k > candidates.len() {
        return Err(Error::invalid(format!(
            "cannot select {k} indices from {} candidates",
            candidates.len()
        )));
    }
    candidates.check_bound(x.len())?;
    let mut idx = candidates.as_slice().to_vec();
    Ok(select_from(x, &mut idx, k))
}

fn select_from(x: &[f64], idx: &mut Vec<usize>, k: usize) -> SupportSet {
    if k == 0 {
        return SupportSet::empty();
    }
    if k < idx.len() {
        idx.select_nth_unstable_by(k - 1, |&a, &b| rank(x, a, b));
        idx.truncate(k);
    }
    idx.sort_unstable();
    SupportSet(std::mem::take(idx))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(v: &[usize]) -> SupportSet {
        SupportSet::from_indices(v.iter().copied())
    }

    #[test]
    fn supp_unique_maximum() {
        assert_eq!(supp_select(&[0.0, 0.0, 3.0], 1).unwrap(), set(&[2]));
    }

    #[test]
    fn supp_equal_magnitudes() {
        assert_eq!(supp_select(&[5.0, -5.0, 1.0], 2).unwrap(), set(&[0, 1]));
    }

    #[test]
    fn supp_tie_goes_to_lower_index() {
        // sort (|x_i|, -i) descending, take two
        let x = [1.0f64, 2.0, 2.0, 0.0];
        let mut order: Vec<usize> = (0..4).collect();
        order.sort_by(|&a, &b| x[b].abs().partial_cmp(&x[a].abs()).unwrap().then(a.cmp(&b)));
        assert_eq!(set(&order[..2]), set(&[1, 2]));
        assert_eq!(supp_select(&x, 2).unwrap(), set(&[1, 2]));
        assert_eq!(supp_select(&[2.0, 1.0, 2.0, 2.0], 2).unwrap(), set(&[0, 2]));
    }

    #[test]
    fn supp_pads_with_lowest_zero_indices() {
        assert_eq!(supp_select(&[0.0, 0.0, 7.0, 0.0], 3).unwrap(), set(&[0, 1, 2]));
        assert_eq!(supp_select(&[1.0, 2.0], 0).unwrap(), SupportSet::empty());
        assert_eq!(supp_select(&[1.0, 2.0], 2).unwrap(), set(&[0, 1]));
    }

    #[test]
    fn supp_rejects_oversized_k() {
        assert!(matches!(supp_select(&[1.0], 2), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn supp_within_candidates() {
        let x = [9.0, 0.0, 5.0, 3.0, 1.0];
        let cand = set(&[1, 2, 3, 4]);
        assert_eq!(supp_select_within(&x, &cand, 2).unwrap(), set(&[2, 3]));
        assert_eq!(supp_select_within(&x, &set(&[0, 1]), 2).unwrap(), set(&[0, 1]));
        assert!(supp_select_within(&x, &set(&[9]), 1).is_err());
    }

    #[test]
    fn votes() {
        let z = VoteVector::zeros(3);
        assert_eq!(vote_accumulate(z, &set(&[1])).unwrap().counts(), &[0, 1, 0]);
        let z = VoteVector::from_counts(vec![2, 0, 1]);
        assert_eq!(vote_accumulate(z, &set(&[0, 2])).unwrap().counts(), &[3, 0, 2]);

        let sets = [set(&[0, 1]), set(&[1, 2]), set(&[2])];
        let mut z = VoteVector::zeros(3);
        for s in &sets {
            z.accumulate(s).unwrap();
        }
        let oracle: Vec<u32> = (0..3)
            .map(|i| sets.iter().filter(|s| s.as_slice().contains(&i)).count() as u32)
            .collect();
        assert_eq!(z.counts(), oracle.as_slice());
        assert_eq!(z.counts(), &[1, 2, 2]);

        let mut z = VoteVector::zeros(3);
        assert!(z.accumulate(&set(&[3])).is_err());
    }

    #[test]
    fn set_algebra() {
        let a = set(&[1, 3, 5]);
        let b = set(&[3, 4]);
        assert_eq!(a.union(&b), set(&[1, 3, 4, 5]));
        assert_eq!(a.intersection(&b), set(&[3]));
        assert_eq!(a.difference(&b), set(&[1, 5]));
        assert_eq!(b.complement(6), set(&[0, 1, 2, 5]));
        assert!(set(&[3]).is_subset(&a));
        assert!(SupportSet::from_sorted(vec![2, 1]).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn supp_exact_cardinality_and_dominance(
                x in prop::collection::vec(-10.0f64..10.0, 1..40),
                k_frac in 0.0f64..=1.0,
            ) {
                let k = ((x.len() as f64) * k_frac).floor() as usize;
                let s = supp_select(&x, k).unwrap();
                prop_assert_eq!(s.len(), k);
                let min_in = s.iter().map(|i| x[i].abs()).fold(f64::INFINITY, f64::min);
                for i in 0..x.len() {
                    if !s.contains(i) {
                        prop_assert!(x[i].abs() <= min_in);
                    }
                }
            }

            #[test]
            fn supp_permutation_equivariant(
                x in prop::collection::vec(-10.0f64..10.0, 2..30),
                seed in any::<u64>(),
            ) {
                use rand::seq::SliceRandom;
                use rand::SeedableRng;
                let mut perm: Vec<usize> = (0..x.len()).collect();
                perm.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
                let k = x.len() / 2;
                let y: Vec<f64> = perm.iter().map(|&p| x[p]).collect();
                let sx = supp_select(&x, k).unwrap();
                let sy: SupportSet = supp_select(&y, k).unwrap().iter().map(|i| perm[i]).collect();
                // continuous draws have no ties, so the selected sets agree
                prop_assert_eq!(sx, sy);
            }
        }
    }
}
