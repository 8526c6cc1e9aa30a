//! Compensated summation.
//!
//! All power variations are accumulated with Neumaier's variant of Kahan
//! summation so that sums over millions of increments, and merges of per-day
//! partial sums, agree to within a few ulps regardless of how they were split.

use core::iter::Sum;
use core::ops::{Add, AddAssign};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub const fn new() -> Self {
        Self {
            sum: 0.0,
            comp: 0.0,
        }
    }

    #[inline]
    pub fn push(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    /// Folds another partial sum into this one, carrying both its running
    /// total and its compensation term.
    pub fn merge(&mut self, other: &CompensatedSum) {
        self.push(other.sum);
        self.push(other.comp);
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl AddAssign<f64> for CompensatedSum {
    fn add_assign(&mut self, rhs: f64) {
        self.push(rhs);
    }
}

impl AddAssign<CompensatedSum> for CompensatedSum {
    fn add_assign(&mut self, rhs: CompensatedSum) {
        self.merge(&rhs);
    }
}

impl Add for CompensatedSum {
    type Output = CompensatedSum;
    fn add(mut self, rhs: CompensatedSum) -> CompensatedSum {
        self.merge(&rhs);
        self
    }
}

impl From<CompensatedSum> for f64 {
    fn from(s: CompensatedSum) -> f64 {
        s.value()
    }
}

impl Sum<f64> for CompensatedSum {
    fn sum<I: Iterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        for x in iter {
            acc.push(x);
        }
        acc
    }
}

/// Compensated sum of a slice.
pub fn compensated_sum(values: &[f64]) -> f64 {
    values.iter().copied().sum::<CompensatedSum>().value()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;

    #[test]
    fn recovers_cancelled_terms() {
        // naive summation returns 0 here
        let xs = [1.0, 1e100, 1.0, -1e100];
        assert_eq!(compensated_sum(&xs), 2.0);
    }

    #[test]
    fn many_small_terms() {
        let xs: Vec<f64> = (0..1_000_000).map(|_| 0.1).collect();
        let s = compensated_sum(&xs);
        assert!((s - 100_000.0).abs() < 1e-9, "{s}");
    }

    #[test]
    fn merge_matches_single_pass() {
        let xs: Vec<f64> = (1..10_000).map(|i| 1.0 / i as f64).collect();
        let whole = compensated_sum(&xs);
        let (a, b) = xs.split_at(3_333);
        let mut left: CompensatedSum = a.iter().copied().sum();
        let right: CompensatedSum = b.iter().copied().sum();
        left += right;
        assert!((left.value() - whole).abs() <= 4.0 * f64::EPSILON * whole);
    }
}
