//! Discretely sampled paths and truncated power variations.

use alloc::vec::Vec;
use core::ops::Range;
// inherent f64 math shadows this whenever std is linked
#[allow(unused_imports)]
use num_traits::Float;

use serde::{Deserialize, Serialize};

use crate::sum::CompensatedSum;
use crate::{Error, Result};

/// Regularly spaced observations of one path, split into trading days.
///
/// `day_starts` holds the index of the first observation of every day, so the
/// first entry is always 0. Increments are only formed inside a day.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathSeries {
    values: Vec<f64>,
    delta: f64,
    day_starts: Vec<usize>,
}

impl PathSeries {
    /// A single-day path.
    pub fn new(values: Vec<f64>, delta: f64) -> Result<Self> {
        Self::with_days(values, delta, alloc::vec![0])
    }

    pub fn with_days(values: Vec<f64>, delta: f64, day_starts: Vec<usize>) -> Result<Self> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::invalid(
                "sampling interval must be positive and finite",
            ));
        }
        if values.is_empty() {
            return Err(Error::invalid("path has no observations"));
        }
        if day_starts.first() != Some(&0) {
            return Err(Error::invalid("first day must start at index 0"));
        }
        if day_starts.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("day boundaries must be strictly increasing"));
        }
        if *day_starts.last().unwrap() >= values.len() {
            return Err(Error::invalid("day boundary out of bounds"));
        }
        Ok(Self {
            values,
            delta,
            day_starts,
        })
    }

    /// Concatenates per-day observation vectors into one path.
    pub fn from_days<I>(days: I, delta: f64) -> Result<Self>
    where
        I: IntoIterator<Item = Vec<f64>>,
    {
        let mut values = Vec::new();
        let mut starts = Vec::new();
        for day in days {
            if day.is_empty() {
                continue;
            }
            starts.push(values.len());
            values.extend(day);
        }
        if starts.is_empty() {
            return Err(Error::invalid("path has no observations"));
        }
        Self::with_days(values, delta, starts)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn day_starts(&self) -> &[usize] {
        &self.day_starts
    }

    pub fn n_days(&self) -> usize {
        self.day_starts.len()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn day_range(&self, day: usize) -> Range<usize> {
        let start = self.day_starts[day];
        let end = self
            .day_starts
            .get(day + 1)
            .copied()
            .unwrap_or(self.values.len());
        start..end
    }

    pub fn day(&self, day: usize) -> &[f64] {
        &self.values[self.day_range(day)]
    }

    pub fn days(&self) -> impl Iterator<Item = &[f64]> + '_ {
        (0..self.n_days()).map(move |d| self.day(d))
    }

    /// A copy of one day as a standalone path.
    pub fn day_path(&self, day: usize) -> PathSeries {
        PathSeries {
            values: self.day(day).to_vec(),
            delta: self.delta,
            day_starts: alloc::vec![0],
        }
    }

    /// A path with the days reordered as `order` (each index used once).
    pub fn reorder_days(&self, order: &[usize]) -> Result<PathSeries> {
        let mut seen = alloc::vec![false; self.n_days()];
        for &d in order {
            if d >= seen.len() || seen[d] {
                return Err(Error::invalid("day order must be a permutation"));
            }
            seen[d] = true;
        }
        if order.len() != self.n_days() {
            return Err(Error::invalid("day order must be a permutation"));
        }
        PathSeries::from_days(order.iter().map(|&d| self.day(d).to_vec()), self.delta)
    }

    /// Applies `f` to every observation, keeping sampling and day layout.
    pub fn map_values(&self, mut f: impl FnMut(f64) -> f64) -> PathSeries {
        PathSeries {
            values: self.values.iter().map(|&x| f(x)).collect(),
            delta: self.delta,
            day_starts: self.day_starts.clone(),
        }
    }

    pub fn increments(&self, stride: usize) -> Result<Vec<f64>> {
        increments(self, stride)
    }

    fn check_finite(&self) -> Result<()> {
        match self.values.iter().position(|x| !x.is_finite()) {
            Some(index) => Err(Error::NonFinite { index }),
            None => Ok(()),
        }
    }
}

/// Strided increments `X[i*k] - X[(i-1)*k]` within each day. Increments that
/// would straddle a day boundary are dropped, so a day with `m` increments at
/// the base frequency contributes `floor(m / stride)` of them.
pub fn increments(path: &PathSeries, stride: usize) -> Result<Vec<f64>> {
    if stride == 0 {
        return Err(Error::invalid("stride must be at least 1"));
    }
    path.check_finite()?;
    let mut out = Vec::with_capacity(path.len() / stride);
    let mut any_day_long_enough = false;
    for day in path.days() {
        if day.len() > stride {
            any_day_long_enough = true;
        }
        day_increments_into(day, stride, &mut out);
    }
    if !any_day_long_enough {
        return Err(Error::invalid("path too short for the requested stride"));
    }
    Ok(out)
}

pub(crate) fn day_increments_into(day: &[f64], stride: usize, out: &mut Vec<f64>) {
    out.extend(
        (stride..day.len())
            .step_by(stride)
            .map(|i| day[i] - day[i - stride]),
    );
}

/// `|x|^p`, using integer powers when `p` is integral.
#[derive(Debug, Clone, Copy)]
pub(crate) enum AbsPow {
    Int(i32),
    Real(f64),
}

impl AbsPow {
    pub(crate) fn new(p: f64) -> Self {
        if p.fract() == 0.0 && p <= 64.0 {
            AbsPow::Int(p as i32)
        } else {
            AbsPow::Real(p)
        }
    }

    #[inline]
    pub(crate) fn apply(self, x: f64) -> f64 {
        match self {
            AbsPow::Int(n) => x.abs().powi(n),
            AbsPow::Real(p) => x.abs().powf(p),
        }
    }
}

/// `sum |x|^p 1{|x| <= cutoff}` over already formed increments, with the
/// number of increments that survived the truncation.
pub fn truncated_power_sum(increments: &[f64], p: f64, cutoff: f64) -> (CompensatedSum, usize) {
    let pow = AbsPow::new(p);
    let mut acc = CompensatedSum::new();
    let mut kept = 0;
    for &x in increments {
        if x.abs() <= cutoff {
            acc.push(pow.apply(x));
            kept += 1;
        }
    }
    (acc, kept)
}

/// Truncated power variation `B(p, u, k*delta)`: the sum of `|increment|^p`
/// over strided increments no larger than `cutoff` in absolute value.
pub fn truncated_power_variation(
    path: &PathSeries,
    p: f64,
    cutoff: f64,
    stride: usize,
) -> Result<f64> {
    if !(p > 0.0) {
        return Err(Error::invalid("power must be positive"));
    }
    if !(cutoff > 0.0) {
        return Err(Error::invalid("cutoff must be positive"));
    }
    let incs = increments(path, stride)?;
    Ok(truncated_power_sum(&incs, p, cutoff).0.value())
}

/// Truncation rule `u = alpha * sigma_ref * delta^varpi`.
///
/// `alpha` counts standard deviations of the continuous part when
/// `varpi = 1/2` and `sigma_ref` is the (annualized) volatility.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TruncationSpec {
    pub alpha: f64,
    pub varpi: f64,
    pub sigma_ref: f64,
}

impl Default for TruncationSpec {
    /// Eight standard deviations at 25% annualized volatility.
    fn default() -> Self {
        Self {
            alpha: 8.0,
            varpi: Self::DEFAULT_VARPI,
            sigma_ref: 0.25,
        }
    }
}

impl TruncationSpec {
    pub const DEFAULT_VARPI: f64 = 0.5;

    pub fn new(alpha: f64, varpi: f64, sigma_ref: f64) -> Result<Self> {
        let spec = Self {
            alpha,
            varpi,
            sigma_ref,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::invalid("alpha must be positive"));
        }
        if !(self.varpi > 0.0 && self.varpi <= 0.5) {
            return Err(Error::invalid("varpi must lie in (0, 1/2]"));
        }
        if !(self.sigma_ref > 0.0 && self.sigma_ref.is_finite()) {
            return Err(Error::invalid("reference volatility must be positive"));
        }
        Ok(())
    }

    pub fn cutoff(&self, delta: f64) -> f64 {
        self.alpha * self.sigma_ref * delta.powf(self.varpi)
    }

    pub fn with_alpha(self, alpha: f64) -> Self {
        Self { alpha, ..self }
    }
}

pub fn cutoff_from_spec(spec: &TruncationSpec, delta: f64) -> Result<f64> {
    spec.validate()?;
    if !(delta > 0.0) {
        return Err(Error::invalid("sampling interval must be positive"));
    }
    Ok(spec.cutoff(delta))
}

/// Upper bounds `(rho1, rho2)` on the truncation rate exponent under which
/// the limit theorems for the two statistics hold.
pub fn rate_exponents(p: f64) -> Result<(f64, f64)> {
    if !(p > 2.0) {
        return Err(Error::invalid("rate exponents need p > 2"));
    }
    let rho1 = (p - 2.0) / (2.0 * p);
    let rho2 = ((p - 2.0) / (4.0 * p - 4.0)).min((2.0 * p - 4.0) / (11.0 * p - 10.0));
    Ok((rho1, rho2))
}

/// With `u ~ delta^varpi`, some `rho < rho_bound` makes `delta^rho / u`
/// bounded exactly when `varpi < rho_bound`.
pub fn check_rate_condition(varpi: f64, rho_bound: f64) -> bool {
    varpi < rho_bound
}
