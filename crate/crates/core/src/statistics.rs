//! The two jump-activity test statistics, their variance estimators and
//! decision rules.
//!
//! Both statistics are ratios of truncated power variations. The building
//! blocks are accumulated in [`FiniteActivitySums`] / [`InfiniteActivitySums`],
//! which can be computed per day and merged, so a multi-day sample is
//! handled by summing every power variation across days before forming any
//! ratio.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
// inherent f64 math shadows this whenever std is linked
#[allow(unused_imports)]
use num_traits::Float;

use serde::{Deserialize, Serialize};

use crate::moments::MomentTable;
use crate::normal;
use crate::pathseries::{AbsPow, PathSeries, TruncationSpec};
use crate::sum::CompensatedSum;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestKind {
    /// Null: finitely many jumps (statistic `S_n`).
    FiniteActivity,
    /// Null: infinitely many jumps (statistic `S'_n`).
    InfiniteActivity,
}

impl TestKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TestKind::FiniteActivity => "finite_activity",
            TestKind::InfiniteActivity => "infinite_activity",
        }
    }
}

impl fmt::Display for TestKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DegenerateReason {
    /// A power variation in a denominator is zero (every increment truncated).
    ZeroDenominator,
    /// The variance estimate is not positive.
    NonPositiveVariance,
}

/// Diagnostics for a sample on which a test cannot reach a decision.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegenerateSample {
    pub test: TestKind,
    pub reason: DegenerateReason,
    pub n_increments: usize,
    pub n_retained: usize,
    pub statistic: Option<f64>,
    pub raw_variance: Option<f64>,
}

impl fmt::Display for DegenerateSample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let why = match self.reason {
            DegenerateReason::ZeroDenominator => "zero truncated power variation in a denominator",
            DegenerateReason::NonPositiveVariance => "non-positive variance estimate",
        };
        write!(
            f,
            "{} test: {why} ({} of {} increments retained)",
            self.test, self.n_retained, self.n_increments
        )?;
        if let Some(v) = self.raw_variance {
            write!(f, ", raw variance {v:e}")?;
        }
        Ok(())
    }
}

/// Result of one test on one sample.
///
/// `reject` holds exactly when `statistic < critical_value`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub test: TestKind,
    pub statistic: f64,
    pub null_limit: f64,
    /// Variance used for the decision (never negative).
    pub variance: f64,
    /// Variance estimate before any flooring.
    pub raw_variance: f64,
    pub z_score: f64,
    pub critical_value: f64,
    pub level: f64,
    pub reject: bool,
    pub n_increments_used: usize,
    pub n_increments_total: usize,
    pub truncation_cutoffs: Vec<f64>,
}

fn check_level(level: f64) -> Result<()> {
    if level > 0.0 && level < 1.0 {
        Ok(())
    } else {
        Err(Error::invalid("test level must lie in (0, 1)"))
    }
}

fn decide(
    test: TestKind,
    statistic: f64,
    null_limit: f64,
    raw_variance: f64,
    variance: f64,
    level: f64,
) -> Result<(f64, f64, bool)> {
    let z_a = normal::upper_quantile(level)?;
    let sd = variance.sqrt();
    let critical = null_limit - z_a * sd;
    let z = if variance > 0.0 {
        (statistic - null_limit) / sd
    } else if statistic == null_limit {
        0.0
    } else {
        (statistic - null_limit).signum() * f64::INFINITY
    };
    let _ = (test, raw_variance);
    Ok((z, critical, statistic < critical))
}

/// A decision, or the diagnostics of a sample on which no decision is possible.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum TestOutcome {
    Decision(TestReport),
    NoDecision(DegenerateSample),
}

impl TestOutcome {
    /// Turns a degenerate-sample error into [`TestOutcome::NoDecision`];
    /// other errors pass through.
    pub fn from_result(result: Result<TestReport>) -> Result<Self> {
        match result {
            Ok(r) => Ok(TestOutcome::Decision(r)),
            Err(Error::Degenerate(d)) => Ok(TestOutcome::NoDecision(d)),
            Err(e) => Err(e),
        }
    }

    pub fn report(&self) -> Option<&TestReport> {
        match self {
            TestOutcome::Decision(r) => Some(r),
            TestOutcome::NoDecision(_) => None,
        }
    }

    pub fn rejects(&self) -> Option<bool> {
        self.report().map(|r| r.reject)
    }

    /// The statistic, when it could be formed (it may exist without a decision).
    pub fn statistic(&self) -> Option<f64> {
        match self {
            TestOutcome::Decision(r) => Some(r.statistic),
            TestOutcome::NoDecision(d) => d.statistic,
        }
    }
}

/// Common surface of the two test configurations.
pub trait ActivityTest {
    fn kind(&self) -> TestKind;
    /// Probability limit of the statistic under the test's null.
    fn null_limit(&self) -> f64;
    /// Limit of the statistic when additive microstructure noise dominates.
    fn noise_limit(&self) -> f64;
    fn level(&self) -> f64;
}

/// Configuration of the test whose null is finite jump activity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FiniteActivityTestConfig {
    pub p: f64,
    pub k: u32,
    pub level: f64,
    pub truncation: TruncationSpec,
}

impl Default for FiniteActivityTestConfig {
    fn default() -> Self {
        Self {
            p: 4.0,
            k: 2,
            level: 0.05,
            truncation: TruncationSpec::default(),
        }
    }
}

impl FiniteActivityTestConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.p > 2.0 && self.p.is_finite()) {
            return Err(Error::invalid("p must exceed 2"));
        }
        if self.k < 1 {
            return Err(Error::invalid("k must be at least 1"));
        }
        check_level(self.level)?;
        self.truncation.validate()
    }
}

impl ActivityTest for FiniteActivityTestConfig {
    fn kind(&self) -> TestKind {
        TestKind::FiniteActivity
    }
    fn null_limit(&self) -> f64 {
        f64::from(self.k).powf(0.5 * self.p - 1.0)
    }
    fn noise_limit(&self) -> f64 {
        1.0 / f64::from(self.k)
    }
    fn level(&self) -> f64 {
        self.level
    }
}

/// Configuration of the test whose null is infinite jump activity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct InfiniteActivityTestConfig {
    pub p: f64,
    pub p_prime: f64,
    pub gamma: f64,
    pub level: f64,
    pub truncation: TruncationSpec,
    /// Floor applied to the variance estimate before deciding. A sample whose
    /// floored variance is still not positive gets no decision.
    pub variance_floor: f64,
}

impl Default for InfiniteActivityTestConfig {
    fn default() -> Self {
        Self {
            p: 3.0,
            p_prime: 4.0,
            gamma: 2.0,
            level: 0.05,
            truncation: TruncationSpec::default(),
            variance_floor: 0.0,
        }
    }
}

impl InfiniteActivityTestConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.p > 2.0 && self.p_prime > self.p && self.p_prime.is_finite()) {
            return Err(Error::invalid("powers must satisfy p' > p > 2"));
        }
        if !(self.gamma > 1.0 && self.gamma.is_finite()) {
            return Err(Error::invalid("gamma must exceed 1"));
        }
        if !(self.variance_floor >= 0.0) {
            return Err(Error::invalid("variance floor must be non-negative"));
        }
        check_level(self.level)?;
        self.truncation.validate()
    }
}

impl ActivityTest for InfiniteActivityTestConfig {
    fn kind(&self) -> TestKind {
        TestKind::InfiniteActivity
    }
    fn null_limit(&self) -> f64 {
        self.gamma.powf(self.p_prime - self.p)
    }
    fn noise_limit(&self) -> f64 {
        self.gamma.powf(self.p_prime - self.p)
    }
    fn level(&self) -> f64 {
        self.level
    }
}

/// Noise-dominated limit of a statistic: `1/k` for `S_n`, `gamma^{p'-p}` for `S'_n`.
pub fn noise_limits(cfg: &dyn ActivityTest) -> f64 {
    cfg.noise_limit()
}

/// Truncated power variations needed by the finite-activity test.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct FiniteActivitySums {
    /// `B(p, u, delta)`
    pub b_p: CompensatedSum,
    /// `B(2p, u, delta)`
    pub b_2p: CompensatedSum,
    /// `B(p, u, k delta)`
    pub b_p_coarse: CompensatedSum,
    pub n_fine: usize,
    pub kept_fine: usize,
    pub n_coarse: usize,
    pub kept_coarse: usize,
}

impl FiniteActivitySums {
    /// Sums over one day of observations.
    pub fn from_day(day: &[f64], p: f64, k: u32, cutoff: f64) -> Self {
        let pow = AbsPow::new(p);
        let mut s = Self::default();
        for w in day.windows(2) {
            let x = w[1] - w[0];
            s.n_fine += 1;
            if x.abs() <= cutoff {
                let a = pow.apply(x);
                s.b_p.push(a);
                s.b_2p.push(a * a);
                s.kept_fine += 1;
            }
        }
        let k = k as usize;
        for i in (k..day.len()).step_by(k) {
            let x = day[i] - day[i - k];
            s.n_coarse += 1;
            if x.abs() <= cutoff {
                s.b_p_coarse.push(pow.apply(x));
                s.kept_coarse += 1;
            }
        }
        s
    }

    /// Sums over a whole path with one cutoff, merged day by day.
    pub fn from_path(path: &PathSeries, p: f64, k: u32, cutoff: f64) -> Result<Self> {
        check_path(path, k as usize)?;
        let mut total = Self::default();
        for day in path.days() {
            total.merge(&Self::from_day(day, p, k, cutoff));
        }
        Ok(total)
    }

    pub fn merge(&mut self, other: &Self) {
        self.b_p.merge(&other.b_p);
        self.b_2p.merge(&other.b_2p);
        self.b_p_coarse.merge(&other.b_p_coarse);
        self.n_fine += other.n_fine;
        self.kept_fine += other.kept_fine;
        self.n_coarse += other.n_coarse;
        self.kept_coarse += other.kept_coarse;
    }

    fn degenerate(
        &self,
        reason: DegenerateReason,
        statistic: Option<f64>,
        raw_variance: Option<f64>,
    ) -> Error {
        Error::Degenerate(DegenerateSample {
            test: TestKind::FiniteActivity,
            reason,
            n_increments: self.n_fine,
            n_retained: self.kept_fine,
            statistic,
            raw_variance,
        })
    }

    /// `S_n = B(p, u, k delta) / B(p, u, delta)`.
    pub fn statistic(&self) -> Result<f64> {
        let den = self.b_p.value();
        if !(den > 0.0) {
            return Err(self.degenerate(DegenerateReason::ZeroDenominator, None, None));
        }
        Ok(self.b_p_coarse.value() / den)
    }

    /// `V_n = N(p,k) B(2p, u, delta) / B(p, u, delta)^2`.
    pub fn variance(&self, moments: &MomentTable) -> Result<f64> {
        let den = self.b_p.value();
        if !(den > 0.0) {
            return Err(self.degenerate(DegenerateReason::ZeroDenominator, None, None));
        }
        Ok(moments.n_pk * self.b_2p.value() / (den * den))
    }

    pub fn report(
        &self,
        cfg: &FiniteActivityTestConfig,
        moments: &MomentTable,
        cutoffs: Vec<f64>,
    ) -> Result<TestReport> {
        check_moments(cfg, moments)?;
        let statistic = self.statistic()?;
        let variance = self.variance(moments)?;
        let null_limit = cfg.null_limit();
        let (z_score, critical_value, reject) = decide(
            TestKind::FiniteActivity,
            statistic,
            null_limit,
            variance,
            variance,
            cfg.level,
        )?;
        Ok(TestReport {
            test: TestKind::FiniteActivity,
            statistic,
            null_limit,
            variance,
            raw_variance: variance,
            z_score,
            critical_value,
            level: cfg.level,
            reject,
            n_increments_used: self.kept_fine,
            n_increments_total: self.n_fine,
            truncation_cutoffs: cutoffs,
        })
    }
}

/// Power variations at one cutoff for the infinite-activity test.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct PowerSet {
    pub b_p: CompensatedSum,
    pub b_p_prime: CompensatedSum,
    pub b_2p: CompensatedSum,
    pub b_2p_prime: CompensatedSum,
    pub b_p_plus_p_prime: CompensatedSum,
    pub kept: usize,
}

impl PowerSet {
    #[inline]
    fn push(&mut self, a: f64, b: f64) {
        self.b_p.push(a);
        self.b_p_prime.push(b);
        self.b_2p.push(a * a);
        self.b_2p_prime.push(b * b);
        self.b_p_plus_p_prime.push(a * b);
        self.kept += 1;
    }

    fn merge(&mut self, o: &Self) {
        self.b_p.merge(&o.b_p);
        self.b_p_prime.merge(&o.b_p_prime);
        self.b_2p.merge(&o.b_2p);
        self.b_2p_prime.merge(&o.b_2p_prime);
        self.b_p_plus_p_prime.merge(&o.b_p_plus_p_prime);
        self.kept += o.kept;
    }
}

/// Truncated power variations at cutoffs `u` and `gamma u`, at the base
/// frequency, for the infinite-activity test.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct InfiniteActivitySums {
    pub at_u: PowerSet,
    pub at_gamma_u: PowerSet,
    pub n: usize,
}

impl InfiniteActivitySums {
    pub fn from_day(day: &[f64], p: f64, p_prime: f64, cutoff: f64, gamma: f64) -> Self {
        let pow_p = AbsPow::new(p);
        let pow_pp = AbsPow::new(p_prime);
        let outer = gamma * cutoff;
        let mut s = Self::default();
        for w in day.windows(2) {
            let x = w[1] - w[0];
            s.n += 1;
            let ax = x.abs();
            if ax <= outer {
                let a = pow_p.apply(x);
                let b = pow_pp.apply(x);
                s.at_gamma_u.push(a, b);
                if ax <= cutoff {
                    s.at_u.push(a, b);
                }
            }
        }
        s
    }

    pub fn from_path(
        path: &PathSeries,
        p: f64,
        p_prime: f64,
        cutoff: f64,
        gamma: f64,
    ) -> Result<Self> {
        check_path(path, 1)?;
        let mut total = Self::default();
        for day in path.days() {
            total.merge(&Self::from_day(day, p, p_prime, cutoff, gamma));
        }
        Ok(total)
    }

    pub fn merge(&mut self, other: &Self) {
        self.at_u.merge(&other.at_u);
        self.at_gamma_u.merge(&other.at_gamma_u);
        self.n += other.n;
    }

    fn degenerate(
        &self,
        reason: DegenerateReason,
        statistic: Option<f64>,
        raw_variance: Option<f64>,
    ) -> Error {
        Error::Degenerate(DegenerateSample {
            test: TestKind::InfiniteActivity,
            reason,
            n_increments: self.n,
            n_retained: self.at_u.kept,
            statistic,
            raw_variance,
        })
    }

    fn positive(&self) -> Result<()> {
        let vals = [
            self.at_u.b_p.value(),
            self.at_u.b_p_prime.value(),
            self.at_gamma_u.b_p.value(),
            self.at_gamma_u.b_p_prime.value(),
        ];
        if vals.iter().all(|&v| v > 0.0) {
            Ok(())
        } else {
            Err(self.degenerate(DegenerateReason::ZeroDenominator, None, None))
        }
    }

    /// `S'_n = B(p', gu) B(p, u) / (B(p', u) B(p, gu))`.
    pub fn statistic(&self) -> Result<f64> {
        self.positive()?;
        let (u, g) = (&self.at_u, &self.at_gamma_u);
        Ok((g.b_p_prime.value() * u.b_p.value()) / (u.b_p_prime.value() * g.b_p.value()))
    }

    /// Raw (possibly negative) `V'_n`.
    pub fn variance(&self, p: f64, p_prime: f64, gamma: f64) -> Result<f64> {
        self.positive()?;
        let ratio = |num: &CompensatedSum, a: &CompensatedSum, b: &CompensatedSum| {
            num.value() / (a.value() * b.value())
        };
        let (u, g) = (&self.at_u, &self.at_gamma_u);
        let gp = gamma.powf(-p);
        let gpp = gamma.powf(-p_prime);
        let bracket = ratio(&u.b_2p, &u.b_p, &u.b_p)
            + (1.0 - 2.0 * gp) * ratio(&g.b_2p, &g.b_p, &g.b_p)
            + ratio(&u.b_2p_prime, &u.b_p_prime, &u.b_p_prime)
            + (1.0 - 2.0 * gpp) * ratio(&g.b_2p_prime, &g.b_p_prime, &g.b_p_prime)
            - 2.0 * ratio(&u.b_p_plus_p_prime, &u.b_p, &u.b_p_prime)
            - 2.0 * (1.0 - gp - gpp) * ratio(&g.b_p_plus_p_prime, &g.b_p, &g.b_p_prime);
        Ok(gamma.powf(2.0 * p_prime - 2.0 * p) * bracket)
    }

    pub fn report(
        &self,
        cfg: &InfiniteActivityTestConfig,
        cutoffs: Vec<f64>,
    ) -> Result<TestReport> {
        let statistic = self.statistic()?;
        let raw_variance = self.variance(cfg.p, cfg.p_prime, cfg.gamma)?;
        let variance = raw_variance.max(cfg.variance_floor);
        if !(variance > 0.0) {
            return Err(self.degenerate(
                DegenerateReason::NonPositiveVariance,
                Some(statistic),
                Some(raw_variance),
            ));
        }
        let null_limit = cfg.null_limit();
        let (z_score, critical_value, reject) = decide(
            TestKind::InfiniteActivity,
            statistic,
            null_limit,
            raw_variance,
            variance,
            cfg.level,
        )?;
        Ok(TestReport {
            test: TestKind::InfiniteActivity,
            statistic,
            null_limit,
            variance,
            raw_variance,
            z_score,
            critical_value,
            level: cfg.level,
            reject,
            n_increments_used: self.at_gamma_u.kept,
            n_increments_total: self.n,
            truncation_cutoffs: cutoffs,
        })
    }
}

fn check_path(path: &PathSeries, stride: usize) -> Result<()> {
    if path.len() < 2 {
        return Err(Error::invalid(
            "a statistic needs at least two observations",
        ));
    }
    if !path.days().any(|d| d.len() > stride) {
        return Err(Error::invalid("path too short for the requested stride"));
    }
    if let Some(index) = path.values().iter().position(|x| !x.is_finite()) {
        return Err(Error::NonFinite { index });
    }
    Ok(())
}

fn check_moments(cfg: &FiniteActivityTestConfig, moments: &MomentTable) -> Result<()> {
    if moments.p != cfg.p || moments.k != cfg.k {
        return Err(Error::invalid(
            "moment table does not match (p, k) of the test",
        ));
    }
    Ok(())
}

fn fa_sums(path: &PathSeries, cfg: &FiniteActivityTestConfig) -> Result<(FiniteActivitySums, f64)> {
    cfg.validate()?;
    let cutoff = cfg.truncation.cutoff(path.delta());
    Ok((
        FiniteActivitySums::from_path(path, cfg.p, cfg.k, cutoff)?,
        cutoff,
    ))
}

fn ia_sums(
    path: &PathSeries,
    cfg: &InfiniteActivityTestConfig,
) -> Result<(InfiniteActivitySums, f64)> {
    cfg.validate()?;
    let cutoff = cfg.truncation.cutoff(path.delta());
    Ok((
        InfiniteActivitySums::from_path(path, cfg.p, cfg.p_prime, cutoff, cfg.gamma)?,
        cutoff,
    ))
}

/// `S_n`: truncated power variation at `k delta` over the same at `delta`,
/// both with the cutoff of the base frequency.
pub fn s_n(path: &PathSeries, cfg: &FiniteActivityTestConfig) -> Result<f64> {
    fa_sums(path, cfg)?.0.statistic()
}

pub fn v_n(
    path: &PathSeries,
    cfg: &FiniteActivityTestConfig,
    moments: &MomentTable,
) -> Result<f64> {
    check_moments(cfg, moments)?;
    fa_sums(path, cfg)?.0.variance(moments)
}

/// Rejects finite activity when `S_n < k^{p/2-1} - z_a sqrt(V_n)`.
pub fn test_finite_activity(
    path: &PathSeries,
    cfg: &FiniteActivityTestConfig,
    moments: &MomentTable,
) -> Result<TestReport> {
    let (sums, cutoff) = fa_sums(path, cfg)?;
    sums.report(cfg, moments, vec![cutoff])
}

pub fn s_n_prime(path: &PathSeries, cfg: &InfiniteActivityTestConfig) -> Result<f64> {
    ia_sums(path, cfg)?.0.statistic()
}

pub fn v_n_prime(path: &PathSeries, cfg: &InfiniteActivityTestConfig) -> Result<f64> {
    ia_sums(path, cfg)?
        .0
        .variance(cfg.p, cfg.p_prime, cfg.gamma)
}

/// Rejects infinite activity when `S'_n < gamma^{p'-p} - z_a sqrt(V'_n)`.
pub fn test_infinite_activity(
    path: &PathSeries,
    cfg: &InfiniteActivityTestConfig,
) -> Result<TestReport> {
    let (sums, cutoff) = ia_sums(path, cfg)?;
    sums.report(cfg, vec![cutoff, cfg.gamma * cutoff])
}
