//! Data-generating processes for Monte Carlo work: a square-root stochastic
//! volatility diffusion with variance jumps, plus a symmetric stable or
//! compound Poisson jump component, with optional microstructure noise.

mod noise;
pub mod rng;
mod stable;

use alloc::vec::Vec;

use rand::Rng;
use rand_distr::{Distribution, Open01, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};

pub use noise::{
    apply_additive_noise, apply_additive_noise_with, apply_rounding, NoiseKind, NoiseLaw, NoiseSpec,
};
pub use stable::{calibrate_theta, jump_tail_probability, stable_increment, stable_tail};

use crate::pathseries::PathSeries;
use crate::{Error, Result, DAYS_PER_YEAR};
use rng::{substream, SimRng, NOISE_SALT};
use stable::stable_increment_unchecked;
// inherent f64 math shadows this whenever std is linked
#[allow(unused_imports)]
use num_traits::Float;

/// Stochastic volatility parameters. Rates are per year.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SvParams {
    /// Long-run variance.
    pub eta: f64,
    /// Mean-reversion speed.
    pub chi: f64,
    /// Volatility of variance.
    pub xi: f64,
    /// Correlation between the price and variance Brownian motions.
    pub rho_bar: f64,
    /// Initial variance; `None` starts at `eta`.
    pub v0: Option<f64>,
    /// Intensity of the compound Poisson jumps in the variance.
    pub variance_jump_rate: f64,
    pub variance_jump_low: f64,
    pub variance_jump_high: f64,
}

impl Default for SvParams {
    fn default() -> Self {
        Self {
            eta: 0.0625,
            chi: 5.0,
            xi: 0.5,
            rho_bar: -0.5,
            v0: None,
            variance_jump_rate: 12.0,
            variance_jump_low: -0.30,
            variance_jump_high: 0.30,
        }
    }
}

impl SvParams {
    /// Constant volatility `sqrt(eta)`: no mean reversion, no vol-of-vol,
    /// no variance jumps.
    pub fn constant(eta: f64) -> Self {
        Self {
            eta,
            chi: 0.0,
            xi: 0.0,
            rho_bar: 0.0,
            v0: Some(eta),
            variance_jump_rate: 0.0,
            ..Self::default()
        }
    }

    pub fn initial_variance(&self) -> f64 {
        self.v0.unwrap_or(self.eta)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eta > 0.0) {
            return Err(Error::invalid("eta must be positive"));
        }
        if !(self.chi >= 0.0 && self.xi >= 0.0) {
            return Err(Error::invalid("chi and xi must be non-negative"));
        }
        if !(self.rho_bar.abs() <= 1.0) {
            return Err(Error::invalid("rho_bar must lie in [-1, 1]"));
        }
        if !(self.initial_variance() >= 0.0) {
            return Err(Error::invalid("initial variance must be non-negative"));
        }
        if !(self.variance_jump_rate >= 0.0 && self.variance_jump_low <= self.variance_jump_high) {
            return Err(Error::invalid(
                "variance jump rate must be non-negative and low <= high",
            ));
        }
        Ok(())
    }
}

/// Normal law with mean `mean` and sd `sd`, conditioned on `|x| > min_abs`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncatedNormal {
    pub mean: f64,
    pub sd: f64,
    pub min_abs: f64,
}

impl Default for TruncatedNormal {
    fn default() -> Self {
        Self {
            mean: 0.0,
            sd: 0.10,
            min_abs: 0.05,
        }
    }
}

impl TruncatedNormal {
    pub fn validate(&self) -> Result<()> {
        if !(self.sd > 0.0 && self.min_abs >= 0.0 && self.mean.is_finite()) {
            return Err(Error::invalid(
                "truncated normal needs sd > 0 and min_abs >= 0",
            ));
        }
        // acceptance probability of the rejection sampler
        let accept = 1.0
            - (crate::normal::cdf((self.min_abs - self.mean) / self.sd)
                - crate::normal::cdf((-self.min_abs - self.mean) / self.sd));
        if accept < 1e-6 {
            return Err(Error::invalid("truncation region has negligible mass"));
        }
        Ok(())
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        loop {
            let x = self.mean + self.sd * rng.sample::<f64, _>(StandardNormal);
            if x.abs() > self.min_abs {
                return x;
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JumpKind {
    #[default]
    None,
    Stable,
    CompoundPoisson,
}

/// Jump component `theta dY` of the price.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct JumpComponentSpec {
    pub kind: JumpKind,
    /// Stability index, for `Stable`.
    pub beta: f64,
    /// Scale multiplier applied to `dY`.
    pub theta: f64,
    /// Jumps per trading day, for `CompoundPoisson`.
    pub lambda: f64,
    pub size_law: TruncatedNormal,
}

impl Default for JumpComponentSpec {
    fn default() -> Self {
        Self {
            kind: JumpKind::None,
            beta: 1.0,
            theta: 0.0,
            lambda: 0.0,
            size_law: TruncatedNormal::default(),
        }
    }
}

impl JumpComponentSpec {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn stable(beta: f64, theta: f64) -> Self {
        Self {
            kind: JumpKind::Stable,
            beta,
            theta,
            ..Self::default()
        }
    }

    pub fn compound_poisson(lambda_per_day: f64) -> Self {
        Self {
            kind: JumpKind::CompoundPoisson,
            theta: 1.0,
            lambda: lambda_per_day,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.theta >= 0.0 && self.theta.is_finite()) {
            return Err(Error::invalid("theta must be non-negative"));
        }
        match self.kind {
            JumpKind::None => Ok(()),
            JumpKind::Stable if self.beta > 0.0 && self.beta < 2.0 => Ok(()),
            JumpKind::Stable => Err(Error::invalid("stability index must lie in (0, 2)")),
            JumpKind::CompoundPoisson if self.lambda >= 0.0 && self.lambda.is_finite() => {
                self.size_law.validate()
            }
            JumpKind::CompoundPoisson => Err(Error::invalid("jump rate must be non-negative")),
        }
    }
}

/// Full description of a simulated sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimulationConfig {
    pub sv: SvParams,
    pub jumps: JumpComponentSpec,
    pub noise: NoiseSpec,
    /// Sampling interval in years (one trading day is 1/252).
    pub delta: f64,
    /// Number of trading days.
    pub horizon: u32,
    pub x0: f64,
    pub seed: u64,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            sv: SvParams::default(),
            jumps: JumpComponentSpec::none(),
            noise: NoiseSpec::default(),
            delta: crate::seconds_to_years(1.0),
            horizon: 1,
            x0: 1.0,
            seed: 0,
        }
    }
}

impl SimulationConfig {
    /// Observation steps per trading day; `delta` must divide the day.
    pub fn steps_per_day(&self) -> Result<usize> {
        let steps = 1.0 / (DAYS_PER_YEAR * self.delta);
        let rounded = steps.round();
        if !(rounded >= 1.0) || (steps - rounded).abs() > 1e-6 * rounded {
            return Err(Error::invalid(
                "sampling interval must divide the trading day",
            ));
        }
        Ok(rounded as usize)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(Error::invalid("delta must be positive"));
        }
        if self.horizon < 1 {
            return Err(Error::invalid("horizon must be at least one day"));
        }
        self.steps_per_day()?;
        self.sv.validate()?;
        self.jumps.validate()?;
        self.noise.validate()
    }
}

/// A simulated path with its latent variance (one value per observation).
#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedPath {
    pub path: PathSeries,
    pub variance: Vec<f64>,
}

/// Correlated Brownian increments `(dW, dB)` over `dt` with correlation `rho`.
#[inline]
pub fn correlated_shocks<R: Rng + ?Sized>(rho: f64, dt: f64, rng: &mut R) -> (f64, f64) {
    let sq = dt.sqrt();
    let z1: f64 = rng.sample(StandardNormal);
    let z2: f64 = rng.sample(StandardNormal);
    (sq * z1, sq * (rho * z1 + (1.0 - rho * rho).sqrt() * z2))
}

/// Poisson count; Knuth's product method for small means.
fn poisson_count<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    if mean < 30.0 {
        let limit = (-mean).exp();
        let mut count = 0;
        let mut prod: f64 = rng.sample(Open01);
        while prod > limit {
            count += 1;
            prod *= rng.sample::<f64, _>(Open01);
        }
        return count;
    }
    Poisson::new(mean)
        .map(|d| d.sample(rng) as u64)
        .unwrap_or(0)
}

/// Sum of a Poisson(`lambda_per_day * dt_days`) number of i.i.d. jumps.
pub fn compound_poisson_increment<R: Rng + ?Sized>(
    lambda_per_day: f64,
    size_law: &TruncatedNormal,
    dt_days: f64,
    rng: &mut R,
) -> f64 {
    let n = poisson_count(lambda_per_day * dt_days, rng);
    (0..n).map(|_| size_law.sample(rng)).sum()
}

/// Simulates the configured sample.
pub fn simulate_path(cfg: &SimulationConfig) -> Result<PathSeries> {
    Ok(simulate_detailed(cfg)?.path)
}

/// Euler scheme at step `delta`. Variance uses full truncation (drift and
/// diffusion evaluated at `max(v, 0)`), then variance jumps, then a clamp at
/// zero. Day `d` draws from stream `d` of the seed, so each day is
/// reproducible on its own. The first observation of a day repeats the
/// last of the previous day.
pub fn simulate_detailed(cfg: &SimulationConfig) -> Result<SimulatedPath> {
    cfg.validate()?;
    let n = cfg.steps_per_day()?;
    let dt = cfg.delta;
    let dt_days = dt * DAYS_PER_YEAR;
    let sv = &cfg.sv;
    let jumps = &cfg.jumps;
    let days = cfg.horizon as usize;

    let mut values = Vec::with_capacity(days * (n + 1));
    let mut variance = Vec::with_capacity(days * (n + 1));
    let mut day_starts = Vec::with_capacity(days);
    let mut x = cfg.x0;
    let mut v = sv.initial_variance();
    let vj_mean = sv.variance_jump_rate * dt;
    let vj_width = sv.variance_jump_high - sv.variance_jump_low;
    // a zero scale draws nothing, so the path equals the jump-free one
    let jump_kind = if jumps.theta == 0.0 {
        JumpKind::None
    } else {
        jumps.kind
    };

    for day in 0..days {
        let mut rng: SimRng = substream(cfg.seed, day as u64);
        day_starts.push(values.len());
        values.push(x);
        variance.push(v);
        for _ in 0..n {
            let vp = v.max(0.0);
            let sd = vp.sqrt();
            let (dw, db) = correlated_shocks(sv.rho_bar, dt, &mut rng);
            let jump = match jump_kind {
                JumpKind::None => 0.0,
                JumpKind::Stable => {
                    jumps.theta * stable_increment_unchecked(jumps.beta, dt, &mut rng)
                }
                JumpKind::CompoundPoisson => {
                    jumps.theta
                        * compound_poisson_increment(
                            jumps.lambda,
                            &jumps.size_law,
                            dt_days,
                            &mut rng,
                        )
                }
            };
            x += sd * dw + jump;
            v += sv.chi * (sv.eta - vp) * dt + sv.xi * sd * db;
            for _ in 0..poisson_count(vj_mean, &mut rng) {
                v += sv.variance_jump_low + vj_width * rng.sample::<f64, _>(Open01);
            }
            v = v.max(0.0);
            values.push(x);
            variance.push(v);
        }
    }
    let path = PathSeries::with_days(values, dt, day_starts)?;
    let path = match cfg.noise.kind {
        NoiseKind::None => path,
        NoiseKind::Additive => {
            let mut rng = substream(cfg.seed ^ NOISE_SALT, 0);
            apply_additive_noise_with(&path, cfg.noise.additive_sd, cfg.noise.law, &mut rng)?
        }
        NoiseKind::Rounding => apply_rounding(&path, cfg.noise.tick, cfg.noise.price_scale)?,
    };
    Ok(SimulatedPath { path, variance })
}
