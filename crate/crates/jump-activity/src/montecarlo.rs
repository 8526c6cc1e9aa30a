//! Replicated experiments: rejection-rate tables, truncation-index sweeps,
//! standardized-statistic samples and sampling-frequency sweeps.
//!
//! Replicate `r` always simulates from seed `replicate_seed(base_seed, r)`,
//! and per-replicate results are collected in replicate order before being
//! tallied, so every number below is independent of the worker count.

use std::fmt;
use std::str::FromStr;

use jump_activity_core::moments::MomentTable;
use jump_activity_core::normal;
use jump_activity_core::seconds_to_years;
use jump_activity_core::simulator::rng::replicate_seed;
use jump_activity_core::simulator::{
    calibrate_theta, simulate_path, JumpComponentSpec, NoiseSpec, SimulationConfig, SvParams,
};
use jump_activity_core::statistics::{FiniteActivitySums, InfiniteActivitySums};
use jump_activity_core::{
    FiniteActivityTestConfig, InfiniteActivityTestConfig, PathSeries, TestKind, TestOutcome,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    /// Finite-activity data, finite-activity test.
    FaNull,
    /// Infinite-activity data, infinite-activity test.
    IaNull,
    /// Finite-activity data, infinite-activity test.
    FaAlt,
    /// Infinite-activity data, finite-activity test.
    IaAlt,
    /// Jump-free data with additive noise, both tests.
    Noise,
}

impl Scenario {
    pub const ALL: [Scenario; 5] = [
        Scenario::FaNull,
        Scenario::IaNull,
        Scenario::FaAlt,
        Scenario::IaAlt,
        Scenario::Noise,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Scenario::FaNull => "fa_null",
            Scenario::IaNull => "ia_null",
            Scenario::FaAlt => "fa_alt",
            Scenario::IaAlt => "ia_alt",
            Scenario::Noise => "noise",
        }
    }

    /// Tests evaluated on each replicate.
    pub fn tests(self) -> &'static [TestKind] {
        match self {
            Scenario::FaNull | Scenario::IaAlt => &[TestKind::FiniteActivity],
            Scenario::IaNull | Scenario::FaAlt => &[TestKind::InfiniteActivity],
            Scenario::Noise => &[TestKind::FiniteActivity, TestKind::InfiniteActivity],
        }
    }

    pub fn is_null(self) -> bool {
        matches!(self, Scenario::FaNull | Scenario::IaNull)
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scenario {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        Scenario::ALL
            .into_iter()
            .find(|x| x.as_str() == s)
            .ok_or_else(|| Error::Input(format!("unknown scenario `{s}`")))
    }
}

/// Jump intensity of a scenario: a tail probability for the stable
/// component, an arrival rate for the compound Poisson one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Intensity {
    None,
    Low,
    Medium,
    High,
}

impl Intensity {
    pub fn as_str(self) -> &'static str {
        match self {
            Intensity::None => "none",
            Intensity::Low => "low",
            Intensity::Medium => "medium",
            Intensity::High => "high",
        }
    }

    /// `P(|theta dY| >= 4 sqrt(eta delta))` targeted by the stable scale.
    pub fn tail_probability(self) -> Option<f64> {
        match self {
            Intensity::None => None,
            Intensity::Low => Some(0.01),
            Intensity::Medium => Some(0.05),
            Intensity::High => Some(0.10),
        }
    }

    /// Compound Poisson jumps per trading day.
    pub fn jumps_per_day(self) -> f64 {
        match self {
            Intensity::None => 0.0,
            Intensity::Low => 2.0,
            Intensity::Medium => 10.0,
            Intensity::High => 50.0,
        }
    }
}

impl fmt::Display for Intensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Intensity {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        [
            Intensity::None,
            Intensity::Low,
            Intensity::Medium,
            Intensity::High,
        ]
        .into_iter()
        .find(|x| x.as_str() == s)
        .ok_or_else(|| Error::Input(format!("unknown intensity `{s}`")))
    }
}

/// Design of a Monte Carlo experiment.
///
/// The cutoff of every replicate is `alpha * sqrt(eta) * delta^varpi`, with
/// `varpi` taken from the test configurations (their `alpha` and
/// `sigma_ref` are ignored).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentGrid {
    pub scenario: Scenario,
    pub intensities: Vec<Intensity>,
    pub alphas: Vec<f64>,
    /// Sampling intervals in seconds of trading time.
    pub delta_seconds: Vec<f64>,
    pub horizon_days: u32,
    pub replicates: u32,
    pub levels: Vec<f64>,
    pub base_seed: u64,
    pub sv: SvParams,
    /// Stability index of the infinite-activity component.
    pub beta: f64,
    /// Noise overlay; used by every scenario, required by `Noise`.
    pub noise: NoiseSpec,
    pub finite: FiniteActivityTestConfig,
    pub infinite: InfiniteActivityTestConfig,
    /// Worker threads; 0 lets the pool decide.
    pub workers: usize,
}

impl Default for ExperimentGrid {
    fn default() -> Self {
        Self {
            scenario: Scenario::FaNull,
            intensities: vec![Intensity::Medium],
            alphas: vec![6.0, 7.0, 8.0, 9.0, 10.0, 12.0, 15.0],
            delta_seconds: vec![1.0],
            horizon_days: 1,
            replicates: 1000,
            levels: vec![0.10, 0.05],
            base_seed: 20_090_101,
            sv: SvParams::default(),
            beta: 1.0,
            noise: NoiseSpec::default(),
            finite: FiniteActivityTestConfig::default(),
            infinite: InfiniteActivityTestConfig::default(),
            workers: 0,
        }
    }
}

impl ExperimentGrid {
    pub fn validate(&self) -> Result<(), Error> {
        if self.replicates < 1 {
            return Err(Error::Input("replicates must be at least 1".into()));
        }
        if self.alphas.is_empty() || self.alphas.iter().any(|a| !(*a > 0.0)) {
            return Err(Error::Input("alphas must be non-empty and positive".into()));
        }
        if self.delta_seconds.is_empty() || self.intensities.is_empty() || self.levels.is_empty() {
            return Err(Error::Input(
                "sampling intervals, intensities and levels must be non-empty".into(),
            ));
        }
        if self.levels.iter().any(|l| !(*l > 0.0 && *l < 1.0)) {
            return Err(Error::Input("levels must lie in (0, 1)".into()));
        }
        self.finite.validate()?;
        self.infinite.validate()?;
        if self.finite.k < 2 {
            return Err(Error::Input("the finite-activity test needs k >= 2".into()));
        }
        Ok(())
    }

    /// Data-generating process of one replicate.
    pub fn simulation_config(
        &self,
        intensity: Intensity,
        delta_seconds: f64,
        replicate: u64,
    ) -> Result<SimulationConfig, Error> {
        let delta = seconds_to_years(delta_seconds);
        let jumps = match (self.scenario, intensity) {
            (_, Intensity::None) | (Scenario::Noise, _) => JumpComponentSpec::none(),
            (Scenario::FaNull | Scenario::FaAlt, i) => {
                JumpComponentSpec::compound_poisson(i.jumps_per_day())
            }
            (Scenario::IaNull | Scenario::IaAlt, i) => {
                let tp = i
                    .tail_probability()
                    .expect("intensity has a tail probability");
                JumpComponentSpec::stable(
                    self.beta,
                    calibrate_theta(tp, self.beta, delta, self.sv.eta)?,
                )
            }
        };
        let cfg = SimulationConfig {
            sv: self.sv,
            jumps,
            noise: self.noise,
            delta,
            horizon: self.horizon_days,
            x0: 1.0,
            seed: replicate_seed(self.base_seed, replicate),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn pool(&self) -> Result<rayon::ThreadPool, Error> {
        rayon::ThreadPoolBuilder::new()
            .num_threads(self.workers)
            .build()
            .map_err(|e| Error::Input(format!("cannot start worker pool: {e}")))
    }

    /// Per-replicate outcomes for one `(intensity, delta)` cell, in
    /// replicate order.
    pub fn replicate_outcomes(
        &self,
        intensity: Intensity,
        delta_seconds: f64,
    ) -> Result<Vec<ReplicateOutcome>, Error> {
        self.validate()?;
        let moments = MomentTable::new(self.finite.p, self.finite.k)?;
        let pool = self.pool()?;
        pool.install(|| {
            (0..u64::from(self.replicates))
                .into_par_iter()
                .map(|r| {
                    let path =
                        simulate_path(&self.simulation_config(intensity, delta_seconds, r)?)?;
                    self.evaluate(&path, &moments)
                })
                .collect()
        })
    }

    /// Every configured test at every `alpha` and level on one path.
    pub fn evaluate(
        &self,
        path: &PathSeries,
        moments: &MomentTable,
    ) -> Result<ReplicateOutcome, Error> {
        let sigma = self.sv.eta.sqrt();
        let delta = path.delta();
        let mut cells = Vec::new();
        for &alpha in &self.alphas {
            for &test in self.scenario.tests() {
                let outcomes = match test {
                    TestKind::FiniteActivity => {
                        let u = alpha * sigma * delta.powf(self.finite.truncation.varpi);
                        let sums =
                            FiniteActivitySums::from_path(path, self.finite.p, self.finite.k, u)?;
                        self.levels
                            .iter()
                            .map(|&level| {
                                let cfg = FiniteActivityTestConfig {
                                    level,
                                    ..self.finite
                                };
                                TestOutcome::from_result(sums.report(&cfg, moments, vec![u]))
                            })
                            .collect::<Result<Vec<_>, _>>()?
                    }
                    TestKind::InfiniteActivity => {
                        let c = &self.infinite;
                        let u = alpha * sigma * delta.powf(c.truncation.varpi);
                        let sums =
                            InfiniteActivitySums::from_path(path, c.p, c.p_prime, u, c.gamma)?;
                        self.levels
                            .iter()
                            .map(|&level| {
                                let cfg = InfiniteActivityTestConfig { level, ..*c };
                                TestOutcome::from_result(sums.report(&cfg, vec![u, c.gamma * u]))
                            })
                            .collect::<Result<Vec<_>, _>>()?
                    }
                };
                cells.push(CellOutcome {
                    alpha,
                    test,
                    outcomes,
                });
            }
        }
        Ok(ReplicateOutcome { cells })
    }
}

/// Outcomes of one test at one `alpha` on one replicate, one per level.
#[derive(Debug, Clone, PartialEq)]
pub struct CellOutcome {
    pub alpha: f64,
    pub test: TestKind,
    pub outcomes: Vec<TestOutcome>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplicateOutcome {
    pub cells: Vec<CellOutcome>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RejectionRow {
    pub scenario: Scenario,
    pub statistic: TestKind,
    pub intensity: Intensity,
    pub level: f64,
    pub alpha: f64,
    pub delta_seconds: f64,
    pub replicates: u32,
    pub rejections: u32,
    pub acceptances: u32,
    pub degenerate: u32,
    /// Rejections over decided replicates (degenerate ones excluded).
    pub rate: f64,
    /// `sqrt(rate (1 - rate) / decided)`.
    pub std_error: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RejectionTable {
    pub rows: Vec<RejectionRow>,
}

impl RejectionTable {
    pub fn find(
        &self,
        intensity: Intensity,
        statistic: TestKind,
        level: f64,
        alpha: f64,
        delta_seconds: f64,
    ) -> Option<&RejectionRow> {
        self.rows.iter().find(|r| {
            r.intensity == intensity
                && r.statistic == statistic
                && r.level == level
                && r.alpha == alpha
                && r.delta_seconds == delta_seconds
        })
    }
}

/// Runs every cell of the grid and tallies rejections per
/// `(intensity, delta, test, alpha, level)`.
pub fn run_grid(grid: &ExperimentGrid) -> Result<RejectionTable, Error> {
    grid.validate()?;
    let mut table = RejectionTable::default();
    for &intensity in &grid.intensities {
        for &delta_seconds in &grid.delta_seconds {
            let reps = grid.replicate_outcomes(intensity, delta_seconds)?;
            let n_cells = reps.first().map_or(0, |r| r.cells.len());
            for c in 0..n_cells {
                let (alpha, test) = (reps[0].cells[c].alpha, reps[0].cells[c].test);
                for (li, &level) in grid.levels.iter().enumerate() {
                    let (mut rej, mut acc, mut deg) = (0u32, 0u32, 0u32);
                    for rep in &reps {
                        match rep.cells[c].outcomes[li].rejects() {
                            Some(true) => rej += 1,
                            Some(false) => acc += 1,
                            None => deg += 1,
                        }
                    }
                    let decided = rej + acc;
                    let rate = if decided > 0 {
                        f64::from(rej) / f64::from(decided)
                    } else {
                        f64::NAN
                    };
                    let std_error = if decided > 0 {
                        (rate * (1.0 - rate) / f64::from(decided)).sqrt()
                    } else {
                        f64::NAN
                    };
                    table.rows.push(RejectionRow {
                        scenario: grid.scenario,
                        statistic: test,
                        intensity,
                        level,
                        alpha,
                        delta_seconds,
                        replicates: grid.replicates,
                        rejections: rej,
                        acceptances: acc,
                        degenerate: deg,
                        rate,
                        std_error,
                    });
                }
            }
        }
    }
    Ok(table)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub statistic: TestKind,
    pub intensity: Intensity,
    pub alpha: f64,
    /// Mean over replicates where the statistic is defined.
    pub mean: f64,
    pub sd: f64,
    pub valid: u32,
    pub degenerate: u32,
}

fn mean_sd(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = if xs.len() > 1 {
        xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (mean, var.sqrt())
}

/// Mean statistic per truncation index, for each intensity of the grid, at
/// the grid's first sampling interval.
pub fn sweep_alpha(grid: &ExperimentGrid) -> Result<Vec<SweepRow>, Error> {
    grid.validate()?;
    let delta = grid.delta_seconds[0];
    let mut rows = Vec::new();
    for &intensity in &grid.intensities {
        let reps = grid.replicate_outcomes(intensity, delta)?;
        let n_cells = reps.first().map_or(0, |r| r.cells.len());
        for c in 0..n_cells {
            let values: Vec<f64> = reps
                .iter()
                .filter_map(|r| r.cells[c].outcomes[0].statistic())
                .collect();
            let (mean, sd) = mean_sd(&values);
            rows.push(SweepRow {
                statistic: reps[0].cells[c].test,
                intensity,
                alpha: reps[0].cells[c].alpha,
                mean,
                sd,
                valid: values.len() as u32,
                degenerate: grid.replicates - values.len() as u32,
            });
        }
    }
    Ok(rows)
}

/// Standardized statistics `(S - limit) / sqrt(V)` under a null scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StandardizedSample {
    pub statistic: TestKind,
    pub z: Vec<f64>,
    pub mean: f64,
    pub variance: f64,
    pub skewness: f64,
    /// Kolmogorov–Smirnov distance to the standard normal.
    pub ks_distance: f64,
    pub excluded: u32,
}

/// Kolmogorov–Smirnov distance between a sample and a continuous CDF.
pub fn ks_distance(sample: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut xs = sample.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter().enumerate().fold(0.0, |d, (i, &x)| {
        let f = cdf(x);
        d.max(f - i as f64 / n).max((i + 1) as f64 / n - f)
    })
}

/// Standardized statistics for the grid's first intensity, `alpha` and
/// sampling interval. Only null scenarios have a standard normal limit.
pub fn standardized_histogram(grid: &ExperimentGrid) -> Result<StandardizedSample, Error> {
    if !grid.scenario.is_null() {
        return Err(Error::Input(format!(
            "{} is not a null scenario",
            grid.scenario
        )));
    }
    let g = ExperimentGrid {
        alphas: vec![grid.alphas[0]],
        levels: vec![grid.levels[0]],
        ..grid.clone()
    };
    let reps = g.replicate_outcomes(g.intensities[0], g.delta_seconds[0])?;
    let test = g.scenario.tests()[0];
    let z: Vec<f64> = reps
        .iter()
        .filter_map(|r| r.cells[0].outcomes[0].report().map(|rep| rep.z_score))
        .filter(|z| z.is_finite())
        .collect();
    let excluded = g.replicates - z.len() as u32;
    let (mean, sd) = mean_sd(&z);
    let variance = sd * sd;
    let n = z.len() as f64;
    let skewness = z.iter().map(|x| ((x - mean) / sd).powi(3)).sum::<f64>() / n;
    Ok(StandardizedSample {
        statistic: test,
        ks_distance: ks_distance(&z, normal::cdf),
        z,
        mean,
        variance,
        skewness,
        excluded,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyRow {
    pub statistic: TestKind,
    pub intensity: Intensity,
    pub delta_seconds: f64,
    pub alpha: f64,
    pub level: f64,
    pub rate: f64,
    pub std_error: f64,
    pub decided: u32,
    pub degenerate: u32,
    pub mean: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
}

fn quantile_sorted(xs: &[f64], q: f64) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    let pos = q * (xs.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    xs[lo] + (pos - lo as f64) * (xs[hi] - xs[lo])
}

/// Rejection rates and statistic quartiles per sampling interval, at fixed
/// horizon, for the grid's first `alpha`.
pub fn frequency_sweep(grid: &ExperimentGrid) -> Result<Vec<FrequencyRow>, Error> {
    if grid.delta_seconds.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::Input("sampling intervals must be sorted".into()));
    }
    let g = ExperimentGrid {
        alphas: vec![grid.alphas[0]],
        ..grid.clone()
    };
    g.validate()?;
    let mut rows = Vec::new();
    for &intensity in &g.intensities {
        for &delta_seconds in &g.delta_seconds {
            let reps = g.replicate_outcomes(intensity, delta_seconds)?;
            for (c, cell) in reps[0].cells.iter().enumerate() {
                let mut stats: Vec<f64> = reps
                    .iter()
                    .filter_map(|r| r.cells[c].outcomes[0].statistic())
                    .collect();
                stats.sort_by(f64::total_cmp);
                let (mean, _) = mean_sd(&stats);
                for (li, &level) in g.levels.iter().enumerate() {
                    let decisions: Vec<bool> = reps
                        .iter()
                        .filter_map(|r| r.cells[c].outcomes[li].rejects())
                        .collect();
                    let decided = decisions.len() as u32;
                    let rate =
                        decisions.iter().filter(|&&b| b).count() as f64 / f64::from(decided.max(1));
                    rows.push(FrequencyRow {
                        statistic: cell.test,
                        intensity,
                        delta_seconds,
                        alpha: cell.alpha,
                        level,
                        rate,
                        std_error: (rate * (1.0 - rate) / f64::from(decided.max(1))).sqrt(),
                        decided,
                        degenerate: g.replicates - decided,
                        mean,
                        q1: quantile_sorted(&stats, 0.25),
                        median: quantile_sorted(&stats, 0.5),
                        q3: quantile_sorted(&stats, 0.75),
                    });
                }
            }
        }
    }
    Ok(rows)
}
