//! The empirical procedure for real data: estimate each day's volatility,
//! truncate each day at a multiple of its own volatility, add the power
//! variations across days, and run both tests for a range of truncation
//! indices.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::moments::MomentTable;
use crate::pathseries::PathSeries;
use crate::statistics::{
    FiniteActivitySums, FiniteActivityTestConfig, InfiniteActivitySums, InfiniteActivityTestConfig,
    TestOutcome,
};
use crate::sum::CompensatedSum;
use crate::{Error, Result};
// inherent f64 math shadows this whenever std is linked
#[allow(unused_imports)]
use num_traits::Float;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DayVolatility {
    pub day: usize,
    /// Annualized volatility of the continuous part.
    pub sigma_hat: f64,
    /// Increments at or below the pre-estimation cutoff.
    pub n_used: usize,
}

impl DayVolatility {
    /// No increment survived, so the day cannot be truncated relative to
    /// its volatility.
    pub fn is_zero(&self) -> bool {
        self.sigma_hat == 0.0
    }
}

/// Truncated realized volatility of one day, keeping increments with
/// `|dX| <= sqrt(delta)` (four standard deviations at 25% annualized
/// volatility), annualized by the day's length `n * delta`.
pub fn estimate_day_volatility(day: &[f64], delta: f64, day_index: usize) -> Result<DayVolatility> {
    if day.len() < 2 {
        return Err(Error::invalid("a day needs at least two observations"));
    }
    if !(delta > 0.0) {
        return Err(Error::invalid("sampling interval must be positive"));
    }
    let cutoff = delta.sqrt();
    let mut rv = CompensatedSum::new();
    let mut n_used = 0;
    for w in day.windows(2) {
        let x = w[1] - w[0];
        if !x.is_finite() {
            return Err(Error::NonFinite { index: day_index });
        }
        if x.abs() <= cutoff {
            rv.push(x * x);
            n_used += 1;
        }
    }
    let span = (day.len() - 1) as f64 * delta;
    Ok(DayVolatility {
        day: day_index,
        sigma_hat: (rv.value() / span).sqrt(),
        n_used,
    })
}

/// Both tests at one truncation index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaResult {
    pub alpha: f64,
    pub finite_activity: TestOutcome,
    pub infinite_activity: TestOutcome,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineResult {
    pub day_volatility: Vec<DayVolatility>,
    /// Days left out because their volatility estimate is zero.
    pub excluded_days: Vec<usize>,
    pub by_alpha: Vec<AlphaResult>,
}

/// Runs both tests for every `alpha`, with day `d` truncated at
/// `alpha * sigma_hat_d * delta^varpi` (`varpi` taken from each config).
/// The `alpha` and `sigma_ref` fields of the configs' truncation specs are
/// ignored. Reported cutoffs are averages over the included days.
pub fn run_empirical_pipeline(
    path: &PathSeries,
    fa_cfg: &FiniteActivityTestConfig,
    ia_cfg: &InfiniteActivityTestConfig,
    alphas: &[f64],
) -> Result<PipelineResult> {
    fa_cfg.validate()?;
    ia_cfg.validate()?;
    if alphas.iter().any(|a| !(*a > 0.0 && a.is_finite())) {
        return Err(Error::invalid("truncation indices must be positive"));
    }
    let moments = MomentTable::new(fa_cfg.p, fa_cfg.k)?;
    let delta = path.delta();

    let mut day_volatility = Vec::with_capacity(path.n_days());
    let mut excluded_days = Vec::new();
    for (d, day) in path.days().enumerate() {
        if day.len() < 2 {
            excluded_days.push(d);
            continue;
        }
        let vol = estimate_day_volatility(day, delta, d)?;
        if vol.is_zero() {
            excluded_days.push(d);
        }
        day_volatility.push(vol);
    }
    let included: Vec<&DayVolatility> = day_volatility.iter().filter(|v| !v.is_zero()).collect();
    let fa_scale = delta.powf(fa_cfg.truncation.varpi);
    let ia_scale = delta.powf(ia_cfg.truncation.varpi);

    let mut by_alpha = Vec::with_capacity(alphas.len());
    for &alpha in alphas {
        let mut fa = FiniteActivitySums::default();
        let mut ia = InfiniteActivitySums::default();
        let mut fa_cut = CompensatedSum::new();
        let mut ia_cut = CompensatedSum::new();
        for vol in &included {
            let day = path.day(vol.day);
            let u_fa = alpha * vol.sigma_hat * fa_scale;
            let u_ia = alpha * vol.sigma_hat * ia_scale;
            fa.merge(&FiniteActivitySums::from_day(day, fa_cfg.p, fa_cfg.k, u_fa));
            ia.merge(&InfiniteActivitySums::from_day(
                day,
                ia_cfg.p,
                ia_cfg.p_prime,
                u_ia,
                ia_cfg.gamma,
            ));
            fa_cut.push(u_fa);
            ia_cut.push(u_ia);
        }
        let days = included.len().max(1) as f64;
        let u_fa = fa_cut.value() / days;
        let u_ia = ia_cut.value() / days;
        let finite_activity =
            TestOutcome::from_result(fa.report(fa_cfg, &moments, alloc::vec![u_fa]))?;
        let infinite_activity =
            TestOutcome::from_result(ia.report(ia_cfg, alloc::vec![u_ia, ia_cfg.gamma * u_ia]))?;
        by_alpha.push(AlphaResult {
            alpha,
            finite_activity,
            infinite_activity,
        });
    }
    Ok(PipelineResult {
        day_volatility,
        excluded_days,
        by_alpha,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulator::{simulate_path, JumpComponentSpec, SimulationConfig, SvParams};
    use crate::statistics::{test_finite_activity, test_infinite_activity};
    use crate::TruncationSpec;
    use alloc::vec;

    fn brownian(seed: u64, days: u32) -> PathSeries {
        let cfg = SimulationConfig {
            sv: SvParams::constant(0.0625),
            jumps: JumpComponentSpec::none(),
            horizon: days,
            seed,
            ..Default::default()
        };
        simulate_path(&cfg).unwrap()
    }

    #[test]
    fn constant_day_has_zero_volatility() {
        let v = estimate_day_volatility(&[1.0; 50], 1e-6, 0).unwrap();
        assert!(v.is_zero());
        assert_eq!(v.n_used, 49);
        assert!(estimate_day_volatility(&[1.0], 1e-6, 0).is_err());
    }

    #[test]
    fn recovers_known_volatility() {
        let p = brownian(5, 1);
        let v = estimate_day_volatility(p.day(0), p.delta(), 0).unwrap();
        assert!((v.sigma_hat - 0.25).abs() < 0.05 * 0.25, "{}", v.sigma_hat);
    }

    #[test]
    fn large_jump_is_ignored() {
        let p = brownian(6, 1);
        let base = estimate_day_volatility(p.day(0), p.delta(), 0).unwrap();
        let mut values = p.values().to_vec();
        let mid = values.len() / 2;
        for x in &mut values[mid..] {
            *x += 0.05;
        }
        let jumped = estimate_day_volatility(&values, p.delta(), 0).unwrap();
        // the jump increment is dropped and the day loses one kept increment
        assert_eq!(jumped.n_used + 1, base.n_used);
        let kept_without_mid: f64 = p
            .day(0)
            .windows(2)
            .enumerate()
            .filter(|(i, w)| *i != mid - 1 && (w[1] - w[0]).abs() <= p.delta().sqrt())
            .map(|(_, w)| (w[1] - w[0]).powi(2))
            .sum();
        let expected = (kept_without_mid / ((values.len() - 1) as f64 * p.delta())).sqrt();
        // shifting by 0.05 perturbs the recomputed differences in the last ulps
        assert!((jumped.sigma_hat - expected).abs() < 1e-9 * expected);
        assert!((jumped.sigma_hat - base.sigma_hat).abs() < 1e-3 * base.sigma_hat);
    }

    #[test]
    fn single_day_matches_direct_statistics() {
        let p = brownian(8, 1);
        let fa = FiniteActivityTestConfig::default();
        let ia = InfiniteActivityTestConfig::default();
        let res = run_empirical_pipeline(&p, &fa, &ia, &[6.0, 10.0]).unwrap();
        let sigma = res.day_volatility[0].sigma_hat;
        let m = MomentTable::new(4.0, 2).unwrap();
        for row in &res.by_alpha {
            let spec = TruncationSpec::new(row.alpha, 0.5, sigma).unwrap();
            let direct_fa = test_finite_activity(
                &p,
                &FiniteActivityTestConfig {
                    truncation: spec,
                    ..fa
                },
                &m,
            )
            .unwrap();
            let direct_ia = test_infinite_activity(
                &p,
                &InfiniteActivityTestConfig {
                    truncation: spec,
                    ..ia
                },
            )
            .unwrap();
            let got_fa = row.finite_activity.report().unwrap();
            let got_ia = row.infinite_activity.report().unwrap();
            assert_eq!(got_fa.statistic, direct_fa.statistic);
            assert_eq!(got_fa.variance, direct_fa.variance);
            assert_eq!(got_ia.statistic, direct_ia.statistic);
            assert_eq!(got_ia.raw_variance, direct_ia.raw_variance);
        }
    }

    #[test]
    fn day_order_does_not_matter() {
        let p = brownian(9, 4);
        let r = p.reorder_days(&[3, 1, 0, 2]).unwrap();
        let fa = FiniteActivityTestConfig::default();
        let ia = InfiniteActivityTestConfig::default();
        let a = run_empirical_pipeline(&p, &fa, &ia, &[7.0, 12.0]).unwrap();
        let b = run_empirical_pipeline(&r, &fa, &ia, &[7.0, 12.0]).unwrap();
        for (x, y) in a.by_alpha.iter().zip(&b.by_alpha) {
            let close = |s: f64, t: f64| (s - t).abs() <= 1e-12 * s.abs();
            assert!(close(
                x.finite_activity.statistic().unwrap(),
                y.finite_activity.statistic().unwrap()
            ));
            assert!(close(
                x.infinite_activity.statistic().unwrap(),
                y.infinite_activity.statistic().unwrap()
            ));
        }
    }

    #[test]
    fn constant_days_are_excluded() {
        let p = brownian(10, 2);
        let mut days: Vec<Vec<f64>> = p.days().map(|d| d.to_vec()).collect();
        days.insert(1, vec![2.0; 100]);
        let q = PathSeries::from_days(days, p.delta()).unwrap();
        let res =
            run_empirical_pipeline(&q, &Default::default(), &Default::default(), &[8.0]).unwrap();
        assert_eq!(res.excluded_days, vec![1]);
        assert!(res.by_alpha[0].finite_activity.report().is_some());
    }

    #[test]
    fn cutoffs_scale_with_alpha() {
        let p = brownian(11, 2);
        let res =
            run_empirical_pipeline(&p, &Default::default(), &Default::default(), &[5.0, 10.0])
                .unwrap();
        let u5 = res.by_alpha[0]
            .finite_activity
            .report()
            .unwrap()
            .truncation_cutoffs[0];
        let u10 = res.by_alpha[1]
            .finite_activity
            .report()
            .unwrap()
            .truncation_cutoffs[0];
        assert!((u10 - 2.0 * u5).abs() < 1e-15);
    }
}
