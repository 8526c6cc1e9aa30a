//! Distributional checks of the simulator against closed forms.

use std::f64::consts::PI;

use jump_activity_core::seconds_to_years;
use jump_activity_core::simulator::rng::substream;
use jump_activity_core::simulator::{
    calibrate_theta, correlated_shocks, simulate_detailed, stable_increment, JumpComponentSpec,
    SimulationConfig, SvParams,
};

fn cauchy_cdf(x: f64) -> f64 {
    0.5 + x.atan() / PI
}

#[test]
fn cauchy_increments_pass_ks() {
    let n = 100_000;
    let t = 0.37;
    let mut rng = substream(11, 0);
    let mut xs: Vec<f64> = (0..n)
        .map(|_| stable_increment(1.0, t, &mut rng).unwrap() / t)
        .collect();
    xs.sort_by(f64::total_cmp);
    let d = xs.iter().enumerate().fold(0.0f64, |d, (i, &x)| {
        let f = cauchy_cdf(x);
        d.max(f - i as f64 / n as f64)
            .max((i + 1) as f64 / n as f64 - f)
    });
    // asymptotic 1% critical value
    assert!(d < 1.628 / (n as f64).sqrt(), "KS distance {d}");
    let median = xs[n / 2];
    assert!(median.abs() < 0.02);
    let inside = xs.iter().filter(|x| x.abs() <= 1.0).count() as f64 / n as f64;
    assert!((inside - 0.5).abs() < 3.0 * (0.25 / n as f64).sqrt());
}

#[test]
fn stable_self_similarity() {
    let beta = 1.5;
    let n = 200_000;
    let quantiles = |t: f64, seed: u64| {
        let mut rng = substream(seed, 0);
        let mut xs: Vec<f64> = (0..n)
            .map(|_| stable_increment(beta, t, &mut rng).unwrap())
            .collect();
        xs.sort_by(f64::total_cmp);
        [0.1, 0.25, 0.75, 0.9].map(|q| xs[(q * n as f64) as usize])
    };
    let one = quantiles(1.0, 1);
    let four = quantiles(4.0, 2);
    let scale = 4f64.powf(1.0 / beta);
    for (a, b) in one.iter().zip(four) {
        assert!((b / (scale * a) - 1.0).abs() < 0.03, "{b} vs {}", scale * a);
    }
}

#[test]
fn calibrated_cauchy_tail_frequency() {
    let eta: f64 = 0.0625;
    let delta = seconds_to_years(1.0);
    let theta = calibrate_theta(0.05, 1.0, delta, eta).unwrap();
    let x = 4.0 * (eta * delta).sqrt();
    let closed = 1.0 - 2.0 / PI * (x / (theta * delta)).atan();
    assert!((closed - 0.05).abs() < 1e-12);
    let n = 1_000_000;
    let mut rng = substream(12, 0);
    let hits = (0..n)
        .filter(|_| (theta * stable_increment(1.0, delta, &mut rng).unwrap()).abs() >= x)
        .count();
    let freq = hits as f64 / n as f64;
    assert!(
        (freq - closed).abs() < 3.0 * (closed * (1.0 - closed) / n as f64).sqrt(),
        "{freq}"
    );
}

#[test]
fn leverage_correlation() {
    let rho = -0.5;
    let n = 200_000;
    let mut rng = substream(13, 0);
    let pairs: Vec<(f64, f64)> = (0..n)
        .map(|_| correlated_shocks(rho, 1e-4, &mut rng))
        .collect();
    let corr = correlation(&pairs);
    let se = (1.0 - rho * rho) / (n as f64).sqrt();
    assert!((corr - rho).abs() < 3.0 * se, "{corr}");

    // the same correlation shows up between price and variance moves of a
    // jump-free path
    let cfg = SimulationConfig {
        sv: SvParams {
            variance_jump_rate: 0.0,
            ..SvParams::default()
        },
        delta: seconds_to_years(5.0),
        horizon: 40,
        seed: 14,
        ..Default::default()
    };
    let sim = simulate_detailed(&cfg).unwrap();
    let mut moves = Vec::new();
    for r in (0..cfg.horizon as usize).map(|d| sim.path.day_range(d)) {
        for i in r.start + 1..r.end {
            moves.push((
                sim.path.values()[i] - sim.path.values()[i - 1],
                sim.variance[i] - sim.variance[i - 1],
            ));
        }
    }
    let corr = correlation(&moves);
    let se = (1.0 - rho * rho) / (moves.len() as f64).sqrt();
    assert!((corr - rho).abs() < 3.0 * se, "{corr}");
}

fn correlation(pairs: &[(f64, f64)]) -> f64 {
    let n = pairs.len() as f64;
    let (ma, mb) = pairs
        .iter()
        .fold((0.0, 0.0), |(a, b), p| (a + p.0 / n, b + p.1 / n));
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for &(a, b) in pairs {
        sab += (a - ma) * (b - mb);
        saa += (a - ma) * (a - ma);
        sbb += (b - mb) * (b - mb);
    }
    sab / (saa * sbb).sqrt()
}

#[test]
fn variance_reverts_to_long_run_mean() {
    let sv = SvParams {
        variance_jump_rate: 0.0,
        ..SvParams::default()
    };
    let cfg = SimulationConfig {
        sv,
        jumps: JumpComponentSpec::none(),
        delta: seconds_to_years(1800.0),
        horizon: 252 * 1000,
        seed: 15,
        ..Default::default()
    };
    let sim = simulate_detailed(&cfg).unwrap();
    assert!(sim.variance.iter().all(|&v| v >= 0.0));
    let mean = sim.variance.iter().sum::<f64>() / sim.variance.len() as f64;
    assert!((mean / sv.eta - 1.0).abs() < 0.05, "{mean}");
}
