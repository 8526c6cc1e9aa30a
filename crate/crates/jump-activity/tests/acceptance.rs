//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails.

use std::time::Instant;

use jump_activity::montecarlo::{
    run_grid, standardized_histogram, sweep_alpha, ExperimentGrid, Intensity, Scenario,
};
use jump_activity_core::empirical::run_empirical_pipeline;
use jump_activity_core::moments::{abs_normal_moment, joint_abs_moment, joint_abs_moment_exact};
use jump_activity_core::pathseries::truncated_power_variation;
use jump_activity_core::seconds_to_years;
use jump_activity_core::simulator::rng::substream;
use jump_activity_core::simulator::{
    calibrate_theta, simulate_path, JumpComponentSpec, NoiseSpec, SimulationConfig, SvParams,
};
use jump_activity_core::statistics::{
    s_n, s_n_prime, test_finite_activity, test_infinite_activity, v_n, v_n_prime,
};
use jump_activity_core::{
    FiniteActivityTestConfig, InfiniteActivityTestConfig, MomentTable, TestKind, TestOutcome,
    TruncationSpec,
};
use rand_distr::{Distribution, StandardNormal};

const ETA: f64 = 0.0625;

type Criterion = (&'static str, fn() -> Check);

struct Check {
    pass: bool,
    detail: String,
}

fn check(pass: bool, detail: impl Into<String>) -> Check {
    Check {
        pass,
        detail: detail.into(),
    }
}

fn within(x: f64, lo: f64, hi: f64) -> bool {
    (lo..=hi).contains(&x)
}

fn grid(
    scenario: Scenario,
    intensity: Intensity,
    alphas: &[f64],
    replicates: u32,
) -> ExperimentGrid {
    ExperimentGrid {
        scenario,
        intensities: vec![intensity],
        alphas: alphas.to_vec(),
        replicates,
        ..Default::default()
    }
}

fn mean_at(rows: &[jump_activity::montecarlo::SweepRow], test: TestKind, alpha: f64) -> f64 {
    rows.iter()
        .find(|r| r.statistic == test && r.alpha == alpha)
        .expect("swept alpha")
        .mean
}

fn finite_activity_level() -> Check {
    let g = ExperimentGrid {
        levels: vec![0.05, 0.10],
        ..grid(Scenario::FaNull, Intensity::Medium, &[8.0], 1000)
    };
    let t = run_grid(&g).unwrap();
    let r5 = t
        .find(Intensity::Medium, TestKind::FiniteActivity, 0.05, 8.0, 1.0)
        .unwrap();
    let r10 = t
        .find(Intensity::Medium, TestKind::FiniteActivity, 0.10, 8.0, 1.0)
        .unwrap();
    check(
        within(r5.rate, 0.030, 0.075) && within(r10.rate, 0.075, 0.135),
        format!(
            "rate {:.1}% at 5% in [3.0, 7.5], {:.1}% at 10% in [7.5, 13.5]",
            100.0 * r5.rate,
            100.0 * r10.rate
        ),
    )
}

fn infinite_activity_level() -> Check {
    let alpha = 50.0;
    let g = ExperimentGrid {
        levels: vec![0.10],
        ..grid(Scenario::IaNull, Intensity::High, &[alpha], 1000)
    };
    let t = run_grid(&g).unwrap();
    let r = t
        .find(
            Intensity::High,
            TestKind::InfiniteActivity,
            0.10,
            alpha,
            1.0,
        )
        .unwrap();
    check(
        within(r.rate, 0.07, 0.13),
        format!(
            "rate {:.1}% at 10% in [7.0, 13.0] (alpha {alpha}, {} degenerate)",
            100.0 * r.rate,
            r.degenerate
        ),
    )
}

fn probability_limits() -> Check {
    let mean = |scenario, intensity, test| {
        let rows = sweep_alpha(&grid(scenario, intensity, &[10.0], 200)).unwrap();
        mean_at(&rows, test, 10.0)
    };
    let fa_null = mean(
        Scenario::FaNull,
        Intensity::Medium,
        TestKind::FiniteActivity,
    );
    let ia_alt = mean(Scenario::IaAlt, Intensity::High, TestKind::FiniteActivity);
    let ia_null = mean(
        Scenario::IaNull,
        Intensity::High,
        TestKind::InfiniteActivity,
    );
    let fa_alt = mean(
        Scenario::FaAlt,
        Intensity::Medium,
        TestKind::InfiniteActivity,
    );
    check(
        within(fa_null, 1.9, 2.1) && within(ia_alt, 0.9, 1.15) && within(ia_null, 1.8, 2.2) && within(fa_alt, 0.95, 1.1),
        format!("S_n {fa_null:.4} (FA null), {ia_alt:.4} (Cauchy); S'_n {ia_null:.4} (Cauchy), {fa_alt:.4} (FA alt)"),
    )
}

fn clt_normalization() -> Check {
    let g = ExperimentGrid {
        sv: SvParams::constant(ETA),
        ..grid(Scenario::FaNull, Intensity::None, &[8.0], 2000)
    };
    let z = standardized_histogram(&g).unwrap();
    check(
        within(z.variance, 0.8, 1.25) && z.ks_distance < 0.06,
        format!(
            "variance {:.3} in [0.8, 1.25], KS {:.4} < 0.06, {} excluded",
            z.variance, z.ks_distance, z.excluded
        ),
    )
}

fn noise_limits() -> Check {
    let alpha = 0.02;
    let sd = 3.0 * (ETA * seconds_to_years(1.0)).sqrt();
    let mut g = ExperimentGrid {
        noise: NoiseSpec::additive(sd),
        ..grid(Scenario::Noise, Intensity::None, &[alpha], 200)
    };
    g.finite.truncation.varpi = 0.3;
    g.infinite.truncation.varpi = 0.3;
    let rows = sweep_alpha(&g).unwrap();
    let s = mean_at(&rows, TestKind::FiniteActivity, alpha);
    let sp = mean_at(&rows, TestKind::InfiniteActivity, alpha);
    check(
        within(s, 0.4, 0.6) && within(sp, 1.8, 2.2),
        format!("mean S_n {s:.4} in [0.4, 0.6], mean S'_n {sp:.4} in [1.8, 2.2] (alpha {alpha}, varpi 0.3)"),
    )
}

fn rounding_degeneracy() -> Check {
    let tick = 0.01;
    let cfg = SimulationConfig {
        noise: NoiseSpec::rounding(tick),
        horizon: 1,
        seed: 6,
        ..Default::default()
    };
    let path = simulate_path(&cfg).unwrap();
    let alpha = 1.0;
    let spec = TruncationSpec::new(alpha, 0.5, ETA.sqrt()).unwrap();
    let fa = FiniteActivityTestConfig {
        truncation: spec,
        ..Default::default()
    };
    let ia = InfiniteActivityTestConfig {
        truncation: spec,
        ..Default::default()
    };
    let u = spec.cutoff(path.delta());
    let x0 = path.values()[0];
    let max_price = path
        .values()
        .iter()
        .map(|x| cfg.noise.price_scale * (x - x0).exp())
        .fold(0.0, f64::max);
    let log_tick = (1.0 + tick / (max_price + tick)).ln();
    let below = ia.gamma * u < log_tick;
    let all_zero = [(1, u), (fa.k as usize, u), (1, ia.gamma * u)]
        .iter()
        .all(|&(stride, cut)| {
            [3.0, 4.0, 6.0, 7.0, 8.0]
                .iter()
                .all(|&p| truncated_power_variation(&path, p, cut, stride).unwrap() == 0.0)
        });
    let m = MomentTable::new(4.0, 2).unwrap();
    let fa_out = TestOutcome::from_result(test_finite_activity(&path, &fa, &m)).unwrap();
    let ia_out = TestOutcome::from_result(test_infinite_activity(&path, &ia)).unwrap();
    let degenerate = fa_out.report().is_none() && ia_out.report().is_none();
    check(
        below && all_zero && degenerate,
        format!(
            "largest cutoff {:.3e} below one log tick {log_tick:.3e}: {below}; all B = 0: {all_zero}; both degenerate: {degenerate}",
            ia.gamma * u
        ),
    )
}

fn moment_oracles() -> Check {
    let mut double_factorial = 1.0;
    let mut exact = true;
    for j in 1..=6 {
        double_factorial *= f64::from(2 * j - 1);
        exact &= abs_normal_moment(f64::from(2 * j)).unwrap() == double_factorial;
    }
    let quad = joint_abs_moment(4.0, 2).unwrap();
    let expansion = joint_abs_moment_exact(4, 2).unwrap();
    let joint = (quad - 204.0).abs() < 1e-10 && (expansion - 204.0).abs() < 1e-10;
    let n = 10_000_000;
    let mut rng = substream(7, 0);
    let m3 = (0..n)
        .map(|_| f64::abs(StandardNormal.sample(&mut rng)).powi(3))
        .sum::<f64>()
        / n as f64;
    let target = 2.0 * (2.0 / std::f64::consts::PI).sqrt();
    let rel = (m3 / target - 1.0).abs();
    check(
        exact && joint && rel < 0.005,
        format!("(2j-1)!! exact: {exact}; m_(2,4) quadrature {quad} expansion {expansion}; MC m_3 off by {:.3}%", 100.0 * rel),
    )
}

fn property_suites() -> Check {
    let delta = seconds_to_years(5.0);
    let cfg = SimulationConfig {
        jumps: JumpComponentSpec::stable(1.0, calibrate_theta(0.05, 1.0, delta, ETA).unwrap()),
        delta,
        horizon: 4,
        seed: 8,
        ..Default::default()
    };
    let path = simulate_path(&cfg).unwrap();
    let c = 3.7;
    let scaled = path.map_values(|x| c * x);
    let spec = TruncationSpec::new(8.0, 0.5, ETA.sqrt()).unwrap();
    let scaled_spec = TruncationSpec::new(8.0, 0.5, c * ETA.sqrt()).unwrap();
    let fa = |s| FiniteActivityTestConfig {
        truncation: s,
        ..Default::default()
    };
    let ia = |s| InfiniteActivityTestConfig {
        truncation: s,
        ..Default::default()
    };
    let m = MomentTable::new(4.0, 2).unwrap();
    let rel = |a: f64, b: f64| (a - b).abs() / a.abs();
    let worst_scale = [
        rel(
            s_n(&path, &fa(spec)).unwrap(),
            s_n(&scaled, &fa(scaled_spec)).unwrap(),
        ),
        rel(
            v_n(&path, &fa(spec), &m).unwrap(),
            v_n(&scaled, &fa(scaled_spec), &m).unwrap(),
        ),
        rel(
            s_n_prime(&path, &ia(spec)).unwrap(),
            s_n_prime(&scaled, &ia(scaled_spec)).unwrap(),
        ),
        rel(
            v_n_prime(&path, &ia(spec)).unwrap(),
            v_n_prime(&scaled, &ia(scaled_spec)).unwrap(),
        ),
    ]
    .into_iter()
    .fold(0.0, f64::max);

    let alphas = [6.0, 10.0, 15.0];
    let a =
        run_empirical_pipeline(&path, &Default::default(), &Default::default(), &alphas).unwrap();
    let p = path.reorder_days(&[2, 0, 3, 1]).unwrap();
    let b = run_empirical_pipeline(&p, &Default::default(), &Default::default(), &alphas).unwrap();
    let worst_perm = a
        .by_alpha
        .iter()
        .zip(&b.by_alpha)
        .flat_map(|(x, y)| {
            [
                rel(
                    x.finite_activity.statistic().unwrap(),
                    y.finite_activity.statistic().unwrap(),
                ),
                rel(
                    x.infinite_activity.statistic().unwrap(),
                    y.infinite_activity.statistic().unwrap(),
                ),
            ]
        })
        .fold(0.0, f64::max);

    let g = ExperimentGrid {
        delta_seconds: vec![5.0],
        ..grid(Scenario::IaNull, Intensity::High, &[8.0, 12.0], 64)
    };
    let one = run_grid(&ExperimentGrid {
        workers: 1,
        ..g.clone()
    })
    .unwrap();
    let four = run_grid(&ExperimentGrid { workers: 4, ..g }).unwrap();
    let identical = one == four;
    check(
        worst_scale < 1e-12 && worst_perm < 1e-12 && identical,
        format!("scale {worst_scale:.1e}, day permutation {worst_perm:.1e} (< 1e-12); mc workers 1 vs 4 identical: {identical}"),
    )
}

fn brownian_sweep() -> Check {
    let alphas = [2.0, 3.0, 4.0, 5.0, 6.0, 8.0, 9.0, 10.0, 12.0, 15.0];
    let g = ExperimentGrid {
        sv: SvParams::constant(ETA),
        ..grid(Scenario::FaNull, Intensity::None, &alphas, 200)
    };
    let rows = sweep_alpha(&g).unwrap();
    let means: Vec<f64> = alphas
        .iter()
        .map(|&a| mean_at(&rows, TestKind::FiniteActivity, a))
        .collect();
    let monotone = means[..5].windows(2).all(|w| w[1] >= w[0]);
    let flat = means[5..].iter().all(|&m| within(m, 1.95, 2.05));
    check(
        monotone && flat,
        format!(
            "nondecreasing on [2, 6]: {monotone} ({}); within [1.95, 2.05] on [8, 15]: {flat} ({})",
            fmt(&means[..5]),
            fmt(&means[5..])
        ),
    )
}

fn cauchy_sweep() -> Check {
    let alphas: Vec<f64> = (2..=15).map(f64::from).collect();
    let g = ExperimentGrid {
        sv: SvParams::constant(ETA),
        ..grid(Scenario::IaAlt, Intensity::High, &alphas, 200)
    };
    let rows = sweep_alpha(&g).unwrap();
    let means: Vec<f64> = alphas
        .iter()
        .map(|&a| mean_at(&rows, TestKind::FiniteActivity, a))
        .collect();
    let peak = alphas[means
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .unwrap()
        .0];
    let end = *means.last().unwrap();
    check(
        peak <= 8.0 && end < 1.3,
        format!(
            "maximum at alpha {peak} (needs <= 8); {end:.4} at alpha 15 (needs < 1.3); means {}",
            fmt(&means)
        ),
    )
}

fn empirical_substitute() -> Check {
    let delta = seconds_to_years(5.0);
    let cfg = SimulationConfig {
        jumps: JumpComponentSpec::stable(1.0, calibrate_theta(0.10, 1.0, delta, ETA).unwrap()),
        delta,
        horizon: 252,
        seed: 2006,
        ..Default::default()
    };
    let path = simulate_path(&cfg).unwrap();
    let alphas = [6.0, 7.0, 8.0, 9.0, 10.0, 12.0, 15.0];
    let res =
        run_empirical_pipeline(&path, &Default::default(), &Default::default(), &alphas).unwrap();
    let fa_rejected = res
        .by_alpha
        .iter()
        .all(|a| a.finite_activity.rejects() == Some(true));
    let ia_kept = res
        .by_alpha
        .iter()
        .all(|a| a.infinite_activity.rejects() == Some(false));
    let s: Vec<f64> = res
        .by_alpha
        .iter()
        .map(|a| a.finite_activity.statistic().unwrap())
        .collect();
    let sp: Vec<f64> = res
        .by_alpha
        .iter()
        .map(|a| a.infinite_activity.statistic().unwrap())
        .collect();
    check(
        fa_rejected && ia_kept,
        format!(
            "252 days at 5s: finite activity rejected at every alpha: {fa_rejected} (S_n {}); infinite activity kept: {ia_kept} (S'_n {})",
            fmt(&s),
            fmt(&sp)
        ),
    )
}

fn fmt(xs: &[f64]) -> String {
    xs.iter()
        .map(|x| format!("{x:.3}"))
        .collect::<Vec<_>>()
        .join(" ")
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("1 finite-activity level", finite_activity_level),
        ("2 infinite-activity level", infinite_activity_level),
        ("3 probability limits", probability_limits),
        ("4 CLT normalization", clt_normalization),
        ("5 noise limits", noise_limits),
        ("6 rounding degeneracy", rounding_degeneracy),
        ("7 moment oracles", moment_oracles),
        ("8 property suites", property_suites),
        ("9a alpha sweep, Brownian", brownian_sweep),
        ("9b alpha sweep, Brownian + Cauchy", cauchy_sweep),
        ("10 simulated empirical year", empirical_substitute),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        let start = Instant::now();
        let c = f();
        let verdict = if c.pass { "PASS" } else { "FAIL" };
        println!(
            "{verdict} [{name}] {} ({:.1}s)",
            c.detail,
            start.elapsed().as_secs_f64()
        );
        failed += usize::from(!c.pass);
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
