//! Command-line interface.
//!
//! Exit codes: 0 when every requested test reached a decision, 2 when some
//! test had no decision (degenerate sample), 3 for bad input or usage, 4
//! for numerical failures.

use std::ffi::OsString;
use std::path::PathBuf;

use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand, ValueEnum};
use jump_activity_core::empirical::run_empirical_pipeline;
use jump_activity_core::simulator::{
    calibrate_theta, simulate_path, JumpComponentSpec, JumpKind, NoiseSpec, SimulationConfig,
    SvParams,
};
use jump_activity_core::statistics::{test_finite_activity, test_infinite_activity};
use jump_activity_core::{
    seconds_to_years, FiniteActivityTestConfig, InfiniteActivityTestConfig, MomentTable,
    PathSeries, TestKind, TestOutcome,
};

use crate::config::{FileConfig, OUTPUT_DIR_ENV};
use crate::ingest::{export_path, load_ticks_file, resample_to_grid, SessionConfig};
use crate::montecarlo::{
    frequency_sweep, run_grid, standardized_histogram, sweep_alpha, ExperimentGrid, Intensity,
    Scenario,
};
use crate::report::{
    artifact_name, classify_s_n, csv_string, json_string, real, statistic_label, write_artifact,
    OutcomeRow, ZRow,
};
use crate::Error;

#[derive(Debug, Parser)]
#[command(
    name = "jump-activity",
    version,
    about = "Truncated power variation tests for finite versus infinite jump activity"
)]
pub struct Cli {
    /// TOML configuration file; flags override its values
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Directory for CSV and JSON artifacts
    #[arg(long, global = true, env = OUTPUT_DIR_ENV, value_name = "DIR")]
    pub output_dir: Option<PathBuf>,
    /// Random seed (simulation seed, or base seed of replicated experiments)
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for replicated experiments (0 = all cores)
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Date stamped into artifact names, YYYY-MM-DD (default: today)
    #[arg(long, global = true, value_name = "DATE")]
    pub date: Option<NaiveDate>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a path and write it as a tick file
    Simulate(SimulateArgs),
    /// Test the null of finite jump activity on a tick file
    TestFa(TestFaArgs),
    /// Test the null of infinite jump activity on a tick file
    TestIa(TestIaArgs),
    /// Monte Carlo rejection rates over a grid of settings
    Mc(McArgs),
    /// Mean statistic as a function of the truncation index alpha
    SweepAlpha(GridArgs),
    /// Rejection rates and statistic quartiles per sampling interval
    FreqSweep(GridArgs),
    /// Run both tests on a tick file with per-day volatility truncation
    Ingest(IngestArgs),
    /// Print the absolute normal moments and the constant N(p, k)
    Moments(MomentsArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum JumpChoice {
    None,
    Stable,
    CompoundPoisson,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NoiseChoice {
    None,
    Additive,
    Rounding,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Number of trading days
    #[arg(long)]
    pub days: Option<u32>,
    /// Sampling interval in seconds
    #[arg(long)]
    pub delta_seconds: Option<f64>,
    /// Jump component
    #[arg(long, value_enum)]
    pub jumps: Option<JumpChoice>,
    /// Stability index of the stable component
    #[arg(long)]
    pub beta: Option<f64>,
    /// Scale of the stable component
    #[arg(long, conflicts_with = "tail_probability")]
    pub theta: Option<f64>,
    /// Calibrate the stable scale to P(|theta dY| >= 4 sqrt(eta delta)) = TP
    /// (a stable component without scale uses TP = 0.05)
    #[arg(long, value_name = "TP")]
    pub tail_probability: Option<f64>,
    /// Compound Poisson jumps per trading day
    #[arg(long)]
    pub jumps_per_day: Option<f64>,
    /// Microstructure noise overlay
    #[arg(long, value_enum)]
    pub noise: Option<NoiseChoice>,
    /// Standard deviation of additive noise (log-price units)
    #[arg(long)]
    pub noise_sd: Option<f64>,
    /// Tick size for rounding noise (price units)
    #[arg(long)]
    pub tick: Option<f64>,
    /// Constant volatility sqrt(eta) instead of the stochastic volatility model
    #[arg(long)]
    pub constant_volatility: bool,
    /// Calendar date of the first simulated day
    #[arg(long, value_name = "DATE")]
    pub start_date: Option<NaiveDate>,
    /// Name used as the scenario part of artifact names
    #[arg(long, default_value = "simulated")]
    pub name: String,
}

/// Tick input, resampling and truncation shared by the test commands.
#[derive(Debug, Args)]
pub struct InputArgs {
    /// Tick CSV with header timestamp_ms,price[,flag]
    #[arg(long, value_name = "FILE")]
    pub input: PathBuf,
    /// Grid spacing in seconds
    #[arg(long)]
    pub delta_seconds: Option<f64>,
    /// Flag value marking a good trade (repeatable; default keeps all rows)
    #[arg(long = "good-flag", value_name = "FLAG")]
    pub good_flags: Vec<String>,
    /// Session open, seconds after midnight in exchange time
    #[arg(long)]
    pub open_seconds: Option<u32>,
    /// Session close, seconds after midnight in exchange time
    #[arg(long)]
    pub close_seconds: Option<u32>,
    /// Exchange time minus UTC, in minutes
    #[arg(long, allow_hyphen_values = true)]
    pub utc_offset_minutes: Option<i32>,
    /// Skip days with fewer ticks than this
    #[arg(long)]
    pub min_ticks: Option<usize>,
    /// Truncation index; repeat to test several
    #[arg(long = "alpha")]
    pub alphas: Vec<f64>,
    /// Nominal level of the test
    #[arg(long)]
    pub level: Option<f64>,
    /// Truncation rate exponent: cutoff = alpha * sigma * delta^varpi
    #[arg(long)]
    pub varpi: Option<f64>,
    /// Annualized reference volatility for fixed truncation
    #[arg(long)]
    pub sigma_ref: Option<f64>,
    /// Estimate each day's volatility and truncate relative to it
    #[arg(long)]
    pub per_day_volatility: bool,
}

#[derive(Debug, Args)]
pub struct TestFaArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Power p
    #[arg(long)]
    pub p: Option<f64>,
    /// Coarse sampling multiple k
    #[arg(long)]
    pub k: Option<u32>,
}

#[derive(Debug, Args)]
pub struct TestIaArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Lower power p
    #[arg(long)]
    pub p: Option<f64>,
    /// Higher power p'
    #[arg(long)]
    pub p_prime: Option<f64>,
    /// Ratio of the two cutoffs
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Floor applied to the variance estimate
    #[arg(long)]
    pub variance_floor: Option<f64>,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    /// Data-generating process and test pairing
    #[arg(long, value_enum)]
    pub scenario: Option<ScenarioArg>,
    /// Jump intensity (repeatable)
    #[arg(long = "intensity", value_enum)]
    pub intensities: Vec<IntensityArg>,
    /// Truncation index (repeatable)
    #[arg(long = "alpha")]
    pub alphas: Vec<f64>,
    /// Sampling interval in seconds (repeatable)
    #[arg(long = "delta-seconds")]
    pub delta_seconds: Vec<f64>,
    /// Trading days per replicate
    #[arg(long)]
    pub days: Option<u32>,
    /// Number of replicates
    #[arg(long)]
    pub replicates: Option<u32>,
    /// Nominal level (repeatable)
    #[arg(long = "level")]
    pub levels: Vec<f64>,
    /// Stability index of the infinite-activity component
    #[arg(long)]
    pub beta: Option<f64>,
    /// Truncation rate exponent for both tests
    #[arg(long)]
    pub varpi: Option<f64>,
    /// Constant volatility instead of the stochastic volatility model
    #[arg(long)]
    pub constant_volatility: bool,
    /// Additive noise sd as a multiple of the per-interval Brownian sd
    #[arg(long)]
    pub noise_multiple: Option<f64>,
}

#[derive(Debug, Args)]
pub struct McArgs {
    #[command(flatten)]
    pub grid: GridArgs,
    /// Also write standardized statistics of the first cell (null scenarios)
    #[arg(long)]
    pub histogram: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum ScenarioArg {
    FaNull,
    IaNull,
    FaAlt,
    IaAlt,
    Noise,
}

impl From<ScenarioArg> for Scenario {
    fn from(s: ScenarioArg) -> Self {
        match s {
            ScenarioArg::FaNull => Scenario::FaNull,
            ScenarioArg::IaNull => Scenario::IaNull,
            ScenarioArg::FaAlt => Scenario::FaAlt,
            ScenarioArg::IaAlt => Scenario::IaAlt,
            ScenarioArg::Noise => Scenario::Noise,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum IntensityArg {
    None,
    Low,
    Medium,
    High,
}

impl From<IntensityArg> for Intensity {
    fn from(i: IntensityArg) -> Self {
        match i {
            IntensityArg::None => Intensity::None,
            IntensityArg::Low => Intensity::Low,
            IntensityArg::Medium => Intensity::Medium,
            IntensityArg::High => Intensity::High,
        }
    }
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    #[command(flatten)]
    pub input: InputArgs,
}

#[derive(Debug, Args)]
pub struct MomentsArgs {
    /// Power p
    #[arg(long, default_value_t = 4.0)]
    pub p: f64,
    /// Sampling multiple k
    #[arg(long, default_value_t = 2)]
    pub k: u32,
}

/// What a command produced.
#[derive(Debug, Default)]
pub struct Outcome {
    pub summary: String,
    pub artifacts: Vec<PathBuf>,
    /// Some requested test reached no decision.
    pub degenerate: bool,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.degenerate {
            2
        } else {
            0
        }
    }
}

struct Context {
    file: FileConfig,
    output_dir: PathBuf,
    date: NaiveDate,
}

impl Context {
    fn write(
        &self,
        scenario: &str,
        statistic: &str,
        ext: &str,
        contents: &str,
        out: &mut Outcome,
    ) -> Result<(), Error> {
        let name = artifact_name(scenario, statistic, self.date, ext);
        out.artifacts
            .push(write_artifact(&self.output_dir, &name, contents)?);
        Ok(())
    }
}

/// Parses `args` and runs the command, printing the summary; returns the
/// process exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 3 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(out) => {
            print!("{}", out.summary);
            for a in &out.artifacts {
                println!("wrote {}", a.display());
            }
            out.exit_code()
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn run(cli: Cli) -> Result<Outcome, Error> {
    let file = match &cli.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    let output_dir = cli
        .output_dir
        .clone()
        .or_else(|| file.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("."));
    let date = cli
        .date
        .unwrap_or_else(|| chrono::Local::now().date_naive());
    let seed = cli.seed.or(file.seed);
    let workers = cli.workers.or(file.workers);
    let ctx = Context {
        file,
        output_dir,
        date,
    };
    match cli.command {
        Command::Simulate(a) => simulate(&ctx, a, seed),
        Command::TestFa(a) => test_fa(&ctx, a),
        Command::TestIa(a) => test_ia(&ctx, a),
        Command::Mc(a) => mc(&ctx, &grid_from(&ctx, &a.grid, seed, workers)?, a.histogram),
        Command::SweepAlpha(a) => sweep(&ctx, &grid_from(&ctx, &a, seed, workers)?),
        Command::FreqSweep(a) => freq(&ctx, &grid_from(&ctx, &a, seed, workers)?),
        Command::Ingest(a) => ingest(&ctx, a),
        Command::Moments(a) => moments(&ctx, a),
    }
}

fn simulate(ctx: &Context, a: SimulateArgs, seed: Option<u64>) -> Result<Outcome, Error> {
    let mut cfg: SimulationConfig = ctx.file.simulation;
    if let Some(d) = a.days {
        cfg.horizon = d;
    }
    if let Some(s) = a.delta_seconds {
        cfg.delta = seconds_to_years(s);
    }
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if a.constant_volatility {
        cfg.sv = SvParams::constant(cfg.sv.eta);
    }
    match a.jumps {
        Some(JumpChoice::None) => cfg.jumps = JumpComponentSpec::none(),
        Some(JumpChoice::Stable) => {
            cfg.jumps = JumpComponentSpec::stable(cfg.jumps.beta, cfg.jumps.theta)
        }
        Some(JumpChoice::CompoundPoisson) => {
            cfg.jumps = JumpComponentSpec::compound_poisson(Intensity::Medium.jumps_per_day())
        }
        None => {}
    }
    if let Some(b) = a.beta {
        cfg.jumps.beta = b;
    }
    if let Some(t) = a.theta {
        cfg.jumps.theta = t;
    }
    if let Some(tp) = a.tail_probability {
        cfg.jumps.theta = calibrate_theta(tp, cfg.jumps.beta, cfg.delta, cfg.sv.eta)?;
    } else if cfg.jumps.kind == JumpKind::Stable && cfg.jumps.theta == 0.0 {
        let tp = Intensity::Medium
            .tail_probability()
            .expect("medium has a tail probability");
        cfg.jumps.theta = calibrate_theta(tp, cfg.jumps.beta, cfg.delta, cfg.sv.eta)?;
    }
    if let Some(l) = a.jumps_per_day {
        cfg.jumps.lambda = l;
    }
    match a.noise {
        Some(NoiseChoice::None) => cfg.noise = NoiseSpec::default(),
        Some(NoiseChoice::Additive) => cfg.noise = NoiseSpec::additive(cfg.noise.additive_sd),
        Some(NoiseChoice::Rounding) => cfg.noise = NoiseSpec::rounding(cfg.noise.tick),
        None => {}
    }
    if let Some(sd) = a.noise_sd {
        cfg.noise.additive_sd = sd;
    }
    if let Some(t) = a.tick {
        cfg.noise.tick = t;
    }
    cfg.validate()?;
    let path = simulate_path(&cfg)?;
    let session = ctx.file.ingest.session;
    let start = a
        .start_date
        .unwrap_or_else(|| NaiveDate::from_ymd_opt(2006, 1, 3).expect("valid date"));
    let mut buf = Vec::new();
    export_path(&path, &mut buf, start, &session)?;
    let mut out = Outcome::default();
    ctx.write(
        &a.name,
        "path",
        "csv",
        &String::from_utf8(buf).expect("UTF-8"),
        &mut out,
    )?;
    ctx.write(&a.name, "path", "json", &json_string(&cfg)?, &mut out)?;
    let delta_seconds =
        cfg.delta * jump_activity_core::DAYS_PER_YEAR * f64::from(session.length_seconds());
    out.summary = format!(
        "simulated {} day(s), {} observations at {}s, jumps {:?} (theta {}), noise {:?}, seed {}\n",
        cfg.horizon,
        path.len(),
        delta_seconds,
        cfg.jumps.kind,
        cfg.jumps.theta,
        cfg.noise.kind,
        cfg.seed
    );
    Ok(out)
}

struct Loaded {
    path: PathSeries,
    stem: String,
    note: String,
}

fn load_input(ctx: &Context, a: &InputArgs) -> Result<Loaded, Error> {
    if !a.input.is_file() {
        return Err(Error::Input(format!(
            "input file {} not found",
            a.input.display()
        )));
    }
    let f = &ctx.file.ingest;
    let good = if a.good_flags.is_empty() {
        f.good_flags.clone()
    } else {
        Some(a.good_flags.clone())
    };
    let session = SessionConfig {
        open_seconds: a.open_seconds.unwrap_or(f.session.open_seconds),
        close_seconds: a.close_seconds.unwrap_or(f.session.close_seconds),
        utc_offset_minutes: a.utc_offset_minutes.unwrap_or(f.session.utc_offset_minutes),
        min_ticks: a.min_ticks.unwrap_or(f.session.min_ticks),
    };
    let loaded = load_ticks_file(&a.input, good.as_deref())?;
    let delta_seconds = a.delta_seconds.unwrap_or(f.delta_seconds);
    let r = resample_to_grid(&loaded.ticks, delta_seconds, &session)?;
    let mut note = format!(
        "{}: {} ticks kept, {} dropped by flag; {} day(s) on a {}s grid",
        a.input.display(),
        loaded.ticks.len(),
        loaded.dropped,
        r.path.n_days(),
        delta_seconds
    );
    if !r.skipped.is_empty() {
        note.push_str(&format!(", {} day(s) skipped:", r.skipped.len()));
        for s in &r.skipped {
            note.push_str(&format!(" {} ({:?})", s.date, s.reason));
        }
    }
    note.push('\n');
    let stem = a
        .input
        .file_stem()
        .map_or_else(|| "input".into(), |s| s.to_string_lossy().into_owned());
    Ok(Loaded {
        path: r.path,
        stem,
        note,
    })
}

fn alphas_or(list: &[f64], default: f64) -> Vec<f64> {
    if list.is_empty() {
        vec![default]
    } else {
        list.to_vec()
    }
}

fn outcome_line(alpha: f64, o: &TestOutcome) -> String {
    match o {
        TestOutcome::Decision(r) => format!(
            "  alpha {alpha:>6}: statistic {:.4} (limit {}), z {:+.3}, critical {:.4} at {}%: {}\n",
            r.statistic,
            r.null_limit,
            r.z_score,
            r.critical_value,
            r.level * 100.0,
            if r.reject { "reject" } else { "fail to reject" }
        ),
        TestOutcome::NoDecision(d) => format!("  alpha {alpha:>6}: no decision: {d}\n"),
    }
}

fn noise_band(o: &TestOutcome, p: f64, k: u32) -> String {
    match o.statistic().and_then(|s| classify_s_n(s, p, k)) {
        Some(r) => format!("    noise band: S_n {}\n", r.describe()),
        None => String::new(),
    }
}

fn fa_config(
    ctx: &Context,
    input: &InputArgs,
    p: Option<f64>,
    k: Option<u32>,
) -> Result<FiniteActivityTestConfig, Error> {
    let mut c = ctx.file.finite;
    c.p = p.unwrap_or(c.p);
    c.k = k.unwrap_or(c.k);
    c.level = input.level.unwrap_or(c.level);
    c.truncation.varpi = input.varpi.unwrap_or(c.truncation.varpi);
    c.truncation.sigma_ref = input.sigma_ref.unwrap_or(c.truncation.sigma_ref);
    c.validate()?;
    Ok(c)
}

fn ia_config(ctx: &Context, a: &TestIaArgs) -> Result<InfiniteActivityTestConfig, Error> {
    let mut c = ctx.file.infinite;
    c.p = a.p.unwrap_or(c.p);
    c.p_prime = a.p_prime.unwrap_or(c.p_prime);
    c.gamma = a.gamma.unwrap_or(c.gamma);
    c.variance_floor = a.variance_floor.unwrap_or(c.variance_floor);
    c.level = a.input.level.unwrap_or(c.level);
    c.truncation.varpi = a.input.varpi.unwrap_or(c.truncation.varpi);
    c.truncation.sigma_ref = a.input.sigma_ref.unwrap_or(c.truncation.sigma_ref);
    c.validate()?;
    Ok(c)
}

fn test_fa(ctx: &Context, a: TestFaArgs) -> Result<Outcome, Error> {
    let cfg = fa_config(ctx, &a.input, a.p, a.k)?;
    let loaded = load_input(ctx, &a.input)?;
    let moments = MomentTable::new(cfg.p, cfg.k)?;
    let alphas = alphas_or(&a.input.alphas, cfg.truncation.alpha);
    let outcomes: Vec<(f64, TestOutcome)> = if a.input.per_day_volatility {
        run_empirical_pipeline(&loaded.path, &cfg, &ctx.file.infinite, &alphas)?
            .by_alpha
            .into_iter()
            .map(|r| (r.alpha, r.finite_activity))
            .collect()
    } else {
        alphas
            .iter()
            .map(|&alpha| {
                let c = FiniteActivityTestConfig {
                    truncation: cfg.truncation.with_alpha(alpha),
                    ..cfg
                };
                Ok((
                    alpha,
                    TestOutcome::from_result(test_finite_activity(&loaded.path, &c, &moments))?,
                ))
            })
            .collect::<Result<_, Error>>()?
    };
    let mut summary = loaded.note.clone();
    summary.push_str(&format!(
        "finite-activity test (p {}, k {}):\n",
        cfg.p, cfg.k
    ));
    for (alpha, o) in &outcomes {
        summary.push_str(&outcome_line(*alpha, o));
        summary.push_str(&noise_band(o, cfg.p, cfg.k));
    }
    finish(
        ctx,
        &loaded.stem,
        TestKind::FiniteActivity,
        outcomes,
        summary,
    )
}

fn test_ia(ctx: &Context, a: TestIaArgs) -> Result<Outcome, Error> {
    let cfg = ia_config(ctx, &a)?;
    let loaded = load_input(ctx, &a.input)?;
    let alphas = alphas_or(&a.input.alphas, cfg.truncation.alpha);
    let outcomes: Vec<(f64, TestOutcome)> = if a.input.per_day_volatility {
        run_empirical_pipeline(&loaded.path, &ctx.file.finite, &cfg, &alphas)?
            .by_alpha
            .into_iter()
            .map(|r| (r.alpha, r.infinite_activity))
            .collect()
    } else {
        alphas
            .iter()
            .map(|&alpha| {
                let c = InfiniteActivityTestConfig {
                    truncation: cfg.truncation.with_alpha(alpha),
                    ..cfg
                };
                Ok((
                    alpha,
                    TestOutcome::from_result(test_infinite_activity(&loaded.path, &c))?,
                ))
            })
            .collect::<Result<_, Error>>()?
    };
    let mut summary = loaded.note.clone();
    summary.push_str(&format!(
        "infinite-activity test (p {}, p' {}, gamma {}):\n",
        cfg.p, cfg.p_prime, cfg.gamma
    ));
    for (alpha, o) in &outcomes {
        summary.push_str(&outcome_line(*alpha, o));
    }
    summary.push_str("    note: under noise S'_n also tends to gamma^(p'-p); check S_n against 1/k before reading this test\n");
    finish(
        ctx,
        &loaded.stem,
        TestKind::InfiniteActivity,
        outcomes,
        summary,
    )
}

fn finish(
    ctx: &Context,
    stem: &str,
    test: TestKind,
    outcomes: Vec<(f64, TestOutcome)>,
    summary: String,
) -> Result<Outcome, Error> {
    let rows: Vec<OutcomeRow> = outcomes
        .into_iter()
        .map(|(alpha, outcome)| OutcomeRow {
            source: stem.to_string(),
            alpha,
            outcome,
        })
        .collect();
    let mut out = Outcome {
        summary,
        degenerate: rows.iter().any(|r| r.outcome.report().is_none()),
        ..Default::default()
    };
    ctx.write(
        stem,
        statistic_label(test),
        "csv",
        &csv_string(&rows)?,
        &mut out,
    )?;
    ctx.write(
        stem,
        statistic_label(test),
        "json",
        &json_string(&rows)?,
        &mut out,
    )?;
    Ok(out)
}

fn grid_from(
    ctx: &Context,
    a: &GridArgs,
    seed: Option<u64>,
    workers: Option<usize>,
) -> Result<ExperimentGrid, Error> {
    let mut g = ctx.file.experiment.clone();
    if let Some(s) = a.scenario {
        g.scenario = s.into();
    }
    if !a.intensities.is_empty() {
        g.intensities = a.intensities.iter().map(|&i| i.into()).collect();
    }
    if !a.alphas.is_empty() {
        g.alphas = a.alphas.clone();
    }
    if !a.delta_seconds.is_empty() {
        g.delta_seconds = a.delta_seconds.clone();
    }
    if !a.levels.is_empty() {
        g.levels = a.levels.clone();
    }
    g.horizon_days = a.days.unwrap_or(g.horizon_days);
    g.replicates = a.replicates.unwrap_or(g.replicates);
    g.beta = a.beta.unwrap_or(g.beta);
    g.base_seed = seed.unwrap_or(g.base_seed);
    g.workers = workers.unwrap_or(g.workers);
    if let Some(v) = a.varpi {
        g.finite.truncation.varpi = v;
        g.infinite.truncation.varpi = v;
    }
    if a.constant_volatility {
        g.sv = SvParams::constant(g.sv.eta);
    }
    if let Some(m) = a.noise_multiple {
        let dt = seconds_to_years(g.delta_seconds[0]);
        g.noise = NoiseSpec::additive(m * (g.sv.eta * dt).sqrt());
    } else if g.scenario == Scenario::Noise && g.noise.additive_sd == 0.0 {
        let dt = seconds_to_years(g.delta_seconds[0]);
        g.noise = NoiseSpec::additive(3.0 * (g.sv.eta * dt).sqrt());
    }
    g.validate()?;
    Ok(g)
}

fn mc(ctx: &Context, g: &ExperimentGrid, histogram: bool) -> Result<Outcome, Error> {
    let table = run_grid(g)?;
    let mut out = Outcome::default();
    let mut summary = format!(
        "{} replicates of {} over {} cell(s)\n",
        g.replicates,
        g.scenario,
        table.rows.len()
    );
    for &test in g.scenario.tests() {
        let rows: Vec<_> = table
            .rows
            .iter()
            .filter(|r| r.statistic == test)
            .cloned()
            .collect();
        for r in &rows {
            summary.push_str(&format!(
                "  {} {} alpha {} delta {}s level {}: rate {:.4} (se {:.4}, {} degenerate)\n",
                statistic_label(test),
                r.intensity,
                r.alpha,
                r.delta_seconds,
                r.level,
                r.rate,
                r.std_error,
                r.degenerate
            ));
        }
        ctx.write(
            g.scenario.as_str(),
            statistic_label(test),
            "csv",
            &csv_string(&rows)?,
            &mut out,
        )?;
    }
    ctx.write(
        g.scenario.as_str(),
        "rejections",
        "json",
        &json_string(&table)?,
        &mut out,
    )?;
    if histogram {
        let h = standardized_histogram(g)?;
        summary.push_str(&format!(
            "  standardized {}: mean {:.4}, variance {:.4}, skewness {:.4}, KS {:.4}, {} excluded\n",
            statistic_label(h.statistic),
            h.mean,
            h.variance,
            h.skewness,
            h.ks_distance,
            h.excluded
        ));
        let rows: Vec<ZRow> =
            h.z.iter()
                .enumerate()
                .map(|(index, &z)| ZRow { index, z })
                .collect();
        let label = format!("{}-z", statistic_label(h.statistic));
        ctx.write(
            g.scenario.as_str(),
            &label,
            "csv",
            &csv_string(&rows)?,
            &mut out,
        )?;
    }
    out.summary = summary;
    Ok(out)
}

fn sweep(ctx: &Context, g: &ExperimentGrid) -> Result<Outcome, Error> {
    let rows = sweep_alpha(g)?;
    let mut out = Outcome::default();
    let mut summary = format!(
        "alpha sweep of {} ({} replicates)\n",
        g.scenario, g.replicates
    );
    for r in &rows {
        summary.push_str(&format!(
            "  {} {} alpha {}: mean {:.4} (sd {:.4}, {} degenerate)\n",
            statistic_label(r.statistic),
            r.intensity,
            r.alpha,
            r.mean,
            r.sd,
            r.degenerate
        ));
    }
    for &test in g.scenario.tests() {
        let part: Vec<_> = rows
            .iter()
            .filter(|r| r.statistic == test)
            .cloned()
            .collect();
        let label = format!("{}-alpha-sweep", statistic_label(test));
        ctx.write(
            g.scenario.as_str(),
            &label,
            "csv",
            &csv_string(&part)?,
            &mut out,
        )?;
    }
    out.summary = summary;
    Ok(out)
}

fn freq(ctx: &Context, g: &ExperimentGrid) -> Result<Outcome, Error> {
    let rows = frequency_sweep(g)?;
    let mut out = Outcome::default();
    let mut summary = format!(
        "frequency sweep of {} ({} replicates, {} day(s))\n",
        g.scenario, g.replicates, g.horizon_days
    );
    for r in &rows {
        summary.push_str(&format!(
            "  {} {} delta {}s level {}: rate {:.4} (se {:.4}), median {:.4} [{:.4}, {:.4}]\n",
            statistic_label(r.statistic),
            r.intensity,
            r.delta_seconds,
            r.level,
            r.rate,
            r.std_error,
            r.median,
            r.q1,
            r.q3
        ));
    }
    for &test in g.scenario.tests() {
        let part: Vec<_> = rows
            .iter()
            .filter(|r| r.statistic == test)
            .cloned()
            .collect();
        let label = format!("{}-freq-sweep", statistic_label(test));
        ctx.write(
            g.scenario.as_str(),
            &label,
            "csv",
            &csv_string(&part)?,
            &mut out,
        )?;
    }
    out.summary = summary;
    Ok(out)
}

fn ingest(ctx: &Context, a: IngestArgs) -> Result<Outcome, Error> {
    let fa = fa_config(ctx, &a.input, None, None)?;
    let mut ia = ctx.file.infinite;
    ia.level = a.input.level.unwrap_or(ia.level);
    ia.truncation.varpi = a.input.varpi.unwrap_or(ia.truncation.varpi);
    ia.validate()?;
    let loaded = load_input(ctx, &a.input)?;
    let alphas = if a.input.alphas.is_empty() {
        ctx.file.ingest.alphas.clone()
    } else {
        a.input.alphas.clone()
    };
    let result = run_empirical_pipeline(&loaded.path, &fa, &ia, &alphas)?;
    let mut summary = loaded.note.clone();
    if !result.excluded_days.is_empty() {
        summary.push_str(&format!(
            "excluded days with zero volatility: {:?}\n",
            result.excluded_days
        ));
    }
    let mut fa_rows = Vec::new();
    let mut ia_rows = Vec::new();
    summary.push_str("finite-activity test, per-day truncation:\n");
    for r in &result.by_alpha {
        summary.push_str(&outcome_line(r.alpha, &r.finite_activity));
        summary.push_str(&noise_band(&r.finite_activity, fa.p, fa.k));
        fa_rows.push(OutcomeRow {
            source: loaded.stem.clone(),
            alpha: r.alpha,
            outcome: r.finite_activity.clone(),
        });
    }
    summary.push_str("infinite-activity test, per-day truncation:\n");
    for r in &result.by_alpha {
        summary.push_str(&outcome_line(r.alpha, &r.infinite_activity));
        ia_rows.push(OutcomeRow {
            source: loaded.stem.clone(),
            alpha: r.alpha,
            outcome: r.infinite_activity.clone(),
        });
    }
    let mut out = Outcome {
        degenerate: fa_rows
            .iter()
            .chain(&ia_rows)
            .any(|r| r.outcome.report().is_none()),
        ..Default::default()
    };
    ctx.write(&loaded.stem, "s_n", "csv", &csv_string(&fa_rows)?, &mut out)?;
    ctx.write(
        &loaded.stem,
        "s_n_prime",
        "csv",
        &csv_string(&ia_rows)?,
        &mut out,
    )?;
    ctx.write(
        &loaded.stem,
        "volatility",
        "csv",
        &csv_string(&result.day_volatility)?,
        &mut out,
    )?;
    ctx.write(
        &loaded.stem,
        "pipeline",
        "json",
        &json_string(&result)?,
        &mut out,
    )?;
    out.summary = summary;
    Ok(out)
}

fn moments(ctx: &Context, a: MomentsArgs) -> Result<Outcome, Error> {
    let m = MomentTable::new(a.p, a.k)?;
    let summary = format!(
        "p {} k {}\n  m_p    = {}\n  m_2p   = {}\n  m_kp   = {}\n  N(p,k) = {}\n",
        a.p,
        a.k,
        real(m.m_p),
        real(m.m_2p),
        real(m.m_kp),
        real(m.n_pk)
    );
    let mut out = Outcome {
        summary,
        ..Default::default()
    };
    ctx.write(
        "moments",
        &format!("p{}-k{}", a.p, a.k),
        "csv",
        &csv_string(&[m])?,
        &mut out,
    )?;
    Ok(out)
}

/// Every flag of every subcommand, for documentation checks.
pub fn all_flags() -> Vec<(String, String, Option<String>)> {
    use clap::CommandFactory;
    let mut root = Cli::command();
    root.build();
    let mut out = Vec::new();
    let mut visit = |cmd: &clap::Command, name: &str| {
        for arg in cmd.get_arguments() {
            if let Some(long) = arg.get_long() {
                out.push((
                    name.to_string(),
                    long.to_string(),
                    arg.get_help().map(|h| h.to_string()),
                ));
            }
        }
    };
    visit(&root, "");
    for sub in root.get_subcommands() {
        visit(sub, sub.get_name());
    }
    out
}

/// `--help` text of one subcommand, or of the root for `None`.
pub fn help_text(sub: Option<&str>) -> String {
    use clap::CommandFactory;
    let mut root = Cli::command();
    root.build();
    match sub {
        None => root.render_long_help().to_string(),
        Some(s) => root
            .find_subcommand_mut(s)
            .map(|c| c.render_long_help().to_string())
            .unwrap_or_default(),
    }
}
