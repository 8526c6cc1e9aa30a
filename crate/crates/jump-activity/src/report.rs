//! CSV and JSON artifacts.
//!
//! CSV columns come in a fixed order and every real number is written in
//! scientific notation with 17 significant digits, which round-trips any
//! `f64`. JSON goes through `serde_json`, whose float output is the
//! shortest string that round-trips.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use jump_activity_core::empirical::DayVolatility;
use jump_activity_core::statistics::DegenerateReason;
use jump_activity_core::{MomentTable, TestKind, TestOutcome};
use serde::Serialize;

use crate::montecarlo::{FrequencyRow, RejectionRow, SweepRow};
use crate::Error;

/// 17 significant digits.
pub fn real(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

fn opt_real(x: Option<f64>) -> String {
    x.map(real).unwrap_or_default()
}

/// Short statistic label used in file names and tables.
pub fn statistic_label(test: TestKind) -> &'static str {
    match test {
        TestKind::FiniteActivity => "s_n",
        TestKind::InfiniteActivity => "s_n_prime",
    }
}

pub fn reason_label(reason: DegenerateReason) -> &'static str {
    match reason {
        DegenerateReason::ZeroDenominator => "zero_denominator",
        DegenerateReason::NonPositiveVariance => "non_positive_variance",
    }
}

/// A row type with a fixed column layout.
pub trait CsvRow {
    fn header() -> &'static [&'static str];
    fn fields(&self) -> Vec<String>;
}

pub fn write_csv<W: Write, T: CsvRow>(out: W, rows: &[T]) -> Result<(), Error> {
    let mut w = csv::Writer::from_writer(out);
    let err = |e: csv::Error| Error::Input(format!("cannot write CSV: {e}"));
    w.write_record(T::header()).map_err(err)?;
    for row in rows {
        w.write_record(row.fields()).map_err(err)?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))
}

pub fn csv_string<T: CsvRow>(rows: &[T]) -> Result<String, Error> {
    let mut buf = Vec::new();
    write_csv(&mut buf, rows)?;
    Ok(String::from_utf8(buf).expect("CSV output is UTF-8"))
}

pub fn json_string<T: Serialize + ?Sized>(value: &T) -> Result<String, Error> {
    let mut s = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Input(format!("cannot encode JSON: {e}")))?;
    s.push('\n');
    Ok(s)
}

/// `<scenario>_<statistic>_<YYYYMMDD>.<ext>`
pub fn artifact_name(scenario: &str, statistic: &str, date: NaiveDate, ext: &str) -> String {
    format!("{scenario}_{statistic}_{}.{ext}", date.format("%Y%m%d"))
}

/// Writes `contents` to `dir/name`, creating `dir` if needed.
pub fn write_artifact(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, Error> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

/// One test outcome with the truncation index it was computed at.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutcomeRow {
    pub source: String,
    pub alpha: f64,
    pub outcome: TestOutcome,
}

impl CsvRow for OutcomeRow {
    fn header() -> &'static [&'static str] {
        &[
            "source",
            "alpha",
            "test",
            "outcome",
            "statistic",
            "null_limit",
            "variance",
            "raw_variance",
            "z_score",
            "critical_value",
            "level",
            "reject",
            "n_increments_used",
            "n_increments_total",
            "truncation_cutoffs",
            "degenerate_reason",
        ]
    }

    fn fields(&self) -> Vec<String> {
        let head = [self.source.clone(), real(self.alpha)];
        let tail: Vec<String> = match &self.outcome {
            TestOutcome::Decision(r) => vec![
                r.test.as_str().into(),
                "decision".into(),
                real(r.statistic),
                real(r.null_limit),
                real(r.variance),
                real(r.raw_variance),
                real(r.z_score),
                real(r.critical_value),
                real(r.level),
                r.reject.to_string(),
                r.n_increments_used.to_string(),
                r.n_increments_total.to_string(),
                r.truncation_cutoffs
                    .iter()
                    .map(|u| real(*u))
                    .collect::<Vec<_>>()
                    .join(";"),
                String::new(),
            ],
            TestOutcome::NoDecision(d) => vec![
                d.test.as_str().into(),
                "no_decision".into(),
                opt_real(d.statistic),
                String::new(),
                String::new(),
                opt_real(d.raw_variance),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                d.n_retained.to_string(),
                d.n_increments.to_string(),
                String::new(),
                reason_label(d.reason).into(),
            ],
        };
        head.into_iter().chain(tail).collect()
    }
}

impl CsvRow for RejectionRow {
    fn header() -> &'static [&'static str] {
        &[
            "scenario",
            "statistic",
            "intensity",
            "level",
            "alpha",
            "delta_seconds",
            "replicates",
            "rejections",
            "acceptances",
            "degenerate",
            "rate",
            "std_error",
        ]
    }

    fn fields(&self) -> Vec<String> {
        vec![
            self.scenario.as_str().into(),
            statistic_label(self.statistic).into(),
            self.intensity.as_str().into(),
            real(self.level),
            real(self.alpha),
            real(self.delta_seconds),
            self.replicates.to_string(),
            self.rejections.to_string(),
            self.acceptances.to_string(),
            self.degenerate.to_string(),
            real(self.rate),
            real(self.std_error),
        ]
    }
}

impl CsvRow for SweepRow {
    fn header() -> &'static [&'static str] {
        &[
            "statistic",
            "intensity",
            "alpha",
            "mean",
            "sd",
            "valid",
            "degenerate",
        ]
    }

    fn fields(&self) -> Vec<String> {
        vec![
            statistic_label(self.statistic).into(),
            self.intensity.as_str().into(),
            real(self.alpha),
            real(self.mean),
            real(self.sd),
            self.valid.to_string(),
            self.degenerate.to_string(),
        ]
    }
}

impl CsvRow for FrequencyRow {
    fn header() -> &'static [&'static str] {
        &[
            "statistic",
            "intensity",
            "delta_seconds",
            "alpha",
            "level",
            "rate",
            "std_error",
            "decided",
            "degenerate",
            "mean",
            "q1",
            "median",
            "q3",
        ]
    }

    fn fields(&self) -> Vec<String> {
        vec![
            statistic_label(self.statistic).into(),
            self.intensity.as_str().into(),
            real(self.delta_seconds),
            real(self.alpha),
            real(self.level),
            real(self.rate),
            real(self.std_error),
            self.decided.to_string(),
            self.degenerate.to_string(),
            real(self.mean),
            real(self.q1),
            real(self.median),
            real(self.q3),
        ]
    }
}

impl CsvRow for DayVolatility {
    fn header() -> &'static [&'static str] {
        &["day", "sigma_hat", "n_used"]
    }

    fn fields(&self) -> Vec<String> {
        vec![
            self.day.to_string(),
            real(self.sigma_hat),
            self.n_used.to_string(),
        ]
    }
}

/// Standardized statistic of one replicate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ZRow {
    pub index: usize,
    pub z: f64,
}

impl CsvRow for ZRow {
    fn header() -> &'static [&'static str] {
        &["index", "z"]
    }

    fn fields(&self) -> Vec<String> {
        vec![self.index.to_string(), real(self.z)]
    }
}

impl CsvRow for MomentTable {
    fn header() -> &'static [&'static str] {
        &["p", "k", "m_p", "m_2p", "m_kp", "n_pk"]
    }

    fn fields(&self) -> Vec<String> {
        vec![
            real(self.p),
            self.k.to_string(),
            real(self.m_p),
            real(self.m_2p),
            real(self.m_kp),
            real(self.n_pk),
        ]
    }
}

/// Where a finite-activity statistic sits among its three candidate
/// limits: `k^(p/2-1)` (finite activity), 1 (infinite activity) and `1/k`
/// (noise dominates).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    FiniteActivity,
    InfiniteActivity,
    Noise,
}

impl Regime {
    pub fn describe(self) -> &'static str {
        match self {
            Regime::FiniteActivity => "closest to the finite-activity limit",
            Regime::InfiniteActivity => "closest to the infinite-activity limit 1",
            Regime::Noise => "closest to 1/k: microstructure noise likely dominates",
        }
    }
}

/// Nearest candidate limit of `S_n`, compared on the log scale.
pub fn classify_s_n(statistic: f64, p: f64, k: u32) -> Option<Regime> {
    if !(statistic > 0.0 && statistic.is_finite()) || k < 2 {
        return None;
    }
    let k = f64::from(k);
    let candidates = [
        (Regime::FiniteActivity, k.powf(p / 2.0 - 1.0)),
        (Regime::InfiniteActivity, 1.0),
        (Regime::Noise, 1.0 / k),
    ];
    candidates
        .into_iter()
        .min_by(|a, b| {
            (statistic.ln() - a.1.ln())
                .abs()
                .total_cmp(&(statistic.ln() - b.1.ln()).abs())
        })
        .map(|c| c.0)
}
