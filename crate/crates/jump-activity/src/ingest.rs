//! Tick files: loading, quality filtering, previous-tick resampling onto a
//! regular intraday grid, and export of paths back to the same format.
//!
//! The file format is a UTF-8 CSV with header `timestamp_ms,price` and an
//! optional third column `flag`. Timestamps are milliseconds since the Unix
//! epoch; calendar days and session bounds are read in exchange time, given
//! by a fixed UTC offset.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use chrono::{DateTime, NaiveDate};
use jump_activity_core::{PathSeries, DAYS_PER_YEAR};
use serde::{Deserialize, Serialize};

use crate::Error;

const MS_PER_DAY: i64 = 86_400_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TickRecord {
    pub timestamp_ms: i64,
    pub price: f64,
    pub flag: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct LoadedTicks {
    /// Retained ticks, stably sorted by timestamp.
    pub ticks: Vec<TickRecord>,
    /// Rows removed by the flag filter.
    pub dropped: usize,
}

/// Reads a tick CSV.
///
/// With `good_flags = Some(list)`, rows whose flag is not in `list` are
/// dropped; without a `flag` column, or with `None`, every row is kept. A
/// row that cannot be parsed, or whose price is not a positive finite
/// number, is an error naming its line.
pub fn load_ticks<R: Read>(source: R, good_flags: Option<&[String]>) -> Result<LoadedTicks, Error> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(source);
    let mut records = reader.records();
    let header = match records.next() {
        None => return Ok(LoadedTicks::default()),
        Some(h) => h.map_err(|e| Error::Input(format!("unreadable tick file: {e}")))?,
    };
    let names: Vec<&str> = header.iter().collect();
    let has_flag = match names.as_slice() {
        ["timestamp_ms", "price"] => false,
        ["timestamp_ms", "price", "flag"] => true,
        _ => {
            return Err(Error::Input(format!(
                "unrecognized header `{}`; expected `timestamp_ms,price[,flag]`",
                names.join(",")
            )))
        }
    };
    let mut out = LoadedTicks::default();
    for rec in records {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            Error::Input(format!("line {line}: {e}"))
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        let bad = |what: &str| Error::Input(format!("line {line}: {what}"));
        if rec.len() != names.len() {
            return Err(bad(&format!(
                "expected {} fields, found {}",
                names.len(),
                rec.len()
            )));
        }
        let timestamp_ms: i64 = rec[0]
            .parse()
            .map_err(|_| bad(&format!("bad timestamp `{}`", &rec[0])))?;
        let price: f64 = rec[1]
            .parse()
            .map_err(|_| bad(&format!("bad price `{}`", &rec[1])))?;
        if !(price > 0.0 && price.is_finite()) {
            return Err(bad(&format!("price must be positive, got {price}")));
        }
        let flag = has_flag.then(|| rec[2].to_string());
        if let (Some(good), Some(f)) = (good_flags, &flag) {
            if !good.iter().any(|g| g == f) {
                out.dropped += 1;
                continue;
            }
        }
        out.ticks.push(TickRecord {
            timestamp_ms,
            price,
            flag,
        });
    }
    out.ticks.sort_by_key(|t| t.timestamp_ms);
    Ok(out)
}

pub fn load_ticks_file(
    path: impl AsRef<Path>,
    good_flags: Option<&[String]>,
) -> Result<LoadedTicks, Error> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    load_ticks(std::io::BufReader::new(file), good_flags)
}

/// Trading session in exchange time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SessionConfig {
    /// Seconds after midnight of the first grid point.
    pub open_seconds: u32,
    /// Seconds after midnight of the last grid point.
    pub close_seconds: u32,
    /// Exchange time minus UTC, in minutes.
    pub utc_offset_minutes: i32,
    /// Days with fewer ticks up to the close are skipped.
    pub min_ticks: usize,
}

impl Default for SessionConfig {
    /// 09:30 to 16:00, timestamps already in exchange time.
    fn default() -> Self {
        Self {
            open_seconds: 34_200,
            close_seconds: 57_600,
            utc_offset_minutes: 0,
            min_ticks: 1,
        }
    }
}

impl SessionConfig {
    pub fn length_seconds(&self) -> u32 {
        self.close_seconds.saturating_sub(self.open_seconds)
    }

    pub fn validate(&self) -> Result<(), Error> {
        if self.open_seconds >= self.close_seconds || self.close_seconds > 86_400 {
            return Err(Error::Input(
                "session must satisfy open < close <= 24h".into(),
            ));
        }
        Ok(())
    }

    /// Grid step in milliseconds; it must divide the session.
    fn step_ms(&self, delta_seconds: f64) -> Result<i64, Error> {
        self.validate()?;
        let step = (delta_seconds * 1000.0).round();
        let session_ms = i64::from(self.length_seconds()) * 1000;
        if !(step >= 1.0)
            || (step - delta_seconds * 1000.0).abs() > 1e-6
            || session_ms % (step as i64) != 0
        {
            return Err(Error::Input(format!(
                "sampling interval {delta_seconds}s must be a whole number of milliseconds dividing the {}s session",
                self.length_seconds()
            )));
        }
        Ok(step as i64)
    }

    /// One session is 1/252 of a year.
    pub fn delta_years(&self, delta_seconds: f64) -> f64 {
        delta_seconds / (f64::from(self.length_seconds()) * DAYS_PER_YEAR)
    }

    fn local_ms(&self, timestamp_ms: i64) -> i64 {
        timestamp_ms + i64::from(self.utc_offset_minutes) * 60_000
    }
}

fn date_of_local_ms(local_ms: i64) -> NaiveDate {
    DateTime::from_timestamp_millis(local_ms.div_euclid(MS_PER_DAY) * MS_PER_DAY)
        .expect("timestamp in chrono range")
        .date_naive()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum SkipReason {
    TooFewTicks { count: usize, min: usize },
    NoTickBeforeOpen,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkippedDay {
    pub date: NaiveDate,
    #[serde(flatten)]
    pub reason: SkipReason,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Resampled {
    pub path: PathSeries,
    /// Calendar date of each day segment.
    pub dates: Vec<NaiveDate>,
    pub skipped: Vec<SkippedDay>,
}

/// Samples log prices onto the grid `open, open + delta, ..., close` of each
/// calendar day, taking the last tick at or before each grid time.
///
/// Ticks of the same calendar day before the open seed the first grid
/// point; ticks after the close are ignored. Previous-tick sampling is
/// causal: ticks after a grid time never change its value.
pub fn resample_to_grid(
    ticks: &[TickRecord],
    delta_seconds: f64,
    session: &SessionConfig,
) -> Result<Resampled, Error> {
    let step = session.step_ms(delta_seconds)?;
    if ticks
        .windows(2)
        .any(|w| w[0].timestamp_ms > w[1].timestamp_ms)
    {
        return Err(Error::Input("ticks must be sorted by timestamp".into()));
    }
    let open_ms = i64::from(session.open_seconds) * 1000;
    let close_ms = i64::from(session.close_seconds) * 1000;
    let n_steps = (close_ms - open_ms) / step;

    let mut days = Vec::new();
    let mut dates = Vec::new();
    let mut skipped = Vec::new();
    let mut start = 0;
    while start < ticks.len() {
        let day = session
            .local_ms(ticks[start].timestamp_ms)
            .div_euclid(MS_PER_DAY);
        let end = start
            + ticks[start..]
                .iter()
                .take_while(|t| session.local_ms(t.timestamp_ms).div_euclid(MS_PER_DAY) == day)
                .count();
        let date = date_of_local_ms(day * MS_PER_DAY);
        let day_ticks: Vec<(i64, f64)> = ticks[start..end]
            .iter()
            .map(|t| (session.local_ms(t.timestamp_ms) - day * MS_PER_DAY, t.price))
            .take_while(|&(ms, _)| ms <= close_ms)
            .collect();
        start = end;
        if day_ticks.len() < session.min_ticks.max(1) {
            skipped.push(SkippedDay {
                date,
                reason: SkipReason::TooFewTicks {
                    count: day_ticks.len(),
                    min: session.min_ticks.max(1),
                },
            });
            continue;
        }
        if day_ticks[0].0 > open_ms {
            skipped.push(SkippedDay {
                date,
                reason: SkipReason::NoTickBeforeOpen,
            });
            continue;
        }
        let mut values = Vec::with_capacity(n_steps as usize + 1);
        let mut next = 0;
        for j in 0..=n_steps {
            let t = open_ms + j * step;
            while next + 1 < day_ticks.len() && day_ticks[next + 1].0 <= t {
                next += 1;
            }
            values.push(day_ticks[next].1.ln());
        }
        days.push(values);
        dates.push(date);
    }
    if days.is_empty() {
        return Err(Error::Input(format!(
            "no usable trading days ({} skipped)",
            skipped.len()
        )));
    }
    let path = PathSeries::from_days(days, session.delta_years(delta_seconds))?;
    Ok(Resampled {
        path,
        dates,
        skipped,
    })
}

/// Writes a path as ticks on its grid: day `d` is dated `start + d` and
/// each observation becomes one row with price `exp(x)` and flag `0`.
///
/// Prices are printed in shortest round-trip form, so ingesting the file
/// on the same grid recovers `ln(exp(x))` exactly.
pub fn export_path<W: Write>(
    path: &PathSeries,
    out: W,
    start: NaiveDate,
    session: &SessionConfig,
) -> Result<(), Error> {
    let delta_seconds = path.delta() * DAYS_PER_YEAR * f64::from(session.length_seconds());
    let step = session.step_ms(delta_seconds)?;
    let mut w = csv::Writer::from_writer(out);
    let csv_err = |e: csv::Error| Error::Input(format!("cannot write ticks: {e}"));
    w.write_record(["timestamp_ms", "price", "flag"])
        .map_err(csv_err)?;
    let epoch = NaiveDate::from_ymd_opt(1970, 1, 1).expect("valid date");
    for (d, values) in path.days().enumerate() {
        let date = start + chrono::Days::new(d as u64);
        let day_ms =
            (date - epoch).num_days() * MS_PER_DAY - i64::from(session.utc_offset_minutes) * 60_000;
        let open = day_ms + i64::from(session.open_seconds) * 1000;
        if (values.len() as i64 - 1) * step != i64::from(session.length_seconds()) * 1000 {
            return Err(Error::Input("path days do not span the session".into()));
        }
        for (j, x) in values.iter().enumerate() {
            w.write_record([
                (open + j as i64 * step).to_string(),
                x.exp().to_string(),
                "0".to_string(),
            ])
            .map_err(csv_err)?;
        }
    }
    w.flush().map_err(|e| Error::io("<ticks>", e))?;
    Ok(())
}
