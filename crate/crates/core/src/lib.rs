//! Truncated power variation tests for the activity of the jump component of
//! a discretely observed semimartingale.
//!
//! Two complementary tests are provided:
//!
//! * [`statistics::test_finite_activity`] takes finite jump activity as the null
//!   and compares truncated power variations at two sampling frequencies.
//! * [`statistics::test_infinite_activity`] takes infinite jump activity as the
//!   null and compares truncated power variations at two cutoffs.
//!
//! The crate is `no_std` (it needs `alloc`); `erfc` and `tgamma` come from
//! `libm`. IO, the Monte Carlo harness and the command line live in the
//! `jump-activity` crate.

// `!(x > 0.0)` is how NaN gets rejected along with the out-of-range values
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod empirical;
mod error;
pub mod moments;
pub mod normal;
pub mod pathseries;
pub mod quadrature;
pub mod simulator;
pub mod statistics;
pub mod sum;

pub use error::{Error, Result};
pub use moments::MomentTable;
pub use pathseries::{PathSeries, TruncationSpec};
pub use statistics::{
    DegenerateSample, FiniteActivityTestConfig, InfiniteActivityTestConfig, TestKind, TestOutcome,
    TestReport,
};
pub use sum::CompensatedSum;

/// Seconds in one trading day (6.5 hours).
pub const SECONDS_PER_DAY: f64 = 23_400.0;
/// Trading days per year.
pub const DAYS_PER_YEAR: f64 = 252.0;

/// Converts an interval in seconds into years of 252 trading days of 6.5 hours.
pub fn seconds_to_years(seconds: f64) -> f64 {
    seconds / (DAYS_PER_YEAR * SECONDS_PER_DAY)
}
