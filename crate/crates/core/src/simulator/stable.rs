//! Symmetric stable increments and calibration of the jump scale.

use core::f64::consts::{FRAC_PI_2, PI};

use rand::Rng;
use rand_distr::{Exp1, Open01};

use crate::quadrature::{integrate, Tolerance};
use crate::{Error, Result};
// inherent f64 math shadows this whenever std is linked
#[allow(unused_imports)]
use num_traits::Float;

fn check_beta(beta: f64) -> Result<()> {
    if beta > 0.0 && beta < 2.0 {
        Ok(())
    } else {
        Err(Error::invalid("stability index must lie in (0, 2)"))
    }
}

/// One increment over time `scale_time` of the symmetric `beta`-stable Lévy
/// process with characteristic function `exp(-t |s|^beta)`, by the
/// Chambers–Mallows–Stuck transform.
pub fn stable_increment<R: Rng + ?Sized>(beta: f64, scale_time: f64, rng: &mut R) -> Result<f64> {
    check_beta(beta)?;
    if !(scale_time > 0.0) {
        return Err(Error::invalid("time scale must be positive"));
    }
    Ok(stable_increment_unchecked(beta, scale_time, rng))
}

#[inline]
pub(crate) fn stable_increment_unchecked<R: Rng + ?Sized>(
    beta: f64,
    scale_time: f64,
    rng: &mut R,
) -> f64 {
    let u: f64 = rng.sample(Open01);
    let v = PI * (u - 0.5);
    if beta == 1.0 {
        return scale_time * v.tan();
    }
    let w: f64 = rng.sample(Exp1);
    let x = (beta * v).sin() / v.cos().powf(1.0 / beta)
        * (((1.0 - beta) * v).cos() / w).powf((1.0 - beta) / beta);
    scale_time.powf(1.0 / beta) * x
}

/// `P(|Y_1| >= x)` for the standard symmetric `beta`-stable law above.
///
/// Closed form for `beta = 1`; otherwise Nolan's integral representation of
/// the distribution function, integrated numerically.
pub fn stable_tail(beta: f64, x: f64) -> Result<f64> {
    check_beta(beta)?;
    if !(x > 0.0) {
        return Ok(1.0);
    }
    if beta == 1.0 {
        return Ok(1.0 - 2.0 / PI * x.atan());
    }
    let e = beta / (beta - 1.0);
    let log_x = x.ln();
    let integrand = |theta: f64| {
        if theta <= 0.0 || theta >= FRAC_PI_2 {
            // limits of exp(-x^e V(theta)) at the ends of the range
            return match (theta <= 0.0, beta < 1.0) {
                (true, true) | (false, false) => 1.0,
                _ => 0.0,
            };
        }
        let log_v = e * (theta.cos().ln() - (beta * theta).sin().ln())
            + ((beta - 1.0) * theta).cos().ln()
            - theta.cos().ln();
        (-(e * log_x + log_v).exp()).exp()
    };
    let tol = Tolerance {
        abs: 1e-13,
        rel: 1e-12,
        max_intervals: 10_000,
    };
    let integral = integrate(integrand, 0.0, FRAC_PI_2, tol)?.value;
    let tail = if beta < 1.0 {
        1.0 - 2.0 / PI * integral
    } else {
        2.0 / PI * integral
    };
    Ok(tail.clamp(0.0, 1.0))
}

/// Tail probability `P(|theta dY| >= 4 sqrt(eta) sqrt(delta))` of the scaled
/// stable increment over one sampling interval.
pub fn jump_tail_probability(theta: f64, beta: f64, delta: f64, eta: f64) -> Result<f64> {
    let threshold = 4.0 * eta.sqrt() * delta.sqrt();
    stable_tail(beta, threshold / (theta * delta.powf(1.0 / beta)))
}

/// Scale `theta` of the stable component for which
/// `P(|theta dY| >= 4 sqrt(eta) sqrt(delta)) = tp`.
pub fn calibrate_theta(tp: f64, beta: f64, delta: f64, eta: f64) -> Result<f64> {
    check_beta(beta)?;
    if !(tp > 0.0 && tp < 1.0) {
        return Err(Error::invalid("tail probability must lie in (0, 1)"));
    }
    if !(delta > 0.0 && eta > 0.0) {
        return Err(Error::invalid("delta and eta must be positive"));
    }
    let threshold = 4.0 * eta.sqrt() * delta.sqrt();
    let x_star = if beta == 1.0 {
        (PI * (1.0 - tp) / 2.0).tan()
    } else {
        invert_tail(beta, tp)?
    };
    Ok(threshold / (delta.powf(1.0 / beta) * x_star))
}

/// Solves `stable_tail(beta, x) = tp` by bisection in `ln x`.
fn invert_tail(beta: f64, tp: f64) -> Result<f64> {
    let (mut lo, mut hi) = (-1.0f64, 1.0f64);
    let mut expansions = 0;
    while stable_tail(beta, lo.exp())? < tp {
        lo -= 2.0;
        expansions += 1;
        if expansions > 60 {
            return Err(Error::Numerical {
                message: alloc::format!("no lower bracket for tail {tp} (ln x down to {lo})"),
                achieved: stable_tail(beta, lo.exp())?,
            });
        }
    }
    while stable_tail(beta, hi.exp())? > tp {
        hi += 2.0;
        expansions += 1;
        if expansions > 60 {
            return Err(Error::Numerical {
                message: alloc::format!("no upper bracket for tail {tp} (ln x up to {hi})"),
                achieved: stable_tail(beta, hi.exp())?,
            });
        }
    }
    // 1e-12 in ln x is well inside the 1e-6 relative target
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if stable_tail(beta, mid.exp())? > tp {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((0.5 * (lo + hi)).exp())
}
