//! Absolute moments of the standard normal law used to normalize the
//! finite-activity statistic.

use core::f64::consts::PI;
// inherent f64 math shadows this whenever std is linked
#[allow(unused_imports)]
use num_traits::Float;

use serde::{Deserialize, Serialize};

use crate::quadrature::{integrate, integrate_panels, Tolerance};
use crate::{Error, Result};

/// `E|U|^p` for `U ~ N(0, 1)`, i.e. `2^{p/2} Gamma((p+1)/2) / sqrt(pi)`.
///
/// Integer orders use the double-factorial form so that even moments are
/// exact: `E|U|^{2j} = (2j-1)!!`.
pub fn abs_normal_moment(p: f64) -> Result<f64> {
    if !(p > 0.0 && p.is_finite()) {
        return Err(Error::invalid("moment order must be positive"));
    }
    if p.fract() == 0.0 && p <= 300.0 {
        let n = p as u32;
        if n.is_multiple_of(2) {
            return Ok((1..n).step_by(2).map(f64::from).product());
        }
        // E|U|^{2j+1} = 2^j j! sqrt(2/pi)
        let j = (n - 1) / 2;
        let mut acc = (2.0 / PI).sqrt();
        for i in 1..=j {
            acc *= 2.0 * f64::from(i);
        }
        return Ok(acc);
    }
    Ok(2f64.powf(0.5 * p) * libm::tgamma(0.5 * (p + 1.0)) / PI.sqrt())
}

fn check_joint_args(p: f64, k: u32) -> Result<()> {
    if !(p > 2.0 && p.is_finite()) {
        return Err(Error::invalid("joint moment requires p > 2"));
    }
    if k < 2 {
        return Err(Error::invalid("joint moment requires k >= 2"));
    }
    Ok(())
}

/// `E(|U|^p |U + sqrt(k-1) V|^p)` for independent standard normals, by
/// nested adaptive Gauss–Kronrod quadrature.
///
/// The integrand is symmetric under `(u, v) -> (-u, -v)`, so only `u >= 0`
/// is integrated. The inner integral over `v` is split at its kink
/// `v = -u / sqrt(k-1)`.
pub fn joint_abs_moment(p: f64, k: u32) -> Result<f64> {
    check_joint_args(p, k)?;
    const RANGE: f64 = 20.0;
    let a = f64::from(k - 1).sqrt();
    let inner_tol = Tolerance {
        abs: 1e-15,
        rel: 1e-14,
        max_intervals: 4_000,
    };
    let outer_tol = Tolerance {
        abs: 1e-12,
        rel: 1e-14,
        max_intervals: 4_000,
    };
    let mut failure = None;
    let inner = |u: f64, failure: &mut Option<Error>| -> f64 {
        let kink = -u / a;
        let f = |v: f64| (u + a * v).abs().powf(p) * crate::normal::pdf(v);
        match integrate_panels(f, &[-RANGE, kink, RANGE], inner_tol) {
            Ok(e) => e.value,
            Err(e) => {
                failure.get_or_insert(e);
                f64::NAN
            }
        }
    };
    let outer = integrate(
        |u| {
            if u == 0.0 {
                return 0.0;
            }
            u.powf(p) * crate::normal::pdf(u) * inner(u, &mut failure)
        },
        0.0,
        RANGE,
        outer_tol,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(2.0 * outer?.value)
}

/// Closed form of the joint moment for even integer `p`, from the binomial
/// expansion of `(U + aV)^p` with `a^2 = k - 1`.
pub fn joint_abs_moment_exact(p: u32, k: u32) -> Result<f64> {
    if p < 4 || !p.is_multiple_of(2) {
        return Err(Error::invalid("closed form needs an even integer p > 2"));
    }
    check_joint_args(f64::from(p), k)?;
    let a2 = f64::from(k - 1);
    let mut total = 0.0;
    let mut binom = 1.0;
    for j in 0..=p {
        if j > 0 {
            binom = binom * f64::from(p - j + 1) / f64::from(j);
        }
        if j % 2 == 0 {
            let term = binom
                * a2.powi((j / 2) as i32)
                * abs_normal_moment(f64::from(2 * p - j))?
                * if j == 0 {
                    1.0
                } else {
                    abs_normal_moment(f64::from(j))?
                };
            total += term;
        }
    }
    Ok(total)
}

/// `N(p, k)` from the individual moments, as it enters the variance
/// estimate `V_n = N(p,k) B(2p) / B(p)^2`.
pub fn n_constant_from(p: f64, k: u32, m_p: f64, m_2p: f64, m_kp: f64) -> f64 {
    let kf = f64::from(k);
    let kp2 = kf.powf(p - 2.0);
    (kp2 * (1.0 + kf) * m_2p + kp2 * (kf - 1.0) * m_p * m_p - 2.0 * kf.powf(0.5 * p - 1.0) * m_kp)
        / m_2p
}

pub fn n_constant(p: f64, k: u32) -> Result<f64> {
    Ok(MomentTable::new(p, k)?.n_pk)
}

/// The normal-moment constants needed by the finite-activity test for one
/// `(p, k)` pair. Compute once and share.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentTable {
    pub p: f64,
    pub k: u32,
    pub m_p: f64,
    pub m_2p: f64,
    pub m_kp: f64,
    pub n_pk: f64,
}

impl MomentTable {
    /// Uses the closed-form joint moment for even integer `p` and quadrature
    /// otherwise.
    pub fn new(p: f64, k: u32) -> Result<Self> {
        check_joint_args(p, k)?;
        let m_p = abs_normal_moment(p)?;
        let m_2p = abs_normal_moment(2.0 * p)?;
        let m_kp = if p.fract() == 0.0 && (p as u32).is_multiple_of(2) && p <= 64.0 {
            joint_abs_moment_exact(p as u32, k)?
        } else {
            joint_abs_moment(p, k)?
        };
        let n_pk = n_constant_from(p, k, m_p, m_2p, m_kp);
        if !(n_pk > 0.0) {
            return Err(Error::Numerical {
                message: "N(p,k) is not positive".into(),
                achieved: n_pk,
            });
        }
        Ok(Self {
            p,
            k,
            m_p,
            m_2p,
            m_kp,
            n_pk,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn even_moments_are_double_factorials() {
        let expected = [1.0, 3.0, 15.0, 105.0, 945.0, 10395.0];
        for (j, &e) in expected.iter().enumerate() {
            assert_eq!(abs_normal_moment(2.0 * (j + 1) as f64).unwrap(), e);
        }
    }

    #[test]
    fn odd_and_fractional_moments() {
        let m3 = abs_normal_moment(3.0).unwrap();
        assert!((m3 - 2.0 * (2.0 / PI).sqrt()).abs() < 1e-15);
        assert!((m3 - 1.595_769_121_605_731).abs() < 1e-14);
        // gamma route agrees with the integer route near integers
        let near = abs_normal_moment(3.0 + 1e-9).unwrap();
        assert!((near - m3).abs() < 1e-8);
        let m1 = abs_normal_moment(1.0).unwrap();
        assert!((m1 - (2.0 / PI).sqrt()).abs() < 1e-15);
        assert!(abs_normal_moment(0.0).is_err());
    }

    #[test]
    fn joint_moment_closed_forms() {
        assert_eq!(joint_abs_moment_exact(4, 2).unwrap(), 204.0);
        assert_eq!(joint_abs_moment_exact(4, 3).unwrap(), 321.0);
        assert!(joint_abs_moment_exact(3, 2).is_err());
    }

    #[test]
    fn joint_moment_quadrature_matches_expansion() {
        for p in [4u32, 6, 8] {
            for k in [2u32, 3, 4] {
                let exact = joint_abs_moment_exact(p, k).unwrap();
                let quad = joint_abs_moment(f64::from(p), k).unwrap();
                assert!(
                    (quad - exact).abs() <= 1e-10 * exact,
                    "p={p} k={k}: {quad} vs {exact}"
                );
            }
        }
        let q = joint_abs_moment(4.0, 2).unwrap();
        assert!((q - 204.0).abs() < 1e-10, "{q}");
    }

    #[test]
    fn joint_moment_dominates_product() {
        for p in [2.5, 3.0, 4.0, 5.5] {
            for k in [2u32, 3, 5] {
                let mkp = joint_abs_moment(p, k).unwrap();
                let mp = abs_normal_moment(p).unwrap();
                let scale = f64::from(k).powf(0.5 * p);
                assert!(mkp >= mp * mp * scale, "p={p} k={k}");
            }
        }
    }

    #[test]
    fn joint_moment_domain() {
        assert!(joint_abs_moment(2.0, 2).is_err());
        assert!(joint_abs_moment(4.0, 1).is_err());
    }

    #[test]
    fn n_constant_examples() {
        let n42 = n_constant(4.0, 2).unwrap();
        assert!((n42 - 32.0 / 7.0).abs() < 1e-13, "{n42}");
        let n43 = n_constant(4.0, 3).unwrap();
        assert!((n43 - 2016.0 / 105.0).abs() < 1e-12, "{n43}");
        for k in 2..=5u32 {
            let kf = f64::from(k);
            let closed = 16.0 / 35.0 * kf * (2.0 * kf * kf - kf - 1.0);
            let n = n_constant(4.0, k).unwrap();
            assert!((n - closed).abs() <= 1e-12 * closed, "k={k}");
        }
    }

    #[test]
    fn n_constant_positive_across_grid() {
        for p in [2.5, 3.0, 4.0, 5.0, 6.0] {
            for k in 2..=5u32 {
                let t = MomentTable::new(p, k).unwrap();
                assert!(t.n_pk > 0.0, "p={p} k={k}");
                assert!(t.m_2p > t.m_p * t.m_p);
            }
        }
    }
}
