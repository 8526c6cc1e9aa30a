//! Microstructure noise overlays.

use rand::Rng;
use rand_distr::{Open01, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::pathseries::PathSeries;
use crate::{Error, Result};
// inherent f64 math shadows this whenever std is linked
#[allow(unused_imports)]
use num_traits::Float;

/// Law of the additive noise. Both are centred with a density that is
/// positive at 0; `sd` is the standard deviation in either case.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseLaw {
    #[default]
    Gaussian,
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseKind {
    #[default]
    None,
    Additive,
    Rounding,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NoiseSpec {
    pub kind: NoiseKind,
    pub additive_sd: f64,
    pub law: NoiseLaw,
    /// Tick size in price units.
    pub tick: f64,
    /// Price at the first observation; ticks are in these units.
    pub price_scale: f64,
}

impl Default for NoiseSpec {
    fn default() -> Self {
        Self {
            kind: NoiseKind::None,
            additive_sd: 0.0,
            law: NoiseLaw::Gaussian,
            tick: 0.01,
            price_scale: 30.0,
        }
    }
}

impl NoiseSpec {
    pub fn additive(sd: f64) -> Self {
        Self {
            kind: NoiseKind::Additive,
            additive_sd: sd,
            ..Default::default()
        }
    }

    pub fn rounding(tick: f64) -> Self {
        Self {
            kind: NoiseKind::Rounding,
            tick,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.kind {
            NoiseKind::None => Ok(()),
            NoiseKind::Additive if self.additive_sd >= 0.0 && self.additive_sd.is_finite() => {
                Ok(())
            }
            NoiseKind::Additive => Err(Error::invalid("noise sd must be non-negative")),
            NoiseKind::Rounding if self.tick > 0.0 && self.price_scale > 0.0 => Ok(()),
            NoiseKind::Rounding => Err(Error::invalid("tick and price scale must be positive")),
        }
    }
}

/// Observed series `Z_i = X_i + eps_i` with i.i.d. centred Gaussian noise.
pub fn apply_additive_noise<R: Rng + ?Sized>(
    path: &PathSeries,
    sd: f64,
    rng: &mut R,
) -> Result<PathSeries> {
    apply_additive_noise_with(path, sd, NoiseLaw::Gaussian, rng)
}

pub fn apply_additive_noise_with<R: Rng + ?Sized>(
    path: &PathSeries,
    sd: f64,
    law: NoiseLaw,
    rng: &mut R,
) -> Result<PathSeries> {
    if !(sd >= 0.0 && sd.is_finite()) {
        return Err(Error::invalid("noise sd must be non-negative"));
    }
    if sd == 0.0 {
        return Ok(path.clone());
    }
    let half_width = sd * 3f64.sqrt();
    Ok(path.map_values(|x| {
        let eps = match law {
            NoiseLaw::Gaussian => sd * rng.sample::<f64, _>(StandardNormal),
            NoiseLaw::Uniform => half_width * (2.0 * rng.sample::<f64, _>(Open01) - 1.0),
        };
        x + eps
    }))
}

/// Rounds observed prices to the nearest multiple of `tick`.
///
/// The path holds log-prices; the price of observation `i` is
/// `price_scale * exp(X_i - X_0)`. A price that would round to zero is held
/// at one tick.
pub fn apply_rounding(path: &PathSeries, tick: f64, price_scale: f64) -> Result<PathSeries> {
    if !(tick > 0.0 && price_scale > 0.0) {
        return Err(Error::invalid("tick and price scale must be positive"));
    }
    let x0 = path.values()[0];
    let log_scale = price_scale.ln();
    Ok(path.map_values(|x| {
        let price = price_scale * (x - x0).exp();
        let rounded = ((price / tick).round().max(1.0)) * tick;
        x0 + rounded.ln() - log_scale
    }))
}
