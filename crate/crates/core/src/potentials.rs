//! The superexponential potential family and the power-law oscillators.
//!
//! All SEP variants use `|x|^x = exp(x ln|x|)` with `x ln|x| := 0` at `x = 0`,
//! so every family is continuous at its singular point. Values that would
//! overflow saturate at [`PotentialSpec::energy_cap`].

use std::f64::consts::E;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default saturation energy for the superexponential wall.
pub const DEFAULT_ENERGY_CAP: f64 = 1e300;

const INV_E: f64 = 1.0 / E;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// `α |q|^q`
    SepRaw,
    /// `α (|q + 1/e|^(q + 1/e) - e^(-1/e))`, minimum moved to the origin.
    SepShifted,
    /// Shifted SEP with the region left of the barrier flattened to `v_max`.
    SepModified,
    /// `α |q|^(δ q)`
    Skewed,
    /// `α |q|^β / 2`
    PowerLaw,
}

impl Family {
    pub const ALL: [Family; 5] = [
        Family::SepRaw,
        Family::SepShifted,
        Family::SepModified,
        Family::Skewed,
        Family::PowerLaw,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::SepRaw => "sep_raw",
            Family::SepShifted => "sep_shifted",
            Family::SepModified => "sep_modified",
            Family::Skewed => "skewed",
            Family::PowerLaw => "power_law",
        }
    }

    /// True for the two variants whose minimum sits at the origin with zero energy.
    pub fn is_shifted_sep(self) -> bool {
        matches!(self, Family::SepShifted | Family::SepModified)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| {
                Error::config(format!(
                    "unknown potential family `{s}` (expected sep_raw|sep_shifted|sep_modified|skewed|power_law)"
                ))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PotentialSpec {
    pub family: Family,
    pub alpha: f64,
    /// Exponent scale of the skewed SEP.
    pub delta: f64,
    /// Power-law exponent.
    pub beta: f64,
    pub energy_cap: f64,
}

impl PotentialSpec {
    pub fn new(family: Family, alpha: f64) -> Self {
        PotentialSpec {
            family,
            alpha,
            delta: 1.0,
            beta: 2.0,
            energy_cap: DEFAULT_ENERGY_CAP,
        }
    }

    pub fn sep_raw(alpha: f64) -> Self {
        Self::new(Family::SepRaw, alpha)
    }

    pub fn sep_shifted(alpha: f64) -> Self {
        Self::new(Family::SepShifted, alpha)
    }

    pub fn sep_modified(alpha: f64) -> Self {
        Self::new(Family::SepModified, alpha)
    }

    pub fn skewed(alpha: f64, delta: f64) -> Self {
        PotentialSpec {
            delta,
            ..Self::new(Family::Skewed, alpha)
        }
    }

    pub fn power_law(alpha: f64, beta: f64) -> Self {
        PotentialSpec {
            beta,
            ..Self::new(Family::PowerLaw, alpha)
        }
    }

    /// `½ q²`, the harmonic oscillator with `ħ = m = 1` frequency one.
    pub fn harmonic() -> Self {
        Self::power_law(1.0, 2.0)
    }

    pub fn with_alpha(self, alpha: f64) -> Self {
        PotentialSpec { alpha, ..self }
    }

    pub fn with_energy_cap(self, energy_cap: f64) -> Self {
        PotentialSpec { energy_cap, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::config(format!(
                "potential amplitude alpha must be positive and finite, got {}",
                self.alpha
            )));
        }
        if self.family == Family::Skewed && !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(Error::config(format!(
                "skew exponent delta must be positive, got {}",
                self.delta
            )));
        }
        if self.family == Family::PowerLaw && !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(Error::config(format!(
                "power-law exponent beta must be positive, got {}",
                self.beta
            )));
        }
        if !(self.energy_cap > 0.0) || self.energy_cap.is_nan() {
            return Err(Error::config(format!(
                "energy_cap must be positive, got {}",
                self.energy_cap
            )));
        }
        Ok(())
    }

    /// Potential energy at `q`. See [`evaluate`].
    pub fn value(&self, q: f64) -> f64 {
        let alpha = self.alpha;
        let v = match self.family {
            Family::SepRaw => self.scaled_exp(xlogx(q), 0.0),
            Family::SepShifted => self.scaled_exp(xlogx(q + INV_E), (-INV_E).exp()),
            Family::SepModified => {
                if q >= -2.0 * INV_E {
                    self.scaled_exp(xlogx(q + INV_E), (-INV_E).exp())
                } else {
                    alpha * sep_barrier_height()
                }
            }
            Family::Skewed => self.scaled_exp(self.delta * xlogx(q), 0.0),
            Family::PowerLaw => {
                if q == 0.0 {
                    0.0
                } else {
                    let v = 0.5 * alpha * (self.beta * q.abs().ln()).exp();
                    if v.is_finite() {
                        v
                    } else {
                        self.energy_cap
                    }
                }
            }
        };
        v.min(self.energy_cap)
    }

    /// `α (exp(arg) - offset)`, saturating at the energy cap instead of overflowing.
    fn scaled_exp(&self, arg: f64, offset: f64) -> f64 {
        if arg > 709.0 {
            return self.energy_cap;
        }
        let v = self.alpha * (arg.exp() - offset);
        if v.is_finite() {
            v
        } else {
            self.energy_cap
        }
    }

    /// Position where the potential is non-analytic: the transition point of
    /// the SEP variants and the cusp of the power law.
    pub fn singular_point(&self) -> f64 {
        if self.family.is_shifted_sep() {
            -INV_E
        } else {
            0.0
        }
    }

    /// Minimum of the confining well and, for SEP variants, the barrier on its
    /// left side.
    pub fn well(&self) -> Well {
        let alpha = self.alpha;
        match self.family {
            Family::SepShifted | Family::SepModified => Well {
                q_min: 0.0,
                v_min: 0.0,
                barrier: Some((-2.0 * INV_E, alpha * sep_barrier_height())),
            },
            Family::SepRaw => Well {
                q_min: INV_E,
                v_min: alpha * (-INV_E).exp(),
                barrier: Some((-INV_E, alpha * INV_E.exp())),
            },
            Family::Skewed => Well {
                q_min: INV_E,
                v_min: alpha * (-self.delta * INV_E).exp(),
                barrier: Some((-INV_E, alpha * (self.delta * INV_E).exp())),
            },
            Family::PowerLaw => Well {
                q_min: 0.0,
                v_min: 0.0,
                barrier: None,
            },
        }
    }
}

/// Location and energies of the confining well.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Well {
    pub q_min: f64,
    pub v_min: f64,
    /// `(q_max, v_max)` of the barrier left of the minimum, if any.
    pub barrier: Option<(f64, f64)>,
}

impl Well {
    pub fn v_max(&self) -> Option<f64> {
        self.barrier.map(|(_, v)| v)
    }
}

/// Closed-form landmarks of the shifted SEP.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Landmarks {
    pub q_min: f64,
    pub q_max: f64,
    pub q_v: f64,
    pub v_max: f64,
    pub v_v: f64,
}

/// `x ln|x|`, continuously extended by 0 at the origin.
pub fn xlogx(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * x.abs().ln()
    }
}

/// `e^(1/e) (1 - e^(-2/e))`, the barrier height of the shifted SEP at `α = 1`.
fn sep_barrier_height() -> f64 {
    INV_E.exp() * (1.0 - (-2.0 * INV_E).exp())
}

/// Potential energy of `spec` at `q`.
pub fn evaluate(spec: &PotentialSpec, q: f64) -> Result<f64> {
    spec.validate()?;
    if !q.is_finite() {
        return Err(Error::precondition(format!("position must be finite, got {q}")));
    }
    Ok(spec.value(q))
}

pub fn landmarks(spec: &PotentialSpec) -> Result<Landmarks> {
    spec.validate()?;
    if !spec.family.is_shifted_sep() {
        return Err(Error::config(format!(
            "landmarks are defined for sep_shifted and sep_modified, not {}",
            spec.family
        )));
    }
    Ok(Landmarks {
        q_min: 0.0,
        q_max: -2.0 * INV_E,
        q_v: -INV_E,
        v_max: spec.alpha * sep_barrier_height(),
        v_v: spec.alpha * (1.0 - (-INV_E).exp()),
    })
}
