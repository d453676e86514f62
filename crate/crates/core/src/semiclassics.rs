//! Turning points, action and period integrals, WKB quantization.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::potentials::PotentialSpec;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WkbConfig {
    /// ν in `S(E) = (n + ν) π ħ`; ½ for two soft turning points.
    pub maslov_offset: f64,
    /// Gauss–Legendre points per quadrature piece, at least 32.
    pub quad_points: usize,
    /// Relative tolerance of the energy root.
    pub root_tol: f64,
    pub hbar: f64,
}

impl Default for WkbConfig {
    fn default() -> Self {
        WkbConfig {
            maslov_offset: 0.5,
            quad_points: 256,
            root_tol: 1e-13,
            hbar: 1.0,
        }
    }
}

impl WkbConfig {
    pub const MIN_QUAD_POINTS: usize = 32;

    pub fn soft() -> Self {
        Self::default()
    }

    /// Phase π at a hard wall.
    pub fn hard_wall() -> Self {
        WkbConfig {
            maslov_offset: 1.0,
            ..Self::default()
        }
    }

    /// False for offsets other than the ½ and 1 presets.
    pub fn is_standard_offset(&self) -> bool {
        self.maslov_offset == 0.5 || self.maslov_offset == 1.0
    }

    pub fn validate(&self) -> Result<()> {
        if self.quad_points < Self::MIN_QUAD_POINTS {
            return Err(Error::config(format!(
                "quad_points must be at least {}, got {}",
                Self::MIN_QUAD_POINTS,
                self.quad_points
            )));
        }
        if !(self.maslov_offset >= 0.0 && self.maslov_offset.is_finite()) {
            return Err(Error::config(format!("maslov_offset must be non-negative, got {}", self.maslov_offset)));
        }
        if !(self.root_tol > 0.0 && self.root_tol < 1.0) {
            return Err(Error::config(format!("root_tol must lie in (0, 1), got {}", self.root_tol)));
        }
        if !(self.hbar > 0.0 && self.hbar.is_finite()) {
            return Err(Error::config(format!("hbar must be positive, got {}", self.hbar)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassicalPeriodResult {
    pub energy: f64,
    pub period: f64,
    pub q1: f64,
    pub q2: f64,
}

/// WKB energies, possibly fewer than requested when the well runs out.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WkbSpectrum {
    pub energies: Vec<f64>,
    pub requested: usize,
}

impl WkbSpectrum {
    pub fn count(&self) -> usize {
        self.energies.len()
    }

    pub fn is_complete(&self) -> bool {
        self.energies.len() == self.requested
    }
}

/// Classical turning points `q1 < q2` of the well at energy `energy`.
///
/// For barrier families the energy may equal the barrier top, in which case
/// `q1` is the barrier position.
pub fn turning_points(spec: &PotentialSpec, energy: f64) -> Result<(f64, f64)> {
    spec.validate()?;
    let well = spec.well();
    if !(energy > well.v_min) || !energy.is_finite() {
        return Err(Error::domain(format!(
            "energy {energy} is not above the well minimum {}",
            well.v_min
        )));
    }
    let q1 = match well.barrier {
        Some((q_max, v_max)) => {
            if energy > v_max {
                return Err(Error::domain(format!("energy {energy} exceeds the barrier top {v_max}")));
            }
            if energy == v_max {
                q_max
            } else {
                bisect_level(spec, energy, q_max, well.q_min)
            }
        }
        None => {
            let outer = expand(spec, energy, well.q_min, -1.0)?;
            bisect_level(spec, energy, outer, well.q_min)
        }
    };
    let outer = expand(spec, energy, well.q_min, 1.0)?;
    let q2 = bisect_level(spec, energy, well.q_min, outer);
    Ok((q1, q2))
}

/// Steps away from the minimum with doubling strides until `V ≥ energy`.
fn expand(spec: &PotentialSpec, energy: f64, q_min: f64, direction: f64) -> Result<f64> {
    let mut step = 1.0;
    for _ in 0..2000 {
        let q = q_min + direction * step;
        if spec.value(q) >= energy {
            return Ok(q);
        }
        step *= 2.0;
        if !step.is_finite() {
            break;
        }
    }
    Err(Error::domain(format!("no turning point found for energy {energy}")))
}

/// Root of `V(q) = energy` on a monotone bracket, to adjacent floats.
fn bisect_level(spec: &PotentialSpec, energy: f64, a: f64, b: f64) -> f64 {
    let (mut lo, mut hi) = (a, b);
    let above_at_lo = spec.value(lo) >= energy;
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo.min(hi) || mid >= lo.max(hi) {
            break;
        }
        if (spec.value(mid) >= energy) == above_at_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if (spec.value(lo) - energy).abs() <= (spec.value(hi) - energy).abs() {
        lo
    } else {
        hi
    }
}

/// Gauss–Legendre rule on `[-1, 1]` by Newton iteration on `P_n`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// `(P_n(x), P_n'(x))`
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    (p1, n as f64 * (x * p1 - p0) / (x * x - 1.0))
}

/// Integrates over `[a, b]` through `q = a + (b - a)(1 - cos θ)/2`, which
/// clusters nodes at both ends and removes inverse-square-root endpoint
/// singularities.
struct CosineRule {
    /// `sin²(θ/2)`, `cos²(θ/2)` and the weight including the Jacobian per node.
    nodes: Vec<(f64, f64, f64)>,
}

impl CosineRule {
    fn new(points: usize) -> Self {
        let (x, w) = gauss_legendre(points);
        let nodes = x
            .iter()
            .zip(&w)
            .map(|(&t, &wt)| {
                let theta = 0.5 * PI * (1.0 + t);
                let s = (0.5 * theta).sin();
                let c = (0.5 * theta).cos();
                (s * s, c * c, wt * 0.5 * PI * 0.5 * theta.sin())
            })
            .collect();
        CosineRule { nodes }
    }

    fn integrate(&self, a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
        let len = b - a;
        let sum: f64 = self
            .nodes
            .iter()
            .map(|&(u, v, w)| {
                let q = if u < 0.5 { a + len * u } else { b - len * v };
                w * f(q)
            })
            .sum();
        sum * len
    }

    /// Splits at the potential's non-analytic point when it is interior.
    fn integrate_well(&self, spec: &PotentialSpec, q1: f64, q2: f64, f: impl Fn(f64) -> f64) -> f64 {
        let s = spec.singular_point();
        if q1 < s && s < q2 {
            self.integrate(q1, s, &f) + self.integrate(s, q2, &f)
        } else {
            self.integrate(q1, q2, &f)
        }
    }
}

fn check_mass(mass: f64) -> Result<()> {
    if !(mass > 0.0 && mass.is_finite()) {
        return Err(Error::config(format!("mass must be positive, got {mass}")));
    }
    Ok(())
}

/// `∫ √(2m(E - V)) dq` between the turning points.
pub fn action_integral(spec: &PotentialSpec, energy: f64, mass: f64) -> Result<f64> {
    action_integral_with(spec, energy, mass, WkbConfig::default().quad_points)
}

pub fn action_integral_with(spec: &PotentialSpec, energy: f64, mass: f64, quad_points: usize) -> Result<f64> {
    check_mass(mass)?;
    let rule = CosineRule::new(quad_points.max(WkbConfig::MIN_QUAD_POINTS));
    action_with_rule(spec, energy, mass, &rule)
}

fn action_with_rule(spec: &PotentialSpec, energy: f64, mass: f64, rule: &CosineRule) -> Result<f64> {
    let (q1, q2) = turning_points(spec, energy)?;
    Ok(rule.integrate_well(spec, q1, q2, |q| (2.0 * mass * (energy - spec.value(q)).max(0.0)).sqrt()))
}

/// Full oscillation period `T = √(2m) ∫ (E - V)^(-1/2) dq`.
pub fn classical_period(spec: &PotentialSpec, energy: f64, mass: f64) -> Result<ClassicalPeriodResult> {
    classical_period_with(spec, energy, mass, WkbConfig::default().quad_points)
}

pub fn classical_period_with(
    spec: &PotentialSpec,
    energy: f64,
    mass: f64,
    quad_points: usize,
) -> Result<ClassicalPeriodResult> {
    check_mass(mass)?;
    let rule = CosineRule::new(quad_points.max(WkbConfig::MIN_QUAD_POINTS));
    let (q1, q2) = turning_points(spec, energy)?;
    let integral = rule.integrate_well(spec, q1, q2, |q| {
        let gap = energy - spec.value(q);
        if gap > 0.0 {
            1.0 / gap.sqrt()
        } else {
            0.0
        }
    });
    Ok(ClassicalPeriodResult {
        energy,
        period: (2.0 * mass).sqrt() * integral,
        q1,
        q2,
    })
}

/// Energies `E_0 .. E_{count-1}` solving `S(E) = (n + ν) π ħ`.
///
/// For barrier families the search stops at the barrier top and the result
/// holds only the levels that fit.
pub fn wkb_levels(spec: &PotentialSpec, count: usize, cfg: &WkbConfig, mass: f64) -> Result<WkbSpectrum> {
    cfg.validate()?;
    spec.validate()?;
    check_mass(mass)?;
    let rule = CosineRule::new(cfg.quad_points);
    let well = spec.well();
    let action = |e: f64| action_with_rule(spec, e, mass, &rule);

    let mut energies = Vec::with_capacity(count);
    let mut lo = well.v_min;
    for n in 0..count {
        let target = (n as f64 + cfg.maslov_offset) * PI * cfg.hbar;
        let mut hi = match well.v_max() {
            Some(v_max) => {
                if action(v_max)? <= target {
                    break;
                }
                v_max
            }
            None => {
                let mut hi = if lo > well.v_min { 2.0 * (lo - well.v_min) + well.v_min } else { well.v_min + 1.0 };
                while action(hi)? <= target {
                    hi = well.v_min + 2.0 * (hi - well.v_min);
                    if !hi.is_finite() || hi >= spec.energy_cap {
                        return Err(Error::domain(format!("level {n} lies beyond the energy cap")));
                    }
                }
                hi
            }
        };
        let mut lo_n = lo;
        while hi - lo_n > cfg.root_tol * hi.abs().max(f64::MIN_POSITIVE) {
            let mid = 0.5 * (lo_n + hi);
            if mid <= lo_n || mid >= hi {
                break;
            }
            // The action vanishes at the well bottom, where turning points do not exist.
            let s = if mid > well.v_min { action(mid)? } else { 0.0 };
            if s < target {
                lo_n = mid;
            } else {
                hi = mid;
            }
        }
        let e = 0.5 * (lo_n + hi);
        energies.push(e);
        lo = e;
    }
    Ok(WkbSpectrum {
        energies,
        requested: count,
    })
}

/// Closed-form WKB energy of `V = ½|q|^β` with `m = ħ = 1`.
///
/// NaN for `β ≤ 0`.
pub fn powerlaw_wkb_closed_form(n: usize, beta: f64) -> f64 {
    if !(beta > 0.0) {
        return f64::NAN;
    }
    let base = (n as f64 + 0.5) * PI.sqrt() * gamma(1.5 + 1.0 / beta) / gamma(1.0 + 1.0 / beta);
    0.5 * base.powf(2.0 * beta / (2.0 + beta))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_rule_integrates_polynomials() {
        let (x, w) = gauss_legendre(7);
        let total: f64 = w.iter().sum();
        assert!((total - 2.0).abs() < 1e-14);
        let x12: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(12)).sum();
        assert!((x12 - 2.0 / 13.0).abs() < 1e-14);
    }

    #[test]
    fn harmonic_turning_points() {
        let (a, b) = turning_points(&PotentialSpec::harmonic(), 0.5).unwrap();
        assert!((a + 1.0).abs() < 1e-15 && (b - 1.0).abs() < 1e-15);
        let (a, b) = turning_points(&PotentialSpec::power_law(1.0, 1.0), 1.0).unwrap();
        assert!((a + 2.0).abs() < 1e-15 && (b - 2.0).abs() < 1e-15);
    }

    #[test]
    fn transition_point_is_left_turning_point_at_v_v() {
        let spec = PotentialSpec::sep_shifted(1.0);
        let v_v = 1.0 - (-1.0 / std::f64::consts::E).exp();
        let (a, _) = turning_points(&spec, v_v).unwrap();
        assert!((a + 1.0 / std::f64::consts::E).abs() < 1e-9);
    }

    #[test]
    fn out_of_range_energies() {
        let spec = PotentialSpec::sep_modified(1.0);
        assert!(matches!(turning_points(&spec, 0.0), Err(Error::Domain(_))));
        assert!(matches!(turning_points(&spec, 10.0), Err(Error::Domain(_))));
        assert!(matches!(turning_points(&PotentialSpec::harmonic(), -1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn harmonic_action_and_period() {
        for e in [0.01, 0.5, 3.0, 40.0] {
            let s = action_integral(&PotentialSpec::harmonic(), e, 1.0).unwrap();
            assert!((s - PI * e).abs() < 1e-12 * e.max(1.0), "{s}");
            let t = classical_period(&PotentialSpec::harmonic(), e, 1.0).unwrap();
            assert!((t.period - 2.0 * PI).abs() < 1e-10, "{}", t.period - 2.0 * PI);
        }
    }

    #[test]
    fn closed_form_values() {
        assert!((powerlaw_wkb_closed_form(0, 2.0) - 0.5).abs() < 1e-12);
        assert!((powerlaw_wkb_closed_form(9, 2.0) - 9.5).abs() < 1e-12);
        assert!((powerlaw_wkb_closed_form(0, 1.0) - 0.557730).abs() < 1e-5);
        assert!(powerlaw_wkb_closed_form(3, 0.0).is_nan());
    }

    #[test]
    fn harmonic_wkb_is_exact() {
        let levels = wkb_levels(&PotentialSpec::harmonic(), 12, &WkbConfig::default(), 1.0).unwrap();
        assert!(levels.is_complete());
        for (n, e) in levels.energies.iter().enumerate() {
            assert!((e - (n as f64 + 0.5)).abs() < 1e-8);
        }
    }

    #[test]
    fn shallow_well_gives_partial_spectrum() {
        let levels = wkb_levels(&PotentialSpec::sep_modified(1.0), 10, &WkbConfig::default(), 1.0).unwrap();
        assert!(!levels.is_complete());
        assert!(levels.count() < 10);
    }

    #[test]
    fn config_validation() {
        let cfg = WkbConfig {
            quad_points: 8,
            ..WkbConfig::default()
        };
        assert!(cfg.validate().is_err());
        assert!(WkbConfig::hard_wall().is_standard_offset());
        let odd = WkbConfig {
            maslov_offset: 0.25,
            ..WkbConfig::default()
        };
        assert!(!odd.is_standard_offset());
    }
}
