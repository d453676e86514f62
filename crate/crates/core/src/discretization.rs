//! Uniform grids and the eighth-order finite-difference Hamiltonian.

use serde::{Deserialize, Serialize};

use crate::banded::SymBandMatrix;
use crate::error::{Error, Result};
use crate::potentials::PotentialSpec;
use crate::semiclassics;

/// Accuracy order of the kinetic-energy stencil used by [`assemble_hamiltonian`].
pub const STENCIL_ORDER: usize = 8;

/// Half-bandwidth of the assembled Hamiltonian.
pub const HALF_BANDWIDTH: usize = STENCIL_ORDER / 2;

/// Uniform grid of interior points; the wavefunction vanishes at both
/// endpoints and beyond them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub q_lo: f64,
    pub q_hi: f64,
    pub n_points: usize,
    pub h: f64,
}

impl Grid {
    pub fn new(q_lo: f64, q_hi: f64, n_points: usize) -> Result<Self> {
        if !(q_lo.is_finite() && q_hi.is_finite() && q_lo < q_hi) {
            return Err(Error::config(format!("grid endpoints must satisfy q_lo < q_hi, got [{q_lo}, {q_hi}]")));
        }
        if n_points < STENCIL_ORDER + 1 {
            return Err(Error::config(format!(
                "grid needs at least {} interior points, got {n_points}",
                STENCIL_ORDER + 1
            )));
        }
        Ok(Grid {
            q_lo,
            q_hi,
            n_points,
            h: (q_hi - q_lo) / (n_points + 1) as f64,
        })
    }

    /// Grid whose spacing is as close as possible to `h`.
    pub fn with_spacing(q_lo: f64, q_hi: f64, h: f64) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::config(format!("grid spacing must be positive, got {h}")));
        }
        let intervals = ((q_hi - q_lo) / h).round().max(1.0) as usize;
        Grid::new(q_lo, q_hi, intervals.saturating_sub(1))
    }

    pub fn point(&self, i: usize) -> f64 {
        self.q_lo + (i + 1) as f64 * self.h
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n_points).map(|i| self.point(i)).collect()
    }
}

/// Central finite-difference weights for the second derivative, ordered from
/// offset `-p` to `+p` with `p = order / 2`. Divide by `h²` on use.
pub fn stencil_coefficients(accuracy_order: usize) -> Result<Vec<f64>> {
    if accuracy_order != STENCIL_ORDER {
        return Err(Error::config(format!(
            "only the order-{STENCIL_ORDER} central stencil is supported, got order {accuracy_order}"
        )));
    }
    let p = accuracy_order / 2;
    // c_k = 2 (-1)^(k+1) (p!)^2 / (k^2 (p-k)! (p+k)!)
    let factorial = |m: usize| (1..=m).fold(1.0_f64, |acc, i| acc * i as f64);
    let side: Vec<f64> = (1..=p)
        .map(|k| {
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            2.0 * sign * factorial(p).powi(2) / ((k * k) as f64 * factorial(p - k) * factorial(p + k))
        })
        .collect();
    let center = -2.0 * side.iter().sum::<f64>();
    let mut weights: Vec<f64> = side.iter().rev().copied().collect();
    weights.push(center);
    weights.extend(side);
    Ok(weights)
}

/// Discretized `-ħ²/(2m) d²/dq² + V(q)` on a uniform grid.
#[derive(Debug, Clone)]
pub struct BandedHamiltonian {
    pub grid: Grid,
    pub hbar: f64,
    pub mass: f64,
    /// Potential sampled at the grid points.
    pub potential: Vec<f64>,
    pub matrix: SymBandMatrix,
}

impl BandedHamiltonian {
    pub fn dimension(&self) -> usize {
        self.matrix.dimension()
    }

    pub fn half_bandwidth(&self) -> usize {
        self.matrix.half_bandwidth()
    }

    /// `ħ² / (2 m h²)`
    pub fn kinetic_scale(&self) -> f64 {
        kinetic_scale(self.hbar, self.mass, self.grid.h)
    }
}

fn kinetic_scale(hbar: f64, mass: f64, h: f64) -> f64 {
    hbar * hbar / (2.0 * mass * h * h)
}

fn check_constants(hbar: f64, mass: f64) -> Result<()> {
    if !(hbar > 0.0 && hbar.is_finite()) {
        return Err(Error::config(format!("hbar must be positive, got {hbar}")));
    }
    if !(mass > 0.0 && mass.is_finite()) {
        return Err(Error::config(format!("mass must be positive, got {mass}")));
    }
    Ok(())
}

pub fn assemble_hamiltonian(grid: &Grid, spec: &PotentialSpec, hbar: f64, mass: f64) -> Result<BandedHamiltonian> {
    spec.validate()?;
    assemble_with_potential(grid, hbar, mass, |q| spec.value(q))
}

/// Same as [`assemble_hamiltonian`] for an arbitrary potential function.
pub fn assemble_with_potential(
    grid: &Grid,
    hbar: f64,
    mass: f64,
    potential: impl Fn(f64) -> f64,
) -> Result<BandedHamiltonian> {
    check_constants(hbar, mass)?;
    let grid = Grid::new(grid.q_lo, grid.q_hi, grid.n_points)?;
    let n = grid.n_points;
    let weights = stencil_coefficients(STENCIL_ORDER)?;
    let scale = kinetic_scale(hbar, mass, grid.h);

    let samples: Vec<f64> = grid.points().into_iter().map(&potential).collect();
    if let Some(bad) = samples.iter().position(|v| !v.is_finite()) {
        return Err(Error::config(format!(
            "potential is not finite at q = {}",
            grid.point(bad)
        )));
    }

    let mut bands = Vec::with_capacity(HALF_BANDWIDTH + 1);
    bands.push(samples.iter().map(|v| -scale * weights[HALF_BANDWIDTH] + v).collect());
    for k in 1..=HALF_BANDWIDTH {
        bands.push(vec![-scale * weights[HALF_BANDWIDTH + k]; n - k]);
    }

    Ok(BandedHamiltonian {
        grid,
        hbar,
        mass,
        potential: samples,
        matrix: SymBandMatrix::from_bands(bands)?,
    })
}

/// Tuning knobs for [`suggest_domain`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DomainOptions {
    /// Number of decay lengths kept beyond the barrier of SEP wells.
    pub safety: f64,
    pub points_per_wavelength: f64,
    /// Floor on `v_max - E` as a fraction of `v_max`.
    pub delta_e_floor: f64,
    /// Minimum number of grid points across the classically allowed region at `e_cap`.
    pub well_points: f64,
    /// The open side stops once `V` exceeds this multiple of `e_cap` ...
    pub wall_factor: f64,
    /// ... or once the accumulated WKB decay exponent reaches this value.
    pub decay_target: f64,
    pub max_points: usize,
}

impl Default for DomainOptions {
    fn default() -> Self {
        DomainOptions {
            safety: 8.0,
            points_per_wavelength: 10.0,
            delta_e_floor: 1e-3,
            well_points: 60.0,
            wall_factor: 10.0,
            decay_target: 36.0,
            max_points: 400_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DomainSuggestion {
    pub q_lo: f64,
    pub q_hi: f64,
    pub n_points: usize,
}

impl DomainSuggestion {
    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.q_lo, self.q_hi, self.n_points)
    }
}

/// Domain and resolution adequate for states up to `e_cap`, with default options.
///
/// `e_cap` defaults to the barrier height for the SEP variants and is required
/// for power laws.
pub fn suggest_domain(spec: &PotentialSpec, e_cap: Option<f64>, hbar: f64, mass: f64) -> Result<DomainSuggestion> {
    suggest_domain_with(spec, e_cap, hbar, mass, &DomainOptions::default())
}

pub fn suggest_domain_with(
    spec: &PotentialSpec,
    e_cap: Option<f64>,
    hbar: f64,
    mass: f64,
    opts: &DomainOptions,
) -> Result<DomainSuggestion> {
    spec.validate()?;
    check_constants(hbar, mass)?;
    let well = spec.well();
    let energy = match (e_cap, well.v_max()) {
        (Some(e), _) => e,
        (None, Some(v_max)) => v_max,
        (None, None) => {
            return Err(Error::config(format!(
                "an energy cap is required to size the domain of a {} potential",
                spec.family
            )))
        }
    };
    if !(energy > well.v_min && energy.is_finite()) {
        return Err(Error::config(format!(
            "energy cap {energy} must lie above the well minimum {}",
            well.v_min
        )));
    }

    let wavelength = 2.0 * std::f64::consts::PI * hbar / (2.0 * mass * energy).sqrt();

    // Classically allowed region at the cap; above the barrier the left edge is the barrier.
    let (left_turn, right_turn) = match well.barrier {
        Some((q_max, v_max)) if energy >= v_max => {
            let (_, q2) = semiclassics::turning_points(spec, v_max)?;
            let q2 = if energy > v_max { walk_to_level(spec, q2, energy, wavelength) } else { q2 };
            (q_max, q2)
        }
        _ => semiclassics::turning_points(spec, energy)?,
    };

    // Superexponential walls are reached within a few steps, so the decay
    // stop only applies to the open power-law sides.
    let decay_stop = well.barrier.is_none();
    let q_hi = walk_out(spec, right_turn, 1.0, energy, hbar, mass, wavelength, decay_stop, opts);
    let q_lo = match well.barrier {
        Some((q_max, v_max)) => {
            let gap = (v_max - energy).max(opts.delta_e_floor * v_max);
            q_max - opts.safety * hbar / (2.0 * mass * gap).sqrt()
        }
        None => walk_out(spec, left_turn, -1.0, energy, hbar, mass, wavelength, decay_stop, opts),
    };

    let h = (wavelength / opts.points_per_wavelength).min((right_turn - left_turn) / opts.well_points);
    let intervals = ((q_hi - q_lo) / h).ceil() as usize;
    let n_points = intervals
        .saturating_sub(1)
        .clamp(STENCIL_ORDER + 1, opts.max_points.max(STENCIL_ORDER + 1));
    Ok(DomainSuggestion { q_lo, q_hi, n_points })
}

/// Moves right from `q` until the potential reaches `energy`.
fn walk_to_level(spec: &PotentialSpec, mut q: f64, energy: f64, step: f64) -> f64 {
    while spec.value(q) < energy {
        q += step;
    }
    q
}

/// Steps outward from a turning point until the wall is `wall_factor` times
/// the cap or, with `decay_stop`, the accumulated decay exponent reaches
/// `decay_target`.
#[allow(clippy::too_many_arguments)]
fn walk_out(
    spec: &PotentialSpec,
    start: f64,
    direction: f64,
    energy: f64,
    hbar: f64,
    mass: f64,
    wavelength: f64,
    decay_stop: bool,
    opts: &DomainOptions,
) -> f64 {
    let step = wavelength / 20.0;
    let mut q = start;
    let mut decay = 0.0;
    // At least one wavelength of clearance past the turning point.
    let mut taken = 0usize;
    for _ in 0..10_000_000 {
        let mid = q + 0.5 * direction * step;
        let kappa = (2.0 * mass * (spec.value(mid) - energy).max(0.0)).sqrt() / hbar;
        decay += kappa * step;
        q += direction * step;
        taken += 1;
        let wall = spec.value(q) >= opts.wall_factor * energy;
        if taken >= 20 && (wall || (decay_stop && decay >= opts.decay_target)) {
            break;
        }
    }
    q
}
