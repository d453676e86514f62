//! Position moments, level spacings and node counts.

use serde::{Deserialize, Serialize};

use crate::discretization::Grid;
use crate::error::{Error, Result};
use crate::potentials::Landmarks;

pub const DEFAULT_MOMENT_MAX: usize = 9;
pub const MAX_MOMENT_ORDER: usize = 20;

/// Tolerated deviation of `h Σ |ψ|²` from one.
const NORM_TOLERANCE: f64 = 1e-6;

/// Relative noise floor for sign changes.
const NODE_FLOOR: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub mu: f64,
    /// `m_0 ..= m_max` about `mu`.
    pub central_moments: Vec<f64>,
}

impl MomentReport {
    pub fn moment(&self, n: usize) -> Option<f64> {
        self.central_moments.get(n).copied()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub energies: Vec<f64>,
    /// `E_n - E_{n-1}`; `None` at `n = 0`.
    pub spacings: Vec<Option<f64>>,
    /// `ΔE_{n+1} / ΔE_n`; `None` where either spacing is missing.
    pub scaled_spacings: Vec<Option<f64>>,
    pub bound_count: usize,
    /// First `n` with `E_n > v_v`, if any state lies above it.
    pub branch_index: Option<usize>,
}

fn check_state(psi: &[f64], grid: &Grid) -> Result<()> {
    if psi.len() != grid.n_points {
        return Err(Error::precondition(format!(
            "state has {} samples but the grid has {} points",
            psi.len(),
            grid.n_points
        )));
    }
    let norm = grid.h * psi.iter().map(|p| p * p).sum::<f64>();
    if (norm - 1.0).abs() > NORM_TOLERANCE {
        return Err(Error::precondition(format!("state is not normalized on the grid (norm {norm})")));
    }
    Ok(())
}

/// `h Σ q_i |ψ_i|²`
pub fn mean_position(psi: &[f64], grid: &Grid) -> Result<f64> {
    check_state(psi, grid)?;
    Ok(weighted_mean(psi, grid))
}

fn weighted_mean(psi: &[f64], grid: &Grid) -> f64 {
    grid.h * psi.iter().enumerate().map(|(i, p)| grid.point(i) * p * p).sum::<f64>()
}

/// `h Σ (q_i - μ)ⁿ |ψ_i|²`, `n ≤ 20`.
pub fn central_moment(psi: &[f64], grid: &Grid, n: usize) -> Result<f64> {
    Ok(*moments(psi, grid, n)?.central_moments.last().unwrap_or(&1.0))
}

/// Mean and all central moments up to `max_order` in one pass over the state.
pub fn moments(psi: &[f64], grid: &Grid, max_order: usize) -> Result<MomentReport> {
    if max_order > MAX_MOMENT_ORDER {
        return Err(Error::precondition(format!(
            "moment order {max_order} exceeds the maximum {MAX_MOMENT_ORDER}"
        )));
    }
    check_state(psi, grid)?;
    let mu = weighted_mean(psi, grid);
    let mut sums = vec![0.0; max_order + 1];
    for (i, p) in psi.iter().enumerate() {
        let d = grid.point(i) - mu;
        let mut w = p * p;
        for s in sums.iter_mut() {
            *s += w;
            w *= d;
        }
    }
    Ok(MomentReport {
        mu,
        central_moments: sums.into_iter().map(|s| s * grid.h).collect(),
    })
}

/// Spacings and scaled spacings, index-aligned with `energies`.
pub fn level_spacings(energies: &[f64]) -> Result<(Vec<Option<f64>>, Vec<Option<f64>>)> {
    if let Some(w) = energies.windows(2).find(|w| !(w[1] > w[0])) {
        return Err(Error::precondition(format!(
            "energies must be strictly ascending ({} followed by {})",
            w[0], w[1]
        )));
    }
    let n = energies.len();
    let spacings: Vec<Option<f64>> = (0..n).map(|i| (i > 0).then(|| energies[i] - energies[i - 1])).collect();
    let scaled = (0..n)
        .map(|i| match (spacings[i], spacings.get(i + 1).copied().flatten()) {
            (Some(d), Some(next)) => Some(next / d),
            _ => None,
        })
        .collect();
    Ok((spacings, scaled))
}

pub fn spacing_analysis(energies: &[f64], landmarks: &Landmarks) -> Result<SpectrumReport> {
    if energies.len() < 3 {
        return Err(Error::precondition(format!(
            "spacing analysis needs at least 3 energies, got {}",
            energies.len()
        )));
    }
    let (spacings, scaled_spacings) = level_spacings(energies)?;
    Ok(SpectrumReport {
        energies: energies.to_vec(),
        spacings,
        scaled_spacings,
        bound_count: count_bound(energies, landmarks.v_max),
        branch_index: energies.iter().position(|&e| e > landmarks.v_v),
    })
}

/// Number of energies strictly below `v_max`.
pub fn count_bound(energies: &[f64], v_max: f64) -> usize {
    energies.iter().take_while(|&&e| e < v_max).count()
}

/// Sign changes along the samples whose magnitude exceeds `1e-3 · max|ψ|`;
/// samples below that floor are skipped.
pub fn node_count(psi: &[f64]) -> usize {
    let max = psi.iter().fold(0.0_f64, |m, p| m.max(p.abs()));
    let floor = NODE_FLOOR * max;
    let mut nodes = 0;
    let mut last: Option<bool> = None;
    for &p in psi.iter().filter(|p| p.abs() > floor) {
        let positive = p > 0.0;
        if last.is_some_and(|s| s != positive) {
            nodes += 1;
        }
        last = Some(positive);
    }
    nodes
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian(grid: &Grid, center: f64) -> Vec<f64> {
        let raw: Vec<f64> = grid.points().iter().map(|q| (-(q - center).powi(2) / 2.0).exp()).collect();
        let norm = (grid.h * raw.iter().map(|p| p * p).sum::<f64>()).sqrt();
        raw.into_iter().map(|p| p / norm).collect()
    }

    #[test]
    fn gaussian_moments() {
        let grid = Grid::new(-15.0, 15.0, 2999).unwrap();
        let psi = gaussian(&grid, 0.75);
        let report = moments(&psi, &grid, 4).unwrap();
        assert!((report.mu - 0.75).abs() < 1e-12);
        assert!((report.central_moments[0] - 1.0).abs() < 1e-12);
        assert!(report.central_moments[1].abs() < 1e-12);
        assert!((report.central_moments[2] - 0.5).abs() < 1e-12);
        assert!(report.central_moments[3].abs() < 1e-12);
        assert!((report.central_moments[4] - 0.75).abs() < 1e-12);
        assert_eq!(central_moment(&psi, &grid, 2).unwrap(), report.central_moments[2]);
    }

    #[test]
    fn unnormalized_state_is_rejected() {
        let grid = Grid::new(-5.0, 5.0, 99).unwrap();
        let psi = vec![1.0; 99];
        assert!(matches!(mean_position(&psi, &grid), Err(Error::Precondition(_))));
        let good = gaussian(&grid, 0.0);
        assert!(matches!(central_moment(&good, &grid, 21), Err(Error::Precondition(_))));
    }

    #[test]
    fn harmonic_ladder_spacings() {
        let energies: Vec<f64> = (0..10).map(|n| n as f64 + 0.5).collect();
        let lm = Landmarks {
            q_min: 0.0,
            q_max: -1.0,
            q_v: -0.5,
            v_max: 7.0,
            v_v: 3.0,
        };
        let report = spacing_analysis(&energies, &lm).unwrap();
        assert_eq!(report.spacings[0], None);
        assert_eq!(report.scaled_spacings[0], None);
        assert_eq!(report.scaled_spacings[9], None);
        for r in report.scaled_spacings.iter().flatten() {
            assert_eq!(*r, 1.0);
        }
        assert_eq!(report.bound_count, 7);
        assert_eq!(report.branch_index, Some(3));
    }

    #[test]
    fn spacing_preconditions() {
        let lm = Landmarks {
            q_min: 0.0,
            q_max: -1.0,
            q_v: -0.5,
            v_max: 1.0,
            v_v: 0.5,
        };
        assert!(spacing_analysis(&[1.0, 2.0], &lm).is_err());
        assert!(spacing_analysis(&[1.0, 3.0, 2.0], &lm).is_err());
    }

    #[test]
    fn bound_counting() {
        assert_eq!(count_bound(&[], 1.0), 0);
        assert_eq!(count_bound(&[0.5, 1.5, 2.5], f64::INFINITY), 3);
        assert_eq!(count_bound(&[0.5, 1.0, 2.5], 1.0), 1);
    }

    #[test]
    fn nodes_ignore_tail_noise() {
        assert_eq!(node_count(&[1e-9, -1e-9, 0.5, 1.0, 0.4, -1e-8, 1e-8]), 0);
        assert_eq!(node_count(&[0.2, 1.0, 0.1, -0.3, -1.0, -0.2, 0.5]), 2);
        // a sample sitting on the node
        assert_eq!(node_count(&[-0.5, -1.0, -0.3, 0.0, 0.3, 1.0, 0.5]), 1);
    }
}
