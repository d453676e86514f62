//! Lowest eigenpairs of symmetric band matrices.
//!
//! Eigenvalues come from Sturm bisection on an orthogonally reduced
//! tridiagonal matrix; eigenvectors from inverse iteration on the original
//! band matrix, refined to Rayleigh quotients. Every step is sequential and
//! seeded, so repeated solves are bitwise identical.

mod band_lu;
mod tridiagonal;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use band_lu::BandLu;
pub use tridiagonal::{reduce_to_tridiagonal, Tridiagonal};

use crate::banded::SymBandMatrix;
use crate::discretization::{BandedHamiltonian, Grid};
use crate::error::{Error, Result};

/// Default relative residual tolerance.
pub const DEFAULT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Converged when `‖A v - λ v‖ ≤ tol · ‖A‖`.
    pub tol: f64,
    /// Budget of matrix applications (solves plus products) per eigenpair.
    pub max_applications: usize,
    /// Neighbouring eigenvalues closer than `cluster_gap · ‖A‖` are
    /// explicitly orthogonalized against each other.
    pub cluster_gap: f64,
    pub seed: u64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: DEFAULT_TOL,
            max_applications: 100_000,
            cluster_gap: 1e-3,
            seed: 0x5550_5345_5850,
        }
    }
}

impl SolverOptions {
    pub fn with_tol(tol: f64) -> Self {
        SolverOptions {
            tol,
            ..Self::default()
        }
    }
}

/// Eigenpairs of a band matrix with unit Euclidean-norm vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct BandEigen {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
    /// `‖A v - λ v‖₂ / ‖v‖₂` per pair.
    pub residuals: Vec<f64>,
    pub iterations: Vec<usize>,
    /// The `‖A‖` estimate the tolerance refers to.
    pub norm: f64,
}

/// The `k` algebraically smallest eigenpairs of `m`, ascending.
pub fn lowest_eigenpairs(m: &SymBandMatrix, k: usize, opts: &SolverOptions) -> Result<BandEigen> {
    let n = m.dimension();
    if k == 0 || k > n {
        return Err(Error::config(format!(
            "requested {k} eigenpairs of a {n}-dimensional matrix"
        )));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::config(format!("tolerance must be positive, got {}", opts.tol)));
    }
    let norm = m.norm_estimate().max(f64::MIN_POSITIVE);
    let shifts = reduce_to_tridiagonal(m).lowest_eigenvalues(k);
    let threshold = opts.tol * norm;
    let tiny_pivot = f64::EPSILON * norm;
    let separation = 10.0 * f64::EPSILON * norm;

    let mut values = Vec::with_capacity(k);
    let mut vectors: Vec<Vec<f64>> = Vec::with_capacity(k);
    let mut residuals = Vec::with_capacity(k);
    let mut iterations = Vec::with_capacity(k);
    let mut cluster_start = 0;
    let mut prev_shift = f64::NEG_INFINITY;

    for (index, &bisected) in shifts.iter().enumerate() {
        if index > 0 && bisected - shifts[index - 1] > opts.cluster_gap * norm {
            cluster_start = index;
        }
        // Coincident shifts would reproduce the previous vector.
        let shift = if bisected - prev_shift < separation { prev_shift + separation } else { bisected };
        prev_shift = shift;

        let lu = BandLu::factor(m, shift, tiny_pivot);
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ (index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        let mut x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        normalize(&mut x);

        let mut applications = 0;
        let mut steps = 0;
        let (value, residual) = loop {
            lu.solve(&mut x);
            for prev in &vectors[cluster_start..index] {
                project_out(&mut x, prev);
            }
            for prev in &vectors[cluster_start..index] {
                project_out(&mut x, prev);
            }
            normalize(&mut x);
            let ax = m.matvec(&x);
            applications += 2;
            steps += 1;
            let rq = dot(&x, &ax);
            let r = ax
                .iter()
                .zip(&x)
                .map(|(a, v)| (a - rq * v).powi(2))
                .sum::<f64>()
                .sqrt();
            if r <= threshold {
                break (rq, r);
            }
            if applications >= opts.max_applications {
                return Err(Error::NoConvergence {
                    index,
                    iterations: steps,
                });
            }
        };

        fix_sign(&mut x);
        values.push(value);
        vectors.push(x);
        residuals.push(residual);
        iterations.push(steps);
    }

    // Rayleigh refinement can swap members of a tight cluster.
    if values.windows(2).any(|w| w[1] < w[0]) {
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        let permute = |v: &Vec<f64>| order.iter().map(|&i| v[i]).collect::<Vec<f64>>();
        values = permute(&values);
        residuals = permute(&residuals);
        vectors = order.iter().map(|&i| vectors[i].clone()).collect();
        iterations = order.iter().map(|&i| iterations[i]).collect();
    }

    Ok(BandEigen {
        values,
        vectors,
        residuals,
        iterations,
        norm,
    })
}

/// Eigenpairs of a discretized Hamiltonian with grid-normalized states.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenSolution {
    pub energies: Vec<f64>,
    /// `h Σ |ψ_i|² = 1` for every state.
    pub states: Vec<Vec<f64>>,
    pub residuals: Vec<f64>,
    pub iterations: Vec<usize>,
    pub norm_estimate: f64,
    pub grid: Grid,
}

impl EigenSolution {
    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }
}

pub fn solve_lowest(ham: &BandedHamiltonian, k: usize, tol: f64) -> Result<EigenSolution> {
    solve_lowest_with(ham, k, &SolverOptions::with_tol(tol))
}

pub fn solve_lowest_with(ham: &BandedHamiltonian, k: usize, opts: &SolverOptions) -> Result<EigenSolution> {
    let eig = lowest_eigenpairs(&ham.matrix, k, opts)?;
    let scale = 1.0 / ham.grid.h.sqrt();
    let states = eig
        .vectors
        .into_iter()
        .map(|v| v.into_iter().map(|x| x * scale).collect())
        .collect();
    Ok(EigenSolution {
        energies: eig.values,
        states,
        residuals: eig.residuals,
        iterations: eig.iterations,
        norm_estimate: eig.norm,
        grid: ham.grid,
    })
}

/// `‖H ψ - E ψ‖₂ / ‖ψ‖₂`
pub fn residual_norm(ham: &BandedHamiltonian, energy: f64, psi: &[f64]) -> Result<f64> {
    matrix_residual_norm(&ham.matrix, energy, psi)
}

pub fn matrix_residual_norm(m: &SymBandMatrix, energy: f64, psi: &[f64]) -> Result<f64> {
    if psi.len() != m.dimension() {
        return Err(Error::config(format!(
            "state has {} components but the matrix dimension is {}",
            psi.len(),
            m.dimension()
        )));
    }
    let norm = dot(psi, psi).sqrt();
    if norm == 0.0 {
        return Err(Error::precondition("residual of the zero vector is undefined"));
    }
    let hpsi = m.matvec(psi);
    let r = hpsi
        .iter()
        .zip(psi)
        .map(|(a, p)| (a - energy * p).powi(2))
        .sum::<f64>()
        .sqrt();
    Ok(r / norm)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(x: &mut [f64]) {
    let norm = dot(x, x).sqrt();
    if norm > 0.0 {
        x.iter_mut().for_each(|v| *v /= norm);
    }
}

fn project_out(x: &mut [f64], unit: &[f64]) {
    let c = dot(x, unit);
    x.iter_mut().zip(unit).for_each(|(v, u)| *v -= c * u);
}

/// The first component above `1e-3 · max|v|` is made positive.
fn fix_sign(x: &mut [f64]) {
    let max = x.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if let Some(first) = x.iter().find(|v| v.abs() > 1e-3 * max) {
        if *first < 0.0 {
            x.iter_mut().for_each(|v| *v = -*v);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_by_two() {
        let m = SymBandMatrix::from_dense(&[vec![2.0, 1.0], vec![1.0, 2.0]], 1).unwrap();
        let eig = lowest_eigenpairs(&m, 2, &SolverOptions::default()).unwrap();
        assert!((eig.values[0] - 1.0).abs() < 1e-14);
        assert!((eig.values[1] - 3.0).abs() < 1e-14);
        let r = matrix_residual_norm(&m, eig.values[0], &eig.vectors[0]).unwrap();
        assert!(r <= 1e-14, "{r}");
        let shifted = matrix_residual_norm(&m, eig.values[0] + 1.0, &eig.vectors[0]).unwrap();
        assert!((shifted - 1.0).abs() < 1e-14);
    }

    #[test]
    fn dirichlet_second_difference() {
        let m = SymBandMatrix::from_bands(vec![vec![2.0; 4], vec![-1.0; 3]]).unwrap();
        let eig = lowest_eigenpairs(&m, 4, &SolverOptions::default()).unwrap();
        for (k, v) in eig.values.iter().enumerate() {
            let exact = 2.0 - 2.0 * ((k + 1) as f64 * std::f64::consts::PI / 5.0).cos();
            assert!((v - exact).abs() < 1e-13);
        }
    }

    #[test]
    fn count_out_of_range() {
        let m = SymBandMatrix::from_bands(vec![vec![1.0; 3]]).unwrap();
        assert!(matches!(lowest_eigenpairs(&m, 0, &SolverOptions::default()), Err(Error::Config(_))));
        assert!(matches!(lowest_eigenpairs(&m, 4, &SolverOptions::default()), Err(Error::Config(_))));
    }

    #[test]
    fn exact_degeneracy_gets_orthogonal_vectors() {
        // diagonal matrix with a repeated eigenvalue
        let m = SymBandMatrix::from_bands(vec![vec![1.0, 1.0, 2.0, 1.0, 5.0], vec![0.0; 4]]).unwrap();
        let eig = lowest_eigenpairs(&m, 4, &SolverOptions::default()).unwrap();
        for (v, e) in eig.values.iter().zip([1.0, 1.0, 1.0, 2.0]) {
            assert!((v - e).abs() < 1e-14, "{v}");
        }
        for a in 0..4 {
            for b in 0..a {
                assert!(dot(&eig.vectors[a], &eig.vectors[b]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn budget_exhaustion_reports_the_pair() {
        let m = SymBandMatrix::from_bands(vec![vec![2.0; 50], vec![-1.0; 49]]).unwrap();
        let opts = SolverOptions {
            tol: 1e-300,
            max_applications: 6,
            ..SolverOptions::default()
        };
        match lowest_eigenpairs(&m, 3, &opts) {
            Err(Error::NoConvergence { index, iterations }) => {
                assert_eq!(index, 0);
                assert_eq!(iterations, 3);
            }
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    #[test]
    fn dimension_mismatch_in_residual() {
        let m = SymBandMatrix::from_bands(vec![vec![1.0; 3]]).unwrap();
        assert!(matches!(matrix_residual_norm(&m, 1.0, &[1.0, 0.0]), Err(Error::Config(_))));
    }
}
