//! Symmetric band matrices stored by lower diagonals.

use crate::error::{Error, Result};

/// Real symmetric matrix with half-bandwidth `kd`.
///
/// Only the lower triangle is stored, diagonal by diagonal:
/// `bands[d][j] = A[j + d][j]` for `d = 0..=kd`, so the matrix is symmetric
/// by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct SymBandMatrix {
    n: usize,
    bands: Vec<Vec<f64>>,
}

impl SymBandMatrix {
    pub fn zeros(n: usize, kd: usize) -> Self {
        let bands = (0..=kd).map(|d| vec![0.0; n.saturating_sub(d)]).collect();
        SymBandMatrix { n, bands }
    }

    /// Builds a matrix from its lower diagonals; `bands[0]` is the main diagonal.
    pub fn from_bands(bands: Vec<Vec<f64>>) -> Result<Self> {
        let n = bands.first().map_or(0, Vec::len);
        if n == 0 {
            return Err(Error::config("band matrix must have a non-empty diagonal"));
        }
        for (d, band) in bands.iter().enumerate() {
            if band.len() != n.saturating_sub(d) {
                return Err(Error::config(format!(
                    "band {d} has length {}, expected {}",
                    band.len(),
                    n.saturating_sub(d)
                )));
            }
        }
        Ok(SymBandMatrix { n, bands })
    }

    /// Symmetric matrix from a dense row-major square, keeping `kd` off-diagonals.
    pub fn from_dense(rows: &[Vec<f64>], kd: usize) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::config("dense matrix must be square"));
        }
        let mut m = SymBandMatrix::zeros(n, kd.min(n.saturating_sub(1)));
        for d in 0..m.bands.len() {
            for j in 0..n - d {
                m.bands[d][j] = rows[j + d][j];
            }
        }
        Ok(m)
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn half_bandwidth(&self) -> usize {
        self.bands.len() - 1
    }

    pub fn bands(&self) -> &[Vec<f64>] {
        &self.bands
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.bands[0]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        let d = i - j;
        if d < self.bands.len() {
            self.bands[d][j]
        } else {
            0.0
        }
    }

    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        self.bands[i - j][j] = value;
    }

    /// `y = A x`
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n, "vector length must match the matrix dimension");
        let mut y: Vec<f64> = self.bands[0].iter().zip(x).map(|(a, xi)| a * xi).collect();
        for (d, band) in self.bands.iter().enumerate().skip(1) {
            for (j, &a) in band.iter().enumerate() {
                y[j + d] += a * x[j];
                y[j] += a * x[j + d];
            }
        }
        y
    }

    /// Maximum absolute row sum, which equals the 1- and ∞-norms for a
    /// symmetric matrix and bounds the spectral norm from above.
    pub fn norm_estimate(&self) -> f64 {
        let mut rows = vec![0.0_f64; self.n];
        for (d, band) in self.bands.iter().enumerate() {
            for (j, &a) in band.iter().enumerate() {
                rows[j] += a.abs();
                if d > 0 {
                    rows[j + d] += a.abs();
                }
            }
        }
        rows.into_iter().fold(0.0, f64::max)
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j)).collect())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> SymBandMatrix {
        SymBandMatrix::from_bands(vec![vec![4.0, 5.0, 6.0, 7.0], vec![1.0, 2.0, 3.0], vec![-1.0, 0.5]])
            .unwrap()
    }

    #[test]
    fn symmetric_access() {
        let m = sample();
        assert_eq!(m.get(1, 0), 1.0);
        assert_eq!(m.get(0, 1), 1.0);
        assert_eq!(m.get(3, 1), 0.5);
        assert_eq!(m.get(0, 3), 0.0);
        let dense = m.to_dense();
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(dense[i][j], dense[j][i]);
            }
        }
    }

    #[test]
    fn matvec_matches_dense_product() {
        let m = sample();
        let x = [1.0, -2.0, 0.5, 3.0];
        let dense = m.to_dense();
        let expected: Vec<f64> = dense
            .iter()
            .map(|row| row.iter().zip(&x).map(|(a, b)| a * b).sum())
            .collect();
        assert_eq!(m.matvec(&x), expected);
    }

    #[test]
    fn norm_is_max_row_sum() {
        // rows: [4,1,-1,0] [1,5,2,.5] [-1,2,6,3] [0,.5,3,7]
        assert_eq!(sample().norm_estimate(), 12.0);
    }

    #[test]
    fn ragged_bands_are_rejected() {
        assert!(SymBandMatrix::from_bands(vec![vec![1.0, 2.0], vec![1.0, 2.0]]).is_err());
        assert!(SymBandMatrix::from_bands(vec![]).is_err());
    }
}
