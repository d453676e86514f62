//! LU factorization with partial pivoting of a shifted symmetric band matrix.

use crate::banded::SymBandMatrix;

/// `P (A - σ I) = L U` for a band matrix with half-bandwidth `kd`.
///
/// Row `i` of the working array holds columns `i - kd ..= i + 2 kd`; the
/// extra `kd` columns on the right absorb the fill produced by row swaps.
pub struct BandLu {
    n: usize,
    kd: usize,
    width: usize,
    rows: Vec<f64>,
    /// Multipliers of elimination step `i`, for rows `i + 1 ..= i + kd`.
    lower: Vec<f64>,
    pivots: Vec<usize>,
}

impl BandLu {
    /// Factors `m - shift · I`. Zero pivots are replaced by `tiny_pivot`.
    pub fn factor(m: &SymBandMatrix, shift: f64, tiny_pivot: f64) -> Self {
        let n = m.dimension();
        let kd = m.half_bandwidth();
        let width = 3 * kd + 1;
        let mut lu = BandLu {
            n,
            kd,
            width,
            rows: vec![0.0; n * width],
            lower: vec![0.0; n * kd.max(1)],
            pivots: vec![0; n],
        };
        for i in 0..n {
            let lo = i.saturating_sub(kd);
            let hi = (i + kd).min(n - 1);
            for j in lo..=hi {
                let mut v = m.get(i, j);
                if i == j {
                    v -= shift;
                }
                let at = lu.at(i, j);
                lu.rows[at] = v;
            }
        }

        for i in 0..n {
            let last_row = (i + kd).min(n - 1);
            let mut piv = i;
            let mut best = lu.rows[lu.at(i, i)].abs();
            for r in i + 1..=last_row {
                let v = lu.rows[lu.at(r, i)].abs();
                if v > best {
                    best = v;
                    piv = r;
                }
            }
            lu.pivots[i] = piv;
            let last_col = (i + 2 * kd).min(n - 1);
            if piv != i {
                for j in i..=last_col {
                    let a = lu.at(i, j);
                    let b = lu.at(piv, j);
                    lu.rows.swap(a, b);
                }
            }
            let diag_at = lu.at(i, i);
            if lu.rows[diag_at].abs() < tiny_pivot {
                lu.rows[diag_at] = if lu.rows[diag_at] < 0.0 { -tiny_pivot } else { tiny_pivot };
            }
            let pivot = lu.rows[diag_at];
            for r in i + 1..=last_row {
                let at = lu.at(r, i);
                let l = lu.rows[at] / pivot;
                lu.rows[at] = 0.0;
                lu.lower[i * kd + (r - i - 1)] = l;
                if l != 0.0 {
                    for j in i + 1..=last_col {
                        let src = lu.at(i, j);
                        let dst = lu.at(r, j);
                        lu.rows[dst] -= l * lu.rows[src];
                    }
                }
            }
        }
        lu
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> usize {
        debug_assert!(j + self.kd >= i && j <= i + 2 * self.kd);
        i * self.width + (j + self.kd - i)
    }

    /// Solves `(A - σ I) x = b` in place.
    pub fn solve(&self, b: &mut [f64]) {
        let (n, kd) = (self.n, self.kd);
        for i in 0..n {
            let p = self.pivots[i];
            if p != i {
                b.swap(i, p);
            }
            let bi = b[i];
            if bi != 0.0 {
                for r in i + 1..=(i + kd).min(n - 1) {
                    b[r] -= self.lower[i * kd + (r - i - 1)] * bi;
                }
            }
        }
        for i in (0..n).rev() {
            let mut s = b[i];
            for j in i + 1..=(i + 2 * kd).min(n - 1) {
                s -= self.rows[self.at(i, j)] * b[j];
            }
            b[i] = s / self.rows[self.at(i, i)];
        }
    }
}
