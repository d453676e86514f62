//! Band-to-tridiagonal reduction and Sturm bisection.

use crate::banded::SymBandMatrix;

/// Symmetric tridiagonal matrix: `diag[i]` and `off[i] = T[i+1][i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tridiagonal {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

/// Lower band storage with one extra diagonal that holds the bulge while it
/// is chased off the end of the matrix.
struct Workspace {
    n: usize,
    /// Stored diagonals, `kd + 2` of them (`w = kd + 1` is the bulge diagonal).
    w: usize,
    a: Vec<f64>,
}

impl Workspace {
    fn new(m: &SymBandMatrix) -> Self {
        let n = m.dimension();
        let kd = m.half_bandwidth();
        let w = kd + 1;
        let mut a = vec![0.0; (w + 1) * n];
        for (d, band) in m.bands().iter().enumerate() {
            a[d * n..d * n + band.len()].copy_from_slice(band);
        }
        Workspace { n, w, a }
    }

    /// Lower-triangle element `(i, j)` with `i >= j` and `i - j <= w`.
    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(i >= j && i - j <= self.w);
        (i - j) * self.n + j
    }

    /// Plane rotation `G A Gᵀ` in rows/columns `(p, p + 1)` chosen so that
    /// element `(p + 1, t)` becomes zero. `t < p`.
    fn annihilate(&mut self, p: usize, t: usize) {
        let q = p + 1;
        let ip = self.idx(p, t);
        let iq = self.idx(q, t);
        let x = self.a[ip];
        let y = self.a[iq];
        if y == 0.0 {
            return;
        }
        let r = x.hypot(y);
        let c = x / r;
        let s = y / r;
        self.a[ip] = r;
        self.a[iq] = 0.0;

        // Remaining columns left of the pivot block.
        for k in t + 1..p {
            let ip = self.idx(p, k);
            let iq = self.idx(q, k);
            let (x, y) = (self.a[ip], self.a[iq]);
            self.a[ip] = c * x + s * y;
            self.a[iq] = -s * x + c * y;
        }

        let ipp = self.idx(p, p);
        let iqp = self.idx(q, p);
        let iqq = self.idx(q, q);
        let (app, aqp, aqq) = (self.a[ipp], self.a[iqp], self.a[iqq]);
        self.a[ipp] = c * c * app + 2.0 * c * s * aqp + s * s * aqq;
        self.a[iqq] = s * s * app - 2.0 * c * s * aqp + c * c * aqq;
        self.a[iqp] = (c * c - s * s) * aqp + c * s * (aqq - app);

        // Rows below the block; row p + w picks up the new bulge.
        let last = (p + self.w).min(self.n - 1);
        for k in q + 1..=last {
            let ikp = self.idx(k, p);
            let ikq = self.idx(k, q);
            let (x, y) = (self.a[ikp], self.a[ikq]);
            self.a[ikp] = c * x + s * y;
            self.a[ikq] = -s * x + c * y;
        }
    }
}

/// Orthogonal similarity reduction of a symmetric band matrix to tridiagonal
/// form by Givens rotations with bulge chasing. Eigenvectors are not
/// accumulated, so the memory footprint stays `O(n · kd)`.
pub fn reduce_to_tridiagonal(m: &SymBandMatrix) -> Tridiagonal {
    let n = m.dimension();
    let kd = m.half_bandwidth();
    let mut ws = Workspace::new(m);

    if kd > 1 {
        for j in 0..n.saturating_sub(2) {
            for d in (2..=kd).rev() {
                let row = j + d;
                if row >= n {
                    continue;
                }
                // Zero (row, j) against (row - 1, j), then chase the bulge.
                let mut p = row - 1;
                let mut t = j;
                loop {
                    ws.annihilate(p, t);
                    let bulge_row = p + ws.w;
                    if bulge_row >= n {
                        break;
                    }
                    t = p;
                    p = bulge_row - 1;
                }
            }
        }
    }

    let diag = ws.a[..n].to_vec();
    let off = if n > 1 { ws.a[n..2 * n - 1].to_vec() } else { Vec::new() };
    Tridiagonal { diag, off }
}

impl Tridiagonal {
    /// Number of eigenvalues strictly less than `x`.
    pub fn count_below(&self, x: f64, pivmin: f64) -> usize {
        let mut count = 0;
        let mut d = self.diag[0] - x;
        if d.abs() < pivmin {
            d = -pivmin;
        }
        if d < 0.0 {
            count += 1;
        }
        for i in 1..self.diag.len() {
            let e = self.off[i - 1];
            d = self.diag[i] - x - e * e / d;
            if d.abs() < pivmin {
                d = -pivmin;
            }
            if d < 0.0 {
                count += 1;
            }
        }
        count
    }

    fn gershgorin(&self) -> (f64, f64) {
        let n = self.diag.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let mut r = 0.0;
            if i > 0 {
                r += self.off[i - 1].abs();
            }
            if i + 1 < n {
                r += self.off[i].abs();
            }
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    /// The `k` algebraically smallest eigenvalues by bisection, ascending.
    pub fn lowest_eigenvalues(&self, k: usize) -> Vec<f64> {
        let n = self.diag.len();
        let k = k.min(n);
        let (glo, ghi) = self.gershgorin();
        let spread = (ghi - glo).max(f64::MIN_POSITIVE);
        let lo0 = glo - 2.0 * f64::EPSILON * spread - f64::MIN_POSITIVE;
        let hi0 = ghi + 2.0 * f64::EPSILON * spread + f64::MIN_POSITIVE;
        let max_e2 = self.off.iter().fold(1.0_f64, |m, e| m.max(e * e));
        let pivmin = f64::MIN_POSITIVE * max_e2;

        let mut values = Vec::with_capacity(k);
        let mut lo_start = lo0;
        for index in 0..k {
            // Invariant: count_below(lo) <= index < count_below(hi).
            let mut lo = lo_start;
            let mut hi = hi0;
            for _ in 0..256 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                let width_tol = 2.0 * f64::EPSILON * lo.abs().max(hi.abs()) + pivmin;
                if hi - lo <= width_tol {
                    break;
                }
                if self.count_below(mid, pivmin) > index {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            let value = 0.5 * (lo + hi);
            values.push(value);
            lo_start = lo;
        }
        values
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense_similarity_invariants(m: &SymBandMatrix, t: &Tridiagonal) {
        // trace and Frobenius norm are preserved by orthogonal similarity
        let dense = m.to_dense();
        let n = dense.len();
        let trace: f64 = (0..n).map(|i| dense[i][i]).sum();
        let frob: f64 = dense.iter().flatten().map(|x| x * x).sum();
        let t_trace: f64 = t.diag.iter().sum();
        let t_frob: f64 = t.diag.iter().map(|x| x * x).sum::<f64>() + 2.0 * t.off.iter().map(|x| x * x).sum::<f64>();
        assert!((trace - t_trace).abs() < 1e-10 * frob.sqrt());
        assert!((frob - t_frob).abs() < 1e-10 * frob);
    }

    #[test]
    fn reduction_preserves_trace_and_norm() {
        let n = 37;
        let bands: Vec<Vec<f64>> = (0..=4)
            .map(|d| (0..n - d).map(|j| ((j * 7 + d * 13) % 11) as f64 - 5.0 + 0.1 * d as f64).collect())
            .collect();
        let m = SymBandMatrix::from_bands(bands).unwrap();
        let t = reduce_to_tridiagonal(&m);
        dense_similarity_invariants(&m, &t);
    }

    #[test]
    fn tridiagonal_input_is_untouched() {
        let m = SymBandMatrix::from_bands(vec![vec![2.0; 5], vec![-1.0; 4]]).unwrap();
        let t = reduce_to_tridiagonal(&m);
        assert_eq!(t.diag, vec![2.0; 5]);
        assert_eq!(t.off, vec![-1.0; 4]);
    }

    #[test]
    fn bisection_on_dirichlet_laplacian() {
        let n = 4;
        let t = Tridiagonal {
            diag: vec![2.0; n],
            off: vec![-1.0; n - 1],
        };
        let values = t.lowest_eigenvalues(n);
        for (k, v) in values.iter().enumerate() {
            let exact = 2.0 - 2.0 * ((k + 1) as f64 * std::f64::consts::PI / 5.0).cos();
            assert!((v - exact).abs() < 1e-14, "{v} vs {exact}");
        }
    }

    #[test]
    fn sturm_count_is_monotone() {
        let t = Tridiagonal {
            diag: vec![1.0, -3.0, 4.0, 0.5, 2.0],
            off: vec![0.3, 1.5, -0.7, 2.0],
        };
        let mut prev = 0;
        for i in -100..=100 {
            let c = t.count_below(i as f64 * 0.1, f64::MIN_POSITIVE);
            assert!(c >= prev);
            prev = c;
        }
        assert_eq!(prev, 5);
    }
}
