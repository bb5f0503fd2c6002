//! Tridiagonal kernels: symmetric eigensolver and a factored complex solver.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Iteration cap per eigenvalue for the implicit QL sweep.
const MAX_QL_ITERATIONS: usize = 60;

/// Eigen-decomposition of a real symmetric tridiagonal matrix by implicit QL
/// with Wilkinson-style shifts.
///
/// `diag` has length n, `off` has length n - 1 (`off[i]` couples i and i+1).
/// Returns eigenvalues ascending and the matching Euclidean-orthonormal
/// eigenvectors as matrix columns.
pub fn symmetric_tridiagonal_eigen(diag: &[f64], off: &[f64]) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let n = diag.len();
    if n == 0 {
        return Ok((Vec::new(), DMatrix::zeros(0, 0)));
    }
    if off.len() + 1 != n {
        return Err(Error::InvalidArgument(format!(
            "tridiagonal needs {} off-diagonal entries, got {}",
            n - 1,
            off.len()
        )));
    }

    let mut d = diag.to_vec();
    let mut e = off.to_vec();
    e.push(0.0);
    let mut z = DMatrix::<f64>::identity(n, n);

    for l in 0..n {
        let mut iterations = 0;
        loop {
            let mut m = l;
            while m < n - 1 {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iterations += 1;
            if iterations > MAX_QL_ITERATIONS {
                return Err(Error::NoConvergence {
                    index: l,
                    iterations,
                });
            }

            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;

            for i in (l..m).rev() {
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;

                let (left, right) = (i, i + 1);
                for k in 0..n {
                    let zr = z[(k, right)];
                    let zl = z[(k, left)];
                    z[(k, right)] = s * zl + c * zr;
                    z[(k, left)] = c * zl - s * zr;
                }
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
    let values = order.iter().map(|&i| d[i]).collect();
    let vectors = DMatrix::from_fn(n, n, |row, col| z[(row, order[col])]);
    Ok((values, vectors))
}

/// Pre-factored LU of a complex tridiagonal matrix with constant off-diagonals,
/// reused across many right-hand sides (Thomas algorithm without pivoting).
#[derive(Debug, Clone)]
pub struct ComplexTridiagonal {
    off: Complex64,
    /// Modified super-diagonal c'ᵢ.
    upper: Vec<Complex64>,
    /// Reciprocal pivots.
    inv_pivot: Vec<Complex64>,
}

impl ComplexTridiagonal {
    /// Factor the matrix with diagonal `diag` and constant off-diagonal `off`.
    pub fn factor(diag: &[Complex64], off: Complex64) -> Result<Self> {
        let n = diag.len();
        let mut upper = vec![Complex64::new(0.0, 0.0); n];
        let mut inv_pivot = vec![Complex64::new(0.0, 0.0); n];
        let scale = diag.iter().map(|z| z.norm()).fold(off.norm(), f64::max);
        for i in 0..n {
            let pivot = if i == 0 {
                diag[0]
            } else {
                diag[i] - off * upper[i - 1]
            };
            if pivot.norm() <= f64::EPSILON * scale {
                return Err(Error::InvalidArgument(format!(
                    "singular tridiagonal system: pivot {i} vanished"
                )));
            }
            inv_pivot[i] = pivot.inv();
            upper[i] = off * inv_pivot[i];
        }
        Ok(Self {
            off,
            upper,
            inv_pivot,
        })
    }

    pub fn len(&self) -> usize {
        self.inv_pivot.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inv_pivot.is_empty()
    }

    /// Solve in place; `rhs` may be any strided slice of length n.
    pub fn solve_in_place<'a, I>(&self, rhs: I)
    where
        I: IntoIterator<Item = &'a mut Complex64>,
    {
        let mut refs: Vec<&mut Complex64> = rhs.into_iter().collect();
        let n = refs.len();
        debug_assert_eq!(n, self.len());
        let mut prev = Complex64::new(0.0, 0.0);
        for i in 0..n {
            let v = (*refs[i] - self.off * prev) * self.inv_pivot[i];
            *refs[i] = v;
            prev = v;
        }
        for i in (0..n.saturating_sub(1)).rev() {
            let next = *refs[i + 1];
            *refs[i] -= self.upper[i] * next;
        }
    }

    /// Solve in place on a contiguous slice.
    pub fn solve_slice(&self, x: &mut [Complex64]) {
        let n = x.len();
        debug_assert_eq!(n, self.len());
        let mut prev = Complex64::new(0.0, 0.0);
        for (xi, &inv) in x.iter_mut().zip(&self.inv_pivot) {
            let v = (*xi - self.off * prev) * inv;
            *xi = v;
            prev = v;
        }
        for i in (0..n.saturating_sub(1)).rev() {
            let next = x[i + 1];
            x[i] -= self.upper[i] * next;
        }
    }

    /// Solve `X Aᵀ = B` in place for a column-major `n_rows × n` matrix,
    /// i.e. one tridiagonal system per row, all swept in lockstep so every
    /// update is a contiguous column operation.
    pub fn solve_rows_in_place(&self, data: &mut [Complex64], n_rows: usize) {
        let n = self.len();
        debug_assert_eq!(data.len(), n_rows * n);
        for j in 0..n {
            let inv = self.inv_pivot[j];
            if j == 0 {
                for v in &mut data[..n_rows] {
                    *v *= inv;
                }
            } else {
                let (done, rest) = data.split_at_mut(j * n_rows);
                let prev = &done[(j - 1) * n_rows..];
                for (v, p) in rest[..n_rows].iter_mut().zip(prev) {
                    *v = (*v - self.off * p) * inv;
                }
            }
        }
        for j in (0..n.saturating_sub(1)).rev() {
            let up = self.upper[j];
            let (head, tail) = data.split_at_mut((j + 1) * n_rows);
            let next = &tail[..n_rows];
            for (v, nx) in head[j * n_rows..].iter_mut().zip(next) {
                *v -= up * nx;
            }
        }
    }

    pub fn solve(&self, rhs: &DVector<Complex64>) -> DVector<Complex64> {
        let mut out = rhs.clone();
        self.solve_in_place(out.iter_mut());
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense(diag: &[f64], off: &[f64]) -> DMatrix<f64> {
        let n = diag.len();
        DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                diag[i]
            } else if i + 1 == j {
                off[i]
            } else if j + 1 == i {
                off[j]
            } else {
                0.0
            }
        })
    }

    #[test]
    fn two_by_two_closed_form() {
        let (vals, vecs) = symmetric_tridiagonal_eigen(&[1.0, 3.0], &[1.0]).unwrap();
        let expected = [2.0 - 2f64.sqrt(), 2.0 + 2f64.sqrt()];
        for (v, e) in vals.iter().zip(expected) {
            assert!((v - e).abs() < 1e-14);
        }
        let orth = vecs.transpose() * &vecs;
        assert!((orth - DMatrix::identity(2, 2)).amax() < 1e-14);
    }

    #[test]
    fn matches_dense_symmetric_eigen() {
        let diag: Vec<f64> = (0..40).map(|i| ((i * 37 % 11) as f64) - 3.5).collect();
        let off: Vec<f64> = (0..39).map(|i| 0.3 + ((i * 13 % 7) as f64) * 0.2).collect();
        let (vals, vecs) = symmetric_tridiagonal_eigen(&diag, &off).unwrap();
        let mut reference: Vec<f64> = dense(&diag, &off)
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .collect();
        reference.sort_by(f64::total_cmp);
        for (a, b) in vals.iter().zip(&reference) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
        let m = dense(&diag, &off);
        for (k, &lambda) in vals.iter().enumerate() {
            let v = vecs.column(k);
            let res = &m * v - v * lambda;
            assert!(res.amax() < 1e-12);
        }
        assert!(vals.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn handles_decoupled_blocks() {
        let (vals, _) =
            symmetric_tridiagonal_eigen(&[2.0, 1.0, 5.0, 4.0], &[0.0, 0.0, 0.0]).unwrap();
        assert_eq!(vals, vec![1.0, 2.0, 4.0, 5.0]);
    }

    #[test]
    fn complex_solve_matches_dense() {
        let n = 12;
        let diag: Vec<Complex64> = (0..n)
            .map(|i| Complex64::new(1.0, 0.2 * i as f64 + 0.7))
            .collect();
        let off = Complex64::new(0.0, -0.45);
        let lu = ComplexTridiagonal::factor(&diag, off).unwrap();
        let rhs = DVector::from_fn(n, |i, _| Complex64::new(i as f64, 1.0 - i as f64));
        let x = lu.solve(&rhs);
        let a = DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                diag[i]
            } else if i.abs_diff(j) == 1 {
                off
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        assert!((a * x - rhs).camax() < 1e-12);
    }
}
