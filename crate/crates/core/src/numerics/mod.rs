//! Small dense complex linear algebra: matrix products, norms, SVD and
//! Hermitian eigendecomposition for matrices up to ~1024x1024.
//!
//! Everything here is a pure function on immutable inputs. The factorizations
//! use Jacobi iterations (one-sided for the SVD, cyclic two-sided for the
//! Hermitian eigenproblem): at the sizes this simulator needs, robustness and
//! reproducibility matter more than speed.

mod eig;
mod svd;

pub use eig::{eig_hermitian, EigH};
pub use svd::{svd, Svd};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Off-diagonal mass threshold (relative to the input Frobenius norm) at
/// which the Jacobi iterations stop.
pub(crate) const JACOBI_TOL: f64 = 1e-12;
/// Sweep cap for the Jacobi iterations.
pub(crate) const JACOBI_MAX_SWEEPS: usize = 100;

/// Dense complex matrix in row-major order. Column vectors are `n x 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Complex64::new(1.0, 0.0));
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::InvalidDimension(format!(
                "expected {} entries for a {rows}x{cols} matrix, got {}",
                rows * cols,
                data.len()
            )));
        }
        let m = Self { rows, cols, data };
        if !m.is_finite() {
            return Err(Error::InvalidArgument(
                "matrix entries must be finite".into(),
            ));
        }
        Ok(m)
    }

    /// Column vector from entries.
    pub fn col_vector(entries: Vec<Complex64>) -> Self {
        let rows = entries.len();
        Self {
            rows,
            cols: 1,
            data: entries,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn at(&self, r: usize, c: usize) -> Complex64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: Complex64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Conjugate transpose.
    pub fn conj_transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self.at(c, r).conj())
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::InvalidDimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.at(r, k);
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                for c in 0..other.cols {
                    let v = out.at(r, c) + a * other.at(k, c);
                    out.set(r, c, v);
                }
            }
        }
        Ok(out)
    }

    pub fn scaled(&self, s: Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::InvalidDimension("shape mismatch in add".into()));
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(other.data.iter())
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scaled(Complex64::new(-1.0, 0.0)))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn column(&self, c: usize) -> Vec<Complex64> {
        (0..self.rows).map(|r| self.at(r, c)).collect()
    }

    pub fn set_column(&mut self, c: usize, col: &[Complex64]) {
        for (r, v) in col.iter().enumerate() {
            self.set(r, c, *v);
        }
    }

    /// Build a matrix whose columns are the given vectors.
    pub fn from_columns(rows: usize, cols: &[Vec<Complex64>]) -> Self {
        let mut m = Self::zeros(rows, cols.len());
        for (c, col) in cols.iter().enumerate() {
            m.set_column(c, col);
        }
        m
    }

    /// Outer product `u v^H`.
    pub fn outer(u: &[Complex64], v: &[Complex64]) -> Self {
        Self::from_fn(u.len(), v.len(), |r, c| u[r] * v[c].conj())
    }

    /// 2-norm of a column vector.
    pub fn vector_norm(&self) -> f64 {
        self.frobenius_norm()
    }
}

/// Hermitian inner product `x^H y`.
pub fn hdot(x: &[Complex64], y: &[Complex64]) -> Complex64 {
    debug_assert_eq!(x.len(), y.len());
    x.iter().zip(y.iter()).map(|(a, b)| a.conj() * b).sum()
}

pub fn norm2(x: &[Complex64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Rotate a vector by a global phase so its largest-magnitude entry is real
/// and positive. Makes factorization outputs deterministic for golden tests.
/// Returns the applied factor.
pub(crate) fn fix_phase(col: &mut [Complex64]) -> Complex64 {
    let mut best = 0usize;
    let mut best_mag = 0.0f64;
    for (i, z) in col.iter().enumerate() {
        let m = z.norm();
        if m > best_mag {
            best_mag = m;
            best = i;
        }
    }
    if best_mag == 0.0 {
        return Complex64::new(1.0, 0.0);
    }
    let factor = col[best].conj() / best_mag;
    for z in col.iter_mut() {
        *z *= factor;
    }
    factor
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn matmul_small() {
        let a = ComplexMatrix::from_vec(
            2,
            2,
            vec![c(1.0, 0.0), c(0.0, 1.0), c(2.0, 0.0), c(0.0, 0.0)],
        )
        .unwrap();
        let b = ComplexMatrix::identity(2);
        let p = a.mul(&b).unwrap();
        assert_eq!(p, a);
    }

    #[test]
    fn conj_transpose_involution() {
        let a = ComplexMatrix::from_fn(3, 2, |r, cc| c(r as f64, cc as f64 + 0.5));
        let back = a.conj_transpose().conj_transpose();
        assert_eq!(a, back);
    }

    #[test]
    fn frobenius_matches_entry_sum() {
        let a = ComplexMatrix::from_vec(1, 2, vec![c(3.0, 0.0), c(0.0, 4.0)]).unwrap();
        assert_relative_eq!(a.frobenius_norm(), 5.0, epsilon = 1e-15);
    }

    #[test]
    fn from_vec_rejects_bad_length() {
        assert!(ComplexMatrix::from_vec(2, 2, vec![c(1.0, 0.0)]).is_err());
    }

    #[test]
    fn from_vec_rejects_nan() {
        assert!(ComplexMatrix::from_vec(1, 1, vec![c(f64::NAN, 0.0)]).is_err());
    }

    #[test]
    fn fix_phase_makes_pivot_real_positive() {
        let mut v = vec![c(0.1, 0.2), c(-0.3, 0.9), c(0.2, 0.0)];
        fix_phase(&mut v);
        let mag: Vec<f64> = v.iter().map(|z| z.norm()).collect();
        let pivot = v[1];
        assert!(mag[1] > mag[0] && mag[1] > mag[2]);
        assert!(pivot.re > 0.0);
        assert!(pivot.im.abs() < 1e-15);
    }
}
