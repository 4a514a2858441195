//! Cyclic Jacobi eigendecomposition for Hermitian matrices.

use num_complex::Complex64;

use super::{fix_phase, ComplexMatrix, JACOBI_MAX_SWEEPS, JACOBI_TOL};
use crate::error::{Error, Result};

/// Eigendecomposition `M = Q diag(L) Q^H` with `L` real and sorted
/// descending, `Q` unitary, and each eigenvector phase fixed
/// deterministically.
pub struct EigH {
    pub q: ComplexMatrix,
    pub l: Vec<f64>,
}

/// Relative Hermitian-defect tolerance: inputs further than this from their
/// own conjugate transpose are rejected rather than silently symmetrized.
const HERMITIAN_TOL: f64 = 1e-9;

pub fn eig_hermitian(m: &ComplexMatrix) -> Result<EigH> {
    if m.rows() == 0 || m.cols() == 0 || m.rows() != m.cols() {
        return Err(Error::InvalidDimension(format!(
            "eig_hermitian requires a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    if !m.is_finite() {
        return Err(Error::InvalidArgument(
            "eig_hermitian input must be finite".into(),
        ));
    }
    let n = m.rows();
    let fro = m.frobenius_norm();
    let defect = m.sub(&m.conj_transpose())?.frobenius_norm();
    if defect > HERMITIAN_TOL * fro.max(f64::MIN_POSITIVE) && fro > 0.0 {
        return Err(Error::NotHermitian(format!(
            "||M - M^H||_F = {defect:.3e} exceeds {HERMITIAN_TOL:.0e} * ||M||_F"
        )));
    }

    // Symmetrize to scrub roundoff-level asymmetry.
    let mut a: Vec<Complex64> = Vec::with_capacity(n * n);
    for r in 0..n {
        for c in 0..n {
            a.push((m.at(r, c) + m.at(c, r).conj()) * 0.5);
        }
    }
    let idx = |r: usize, c: usize| r * n + c;
    let mut q: Vec<Complex64> = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        q[idx(i, i)] = Complex64::new(1.0, 0.0);
    }

    if fro > 0.0 {
        for _sweep in 0..JACOBI_MAX_SWEEPS {
            for p in 0..n {
                for r in (p + 1)..n {
                    let apq = a[idx(p, r)];
                    let g = apq.norm();
                    if g == 0.0 {
                        continue;
                    }
                    let app = a[idx(p, p)].re;
                    let aqq = a[idx(r, r)].re;
                    let phase = apq / g;
                    let tau = (aqq - app) / (2.0 * g);
                    let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                    let cth = 1.0 / (1.0 + t * t).sqrt();
                    let sth = cth * t;
                    let pc = phase.conj();

                    // Columns: A <- A R.
                    for i in 0..n {
                        let xi = a[idx(i, p)];
                        let xj = a[idx(i, r)] * pc;
                        a[idx(i, p)] = xi * cth - xj * sth;
                        a[idx(i, r)] = xi * sth + xj * cth;
                    }
                    // Rows: A <- R^H A.
                    for i in 0..n {
                        let xi = a[idx(p, i)];
                        let xj = a[idx(r, i)] * phase;
                        a[idx(p, i)] = xi * cth - xj * sth;
                        a[idx(r, i)] = xi * sth + xj * cth;
                    }
                    // Pivot pair is now decoupled up to roundoff.
                    a[idx(p, p)] = Complex64::new(a[idx(p, p)].re, 0.0);
                    a[idx(r, r)] = Complex64::new(a[idx(r, r)].re, 0.0);
                    a[idx(p, r)] = Complex64::new(0.0, 0.0);
                    a[idx(r, p)] = Complex64::new(0.0, 0.0);

                    // Eigenvector accumulation: Q <- Q R.
                    for i in 0..n {
                        let xi = q[idx(i, p)];
                        let xj = q[idx(i, r)] * pc;
                        q[idx(i, p)] = xi * cth - xj * sth;
                        q[idx(i, r)] = xi * sth + xj * cth;
                    }
                }
            }
            let off: f64 = (0..n)
                .flat_map(|r| (0..n).filter(move |&c| c != r).map(move |c| (r, c)))
                .map(|(r, c)| a[idx(r, c)].norm_sqr())
                .sum::<f64>()
                .sqrt();
            if off <= JACOBI_TOL * fro {
                break;
            }
        }
    }

    let mut l: Vec<f64> = (0..n).map(|i| a[idx(i, i)].re).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| l[y].partial_cmp(&l[x]).unwrap().then(x.cmp(&y)));
    l = order.iter().map(|&k| l[k]).collect();

    let mut cols: Vec<Vec<Complex64>> = Vec::with_capacity(n);
    for &k in &order {
        let mut col: Vec<Complex64> = (0..n).map(|i| q[idx(i, k)]).collect();
        fix_phase(&mut col);
        cols.push(col);
    }

    Ok(EigH {
        q: ComplexMatrix::from_columns(n, &cols),
        l,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{hdot, norm2, svd};
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_hermitian(n: usize, seed: u64) -> ComplexMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let b = ComplexMatrix::from_fn(n, n, |_, _| {
            c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
        });
        // B + B^H is Hermitian by construction.
        b.add(&b.conj_transpose()).unwrap()
    }

    fn max_residual(m: &ComplexMatrix, e: &EigH) -> f64 {
        let mut worst = 0.0f64;
        for k in 0..e.l.len() {
            let qk = ComplexMatrix::col_vector(e.q.column(k));
            let mq = m.mul(&qk).unwrap();
            let lq = qk.scaled(c(e.l[k], 0.0));
            worst = worst.max(mq.sub(&lq).unwrap().frobenius_norm());
        }
        worst
    }

    #[test]
    fn diagonal_sorts_descending() {
        let mut m = ComplexMatrix::zeros(3, 3);
        m.set(0, 0, c(3.0, 0.0));
        m.set(1, 1, c(1.0, 0.0));
        m.set(2, 2, c(2.0, 0.0));
        let e = eig_hermitian(&m).unwrap();
        assert_eq!(e.l, vec![3.0, 2.0, 1.0]);
        // Eigenvectors are the permuted standard basis.
        assert_relative_eq!(e.q.at(0, 0).re, 1.0, epsilon = 1e-14);
        assert_relative_eq!(e.q.at(2, 1).re, 1.0, epsilon = 1e-14);
        assert_relative_eq!(e.q.at(1, 2).re, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn rank_one_projector() {
        let v = {
            let raw = vec![c(0.3, 0.4), c(-0.5, 0.1), c(0.2, -0.6)];
            let n = norm2(&raw);
            raw.into_iter().map(|z| z / n).collect::<Vec<_>>()
        };
        let m = ComplexMatrix::outer(&v, &v);
        let e = eig_hermitian(&m).unwrap();
        assert_relative_eq!(e.l[0], 1.0, epsilon = 1e-12);
        for &l in &e.l[1..] {
            assert!(l.abs() < 1e-12);
        }
        // Dominant eigenvector matches v up to a global phase.
        let overlap = hdot(&e.q.column(0), &v).norm();
        assert_relative_eq!(overlap, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn lambda_zero_matches_dominant_right_singular_vector() {
        // M = H^H w_r w_r^H H with w_r the dominant left singular vector:
        // its principal eigenvector is the dominant right singular vector.
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let h = ComplexMatrix::from_fn(2, 6, |_, _| {
            c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
        });
        let h = h.scaled(c(1.0 / h.frobenius_norm(), 0.0));
        let f = svd(&h).unwrap();
        let wr = ComplexMatrix::col_vector(f.u.column(0));
        let hw = h.conj_transpose().mul(&wr).unwrap();
        let m = ComplexMatrix::outer(hw.as_slice(), hw.as_slice());
        let e = eig_hermitian(&m).unwrap();
        let overlap = hdot(&e.q.column(0), &f.v.column(0)).norm();
        assert_relative_eq!(overlap, 1.0, epsilon = 1e-10);
        assert_relative_eq!(e.l[0], f.s[0] * f.s[0], epsilon = 1e-12);
    }

    #[test]
    fn residual_unitarity_and_trace() {
        for seed in [1u64, 2, 3] {
            let m = random_hermitian(12, seed);
            let e = eig_hermitian(&m).unwrap();
            let fro = m.frobenius_norm();
            assert!(max_residual(&m, &e) <= 1e-9 * fro);
            let qhq = e.q.conj_transpose().mul(&e.q).unwrap();
            assert!(
                qhq.sub(&ComplexMatrix::identity(12))
                    .unwrap()
                    .frobenius_norm()
                    < 1e-10,
                "Q not unitary"
            );
            let trace: f64 = (0..12).map(|i| m.at(i, i).re).sum();
            let lsum: f64 = e.l.iter().sum();
            assert_relative_eq!(trace, lsum, max_relative = 1e-9);
        }
    }

    #[test]
    fn degenerate_spectrum_spans_subspace() {
        // Identity: any orthonormal basis is valid; compare projectors.
        let m = ComplexMatrix::identity(4);
        let e = eig_hermitian(&m).unwrap();
        let proj = e.q.mul(&e.q.conj_transpose()).unwrap();
        assert!(proj.sub(&m).unwrap().frobenius_norm() < 1e-12);
        for &l in &e.l {
            assert_relative_eq!(l, 1.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn non_square_rejected() {
        let res = eig_hermitian(&ComplexMatrix::zeros(2, 3));
        assert!(matches!(res, Err(Error::InvalidDimension(_))));
    }

    #[test]
    fn non_hermitian_rejected() {
        let mut m = ComplexMatrix::identity(2);
        m.set(0, 1, c(0.5, 0.0));
        let res = eig_hermitian(&m);
        assert!(matches!(res, Err(Error::NotHermitian(_))));
    }

    #[test]
    fn zero_matrix_ok() {
        let e = eig_hermitian(&ComplexMatrix::zeros(3, 3)).unwrap();
        assert_eq!(e.l, vec![0.0, 0.0, 0.0]);
    }
}
