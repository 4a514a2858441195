//! One-sided Jacobi singular value decomposition.

use num_complex::Complex64;

use super::{fix_phase, hdot, norm2, ComplexMatrix, JACOBI_MAX_SWEEPS, JACOBI_TOL};
use crate::error::{Error, Result};

/// Thin SVD `A = U diag(S) V^H` with `S` sorted descending and the phase of
/// each singular-vector pair fixed deterministically.
pub struct Svd {
    pub u: ComplexMatrix,
    pub s: Vec<f64>,
    pub v: ComplexMatrix,
}

pub fn svd(a: &ComplexMatrix) -> Result<Svd> {
    if a.rows() == 0 || a.cols() == 0 {
        return Err(Error::InvalidDimension(
            "svd requires rows >= 1 and cols >= 1".into(),
        ));
    }
    if !a.is_finite() {
        return Err(Error::InvalidArgument("svd input must be finite".into()));
    }
    if a.rows() < a.cols() {
        // Work on the conjugate transpose and swap the factors back.
        let t = svd(&a.conj_transpose())?;
        return Ok(Svd {
            u: t.v,
            s: t.s,
            v: t.u,
        });
    }

    let m = a.rows();
    let n = a.cols();
    let fro = a.frobenius_norm();

    // Working columns; after convergence they equal A * V_acc.
    let mut w: Vec<Vec<Complex64>> = (0..n).map(|c| a.column(c)).collect();
    let mut v: Vec<Vec<Complex64>> = (0..n)
        .map(|c| {
            let mut col = vec![Complex64::new(0.0, 0.0); n];
            col[c] = Complex64::new(1.0, 0.0);
            col
        })
        .collect();

    if fro > 0.0 {
        for _sweep in 0..JACOBI_MAX_SWEEPS {
            let mut converged = true;
            for i in 0..n {
                for j in (i + 1)..n {
                    let alpha = norm2(&w[i]).powi(2);
                    let beta = norm2(&w[j]).powi(2);
                    let gamma = hdot(&w[i], &w[j]);
                    let g = gamma.norm();
                    if g <= JACOBI_TOL * (alpha * beta).sqrt() || g == 0.0 {
                        continue;
                    }
                    converged = false;
                    // Phase that makes the inner product real, then a real
                    // Jacobi rotation that orthogonalizes the pair.
                    let phase = gamma / g;
                    let tau = (beta - alpha) / (2.0 * g);
                    let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                    let cth = 1.0 / (1.0 + t * t).sqrt();
                    let sth = cth * t;
                    rotate_pair(&mut w, i, j, cth, sth, phase);
                    rotate_pair(&mut v, i, j, cth, sth, phase);
                }
            }
            if converged {
                break;
            }
        }
    }

    // Extract singular values and sort descending (stable on ties).
    let mut sig: Vec<f64> = w.iter().map(|col| norm2(col)).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| sig[y].partial_cmp(&sig[x]).unwrap().then(x.cmp(&y)));
    let w: Vec<Vec<Complex64>> = order.iter().map(|&k| w[k].clone()).collect();
    let v: Vec<Vec<Complex64>> = order.iter().map(|&k| v[k].clone()).collect();
    sig = order.iter().map(|&k| sig[k]).collect();

    let smax = sig[0];
    let zero_tol = smax * 1e-13;
    let mut u_cols: Vec<Vec<Complex64>> = Vec::with_capacity(n);
    let mut v_cols: Vec<Vec<Complex64>> = Vec::with_capacity(n);
    for k in 0..n {
        if sig[k] > zero_tol && smax > 0.0 {
            let inv = 1.0 / sig[k];
            let mut u_k: Vec<Complex64> = w[k].iter().map(|z| z * inv).collect();
            let mut v_k = v[k].clone();
            let factor = fix_phase(&mut u_k);
            for z in v_k.iter_mut() {
                *z *= factor;
            }
            u_cols.push(u_k);
            v_cols.push(v_k);
        } else {
            sig[k] = 0.0;
            // Numerically zero singular value: complete U with a
            // deterministic unit vector orthogonal to the columns so far.
            u_cols.push(orthonormal_completion(m, &u_cols));
            v_cols.push(v[k].clone());
        }
    }

    Ok(Svd {
        u: ComplexMatrix::from_columns(m, &u_cols),
        s: sig,
        v: ComplexMatrix::from_columns(n, &v_cols),
    })
}

/// Apply the complex Jacobi column transform
/// `[x, y] <- [c*x - s*conj(phase)*y, s*x + c*conj(phase)*y]`.
/// Requires `i < j`.
fn rotate_pair(cols: &mut [Vec<Complex64>], i: usize, j: usize, c: f64, s: f64, phase: Complex64) {
    let pc = phase.conj();
    let (lo, hi) = cols.split_at_mut(j);
    for (xi_ref, xj_ref) in lo[i].iter_mut().zip(hi[0].iter_mut()) {
        let xi = *xi_ref;
        let xj = *xj_ref * pc;
        *xi_ref = xi * c - xj * s;
        *xj_ref = xi * s + xj * c;
    }
}

/// Deterministic unit vector orthogonal to `existing` columns: project the
/// standard basis, keep the candidate with the largest residual.
pub(crate) fn orthonormal_completion(dim: usize, existing: &[Vec<Complex64>]) -> Vec<Complex64> {
    let mut best: Option<(f64, Vec<Complex64>)> = None;
    for i in 0..dim {
        let mut r = vec![Complex64::new(0.0, 0.0); dim];
        r[i] = Complex64::new(1.0, 0.0);
        for u in existing {
            let p = hdot(u, &r);
            for (rr, uu) in r.iter_mut().zip(u.iter()) {
                *rr -= p * uu;
            }
        }
        let nrm = norm2(&r);
        let improves = match &best {
            Some((b, _)) => nrm > *b + 1e-12,
            None => true,
        };
        if improves {
            best = Some((nrm, r));
        }
    }
    let (nrm, mut r) = best.expect("dim >= 1");
    for z in r.iter_mut() {
        *z /= nrm;
    }
    fix_phase(&mut r);
    r
}
