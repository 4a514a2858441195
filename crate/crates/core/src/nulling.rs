//! Interference-nulling beamformer selection.
//!
//! The receive beamformer is the dominant left singular vector of the
//! normalized terrestrial channel. The transmit beamformer is the principal
//! eigenvector of
//!
//! `M = H^H w_r w_r^H H - lambda * sum_j h_j h_j^H`
//!
//! with all channels unit-normalized, trading beamformed gain toward the
//! served UE against leakage toward the satellites through `lambda`.
//!
//! `M` acts on the span of the UE row space and the satellite vectors and
//! vanishes on its orthogonal complement. When that span is smaller than the
//! array (the usual case: at most `n_sat + 1` dimensions), the eigenproblem
//! is solved exactly on the projected matrix, which keeps 32x32 arrays cheap.
//! Both paths go through the same Jacobi eigensolver and agree to roundoff.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::array::ArrayGeometry;
use crate::error::{Error, Result};
use crate::numerics::{eig_hermitian, hdot, norm2, svd, ComplexMatrix};

/// Tolerance on input normalization (`||H||_F = 1`, `||h_j||_2 = 1`).
const NORM_TOL: f64 = 1e-9;
/// Dominant-eigenvalue gap below which the result is flagged degenerate.
const DEGENERACY_TOL: f64 = 1e-10;
/// Floor used when converting zero gains to dB.
pub const GAIN_FLOOR_DB: f64 = -300.0;

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct NullingConfig {
    /// Regularization weight on satellite leakage, `lambda >= 0`.
    pub lambda: f64,
}

/// Unit-norm transmit/receive beamformer pair.
#[derive(Clone, Debug)]
pub struct BeamformerPair {
    pub w_t: ComplexMatrix,
    pub w_r: ComplexMatrix,
    pub lambda_used: f64,
    /// Set when the dominant eigenvalue of `M` is (numerically) tied, in
    /// which case any vector of the dominant eigenspace is returned.
    pub degenerate: bool,
}

/// Solve the nulling trade-off for one slot.
///
/// `h_norm` must have unit Frobenius norm and every satellite vector unit
/// 2-norm; inputs further than `1e-9` from unit norm are rejected.
pub fn solve_nulling(
    h_norm: &ComplexMatrix,
    sat_norm: &[ComplexMatrix],
    cfg: &NullingConfig,
) -> Result<BeamformerPair> {
    if !(cfg.lambda >= 0.0) || !cfg.lambda.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "lambda must be finite and >= 0, got {}",
            cfg.lambda
        )));
    }
    let fro = h_norm.frobenius_norm();
    if (fro - 1.0).abs() > NORM_TOL {
        return Err(Error::NotNormalized(format!("||H||_F = {fro}, expected 1")));
    }
    let n_t = h_norm.cols();
    for (j, h) in sat_norm.iter().enumerate() {
        if h.cols() != 1 || h.rows() != n_t {
            return Err(Error::InvalidDimension(format!(
                "satellite vector {j} must be {n_t}x1"
            )));
        }
        let n = h.vector_norm();
        if (n - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(format!(
                "||h_{j}||_2 = {n}, expected 1"
            )));
        }
    }

    let f = svd(h_norm)?;
    let w_r = f.u.column(0);
    // a = H^H w_r; for lambda = 0 the principal eigenvector of M is a up to
    // scale, which is exactly the dominant right singular vector.
    let hh = h_norm.conj_transpose();
    let a = hh.mul(&ComplexMatrix::col_vector(w_r.clone()))?.column(0);

    let rank_bound = 1 + sat_norm.len();
    let (mut w_t, degenerate) = if rank_bound < n_t {
        principal_eigvec_subspace(&a, sat_norm, cfg.lambda, n_t)?
    } else {
        principal_eigvec_dense(&a, sat_norm, cfg.lambda, n_t)?
    };

    let nrm = norm2(&w_t);
    for z in w_t.iter_mut() {
        *z /= nrm;
    }
    fix_phase_vec(&mut w_t);

    Ok(BeamformerPair {
        w_t: ComplexMatrix::col_vector(w_t),
        w_r: ComplexMatrix::col_vector(w_r),
        lambda_used: cfg.lambda,
        degenerate,
    })
}

fn fix_phase_vec(v: &mut [Complex64]) {
    let mut best = 0usize;
    let mut best_mag = 0.0;
    for (i, z) in v.iter().enumerate() {
        if z.norm() > best_mag {
            best_mag = z.norm();
            best = i;
        }
    }
    if best_mag > 0.0 {
        let f = v[best].conj() / best_mag;
        for z in v.iter_mut() {
            *z *= f;
        }
    }
}

/// Dense route: form `M` explicitly and take the top eigenvector.
fn principal_eigvec_dense(
    a: &[Complex64],
    sats: &[ComplexMatrix],
    lambda: f64,
    n_t: usize,
) -> Result<(Vec<Complex64>, bool)> {
    let mut m = ComplexMatrix::outer(a, a);
    for h in sats {
        let hh = ComplexMatrix::outer(h.as_slice(), h.as_slice());
        m = m.sub(&hh.scaled(Complex64::new(lambda, 0.0)))?;
    }
    let e = eig_hermitian(&m)?;
    let degenerate =
        n_t > 1 && (e.l[0] - e.l[1]).abs() < DEGENERACY_TOL * m.frobenius_norm().max(1.0);
    Ok((e.q.column(0), degenerate))
}

/// Subspace route: orthonormalize `[a, h_1, .., h_J]`, solve the projected
/// eigenproblem, and lift. Exact because `M x = 0` for `x` orthogonal to the
/// span. If every in-span eigenvalue is negative the dominant eigenvalue of
/// `M` is 0 and any unit vector of the orthogonal complement attains it; a
/// deterministic one is returned and the result flagged degenerate.
fn principal_eigvec_subspace(
    a: &[Complex64],
    sats: &[ComplexMatrix],
    lambda: f64,
    n_t: usize,
) -> Result<(Vec<Complex64>, bool)> {
    // Modified Gram-Schmidt with re-orthogonalization; drop dependent vectors.
    let mut basis: Vec<Vec<Complex64>> = Vec::with_capacity(1 + sats.len());
    let push = |v: &[Complex64], basis: &mut Vec<Vec<Complex64>>| {
        let mut r = v.to_vec();
        for _ in 0..2 {
            for b in basis.iter() {
                let p = hdot(b, &r);
                for (ri, bi) in r.iter_mut().zip(b.iter()) {
                    *ri -= p * bi;
                }
            }
        }
        let nrm = norm2(&r);
        if nrm > 1e-12 {
            for z in r.iter_mut() {
                *z /= nrm;
            }
            basis.push(r);
        }
    };
    push(a, &mut basis);
    for h in sats {
        push(h.as_slice(), &mut basis);
    }
    let r = basis.len();

    // Projected matrix M_r = (Q^H a)(Q^H a)^H - lambda sum (Q^H h)(Q^H h)^H.
    let project =
        |v: &[Complex64]| -> Vec<Complex64> { basis.iter().map(|b| hdot(b, v)).collect() };
    let pa = project(a);
    let mut m_r = ComplexMatrix::outer(&pa, &pa);
    for h in sats {
        let ph = project(h.as_slice());
        let hh = ComplexMatrix::outer(&ph, &ph);
        m_r = m_r.sub(&hh.scaled(Complex64::new(lambda, 0.0)))?;
    }
    let e = eig_hermitian(&m_r)?;
    let scale = m_r.frobenius_norm().max(1.0);
    let mu = e.l[0];

    if mu > DEGENERACY_TOL * scale {
        // Lift the projected eigenvector back to the full space.
        let q1 = e.q.column(0);
        let mut w = vec![Complex64::new(0.0, 0.0); n_t];
        for (coef, b) in q1.iter().zip(basis.iter()) {
            for (wi, bi) in w.iter_mut().zip(b.iter()) {
                *wi += coef * bi;
            }
        }
        let gap_degenerate = r > 1 && (e.l[0] - e.l[1]).abs() < DEGENERACY_TOL * scale;
        // The complement contributes eigenvalue 0; a positive top eigenvalue
        // can only tie with it up to the same tolerance.
        Ok((w, gap_degenerate || mu < DEGENERACY_TOL * scale))
    } else {
        // Dominant eigenvalue of M is 0: pick the standard basis vector with
        // the largest component outside the span, orthogonalized.
        let mut best_norm = -1.0;
        let mut best_r = Vec::new();
        for i in 0..n_t {
            let mut res = vec![Complex64::new(0.0, 0.0); n_t];
            res[i] = Complex64::new(1.0, 0.0);
            for b in &basis {
                let p = hdot(b, &res);
                for (ri, bi) in res.iter_mut().zip(b.iter()) {
                    *ri -= p * bi;
                }
            }
            let nrm = norm2(&res);
            if nrm > best_norm + 1e-12 {
                best_norm = nrm;
                best_r = res;
            }
        }
        Ok((best_r, true))
    }
}

/// `10 log10(|w_r^H H w_t|^2)`; exact zeros are floored at -300 dB.
pub fn beamformed_gain_db(pair: &BeamformerPair, h: &ComplexMatrix) -> f64 {
    let hw = h
        .mul(&pair.w_t)
        .expect("dimension mismatch in beamformed_gain");
    let g = hdot(pair.w_r.as_slice(), hw.as_slice()).norm_sqr();
    if g <= 0.0 {
        GAIN_FLOOR_DB
    } else {
        (10.0 * g.log10()).max(GAIN_FLOOR_DB)
    }
}

/// Transmit array-factor gain toward a local direction:
/// `10 log10(N |e(theta, phi)^H w_t|^2)`.
pub fn tx_array_gain_db(
    w_t: &ComplexMatrix,
    geom: &ArrayGeometry,
    theta_deg: f64,
    phi_deg: f64,
) -> f64 {
    let e = geom.steering_vector(theta_deg, phi_deg);
    let g = geom.n_elements() as f64 * hdot(e.as_slice(), w_t.as_slice()).norm_sqr();
    if g <= 0.0 {
        GAIN_FLOOR_DB
    } else {
        (10.0 * g.log10()).max(GAIN_FLOOR_DB)
    }
}

/// Beamforming-gain map over an angular grid, in dB.
#[derive(Clone, Debug)]
pub struct GainMap {
    pub theta_deg: Vec<f64>,
    pub phi_deg: Vec<f64>,
    /// Row-major `theta x phi`.
    pub gain_db: Vec<f64>,
}

impl GainMap {
    pub fn at(&self, ti: usize, pi: usize) -> f64 {
        self.gain_db[ti * self.phi_deg.len() + pi]
    }

    /// CSV rows `theta_deg,phi_deg,gain_db`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("theta_deg,phi_deg,gain_db\n");
        for (ti, t) in self.theta_deg.iter().enumerate() {
            for (pi, p) in self.phi_deg.iter().enumerate() {
                out.push_str(&format!("{:.3},{:.3},{:.6}\n", t, p, self.at(ti, pi)));
            }
        }
        out
    }
}

pub fn gain_map(
    pair: &BeamformerPair,
    geom: &ArrayGeometry,
    theta_grid_deg: &[f64],
    phi_grid_deg: &[f64],
) -> Result<GainMap> {
    if theta_grid_deg.is_empty() || phi_grid_deg.is_empty() {
        return Err(Error::InvalidArgument("gain map grid is empty".into()));
    }
    let mut gain_db = Vec::with_capacity(theta_grid_deg.len() * phi_grid_deg.len());
    for &t in theta_grid_deg {
        for &p in phi_grid_deg {
            gain_db.push(tx_array_gain_db(&pair.w_t, geom, t, p));
        }
    }
    Ok(GainMap {
        theta_deg: theta_grid_deg.to_vec(),
        phi_deg: phi_grid_deg.to_vec(),
        gain_db,
    })
}

/// Mean linear leakage toward the satellite directions expressed as an
/// array-factor gain in dB: `10 log10(mean_j N |e_j^H w_t|^2)`.
pub fn mean_leakage_gain_db(
    w_t: &ComplexMatrix,
    geom: &ArrayGeometry,
    sat_local: &[(f64, f64)],
) -> f64 {
    if sat_local.is_empty() {
        return GAIN_FLOOR_DB;
    }
    let n = geom.n_elements() as f64;
    let mean: f64 = sat_local
        .iter()
        .map(|&(t, p)| {
            let e = geom.steering_vector(t, p);
            n * hdot(e.as_slice(), w_t.as_slice()).norm_sqr()
        })
        .sum::<f64>()
        / sat_local.len() as f64;
    if mean <= 0.0 {
        GAIN_FLOOR_DB
    } else {
        (10.0 * mean.log10()).max(GAIN_FLOOR_DB)
    }
}
