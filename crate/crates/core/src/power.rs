//! QoS-aware transmit power selection.
//!
//! The link equations: SINR is linear in transmit power, rate is the Shannon
//! capacity, and the utility is a sigmoid-over-power trade-off
//! `W (1 - exp(-alpha SINR))^M / P` that peaks at a finite power. The
//! constrained problem maximizes the utility subject to a rate floor
//! (fraction `epsilon` of the rate at full power), a per-satellite INR cap
//! and the hardware power bounds.
//!
//! Both constraints are monotone in power, so they reduce to a closed-form
//! feasible interval; the utility is unimodal on it, and a golden-section
//! search (0.01 dB tolerance) finds the maximizer.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{hdot, ComplexMatrix};

/// Boltzmann constant (J/K).
pub const BOLTZMANN_J_PER_K: f64 = 1.380_649e-23;
/// dB floor standing in for minus infinity on exact nulls.
pub const INR_FLOOR_DB: f64 = -300.0;
/// Golden-section termination width on the dBm axis.
pub const SEARCH_TOL_DB: f64 = 0.01;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PowerControlContext {
    pub bandwidth_hz: f64,
    /// Aggregate inter-cell interference plus noise (dBm).
    pub interference_plus_noise_dbm: f64,
    /// Sigmoid slope parameter.
    pub alpha: f64,
    /// Sigmoid exponent; values above 1 give an interior utility peak.
    pub m_exp: f64,
    /// Rate floor as a fraction of the full-power rate, in (0, 1].
    pub epsilon: f64,
    /// Per-satellite INR cap (dB).
    pub inr_max_db: f64,
    pub p_min_dbm: f64,
    pub p_max_dbm: f64,
    /// Satellite receive figure of merit (dB/K); carries the dish gain.
    pub g_over_t_db: f64,
    /// Atmospheric and scintillation losses (dB).
    pub atmospheric_loss_db: f64,
}

impl PowerControlContext {
    pub fn validate(&self) -> Result<()> {
        if !(self.p_min_dbm < self.p_max_dbm) {
            return Err(Error::InvalidArgument(format!(
                "p_min ({}) must be below p_max ({})",
                self.p_min_dbm, self.p_max_dbm
            )));
        }
        if !(self.epsilon > 0.0 && self.epsilon <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "epsilon must be in (0, 1], got {}",
                self.epsilon
            )));
        }
        if !(self.bandwidth_hz > 0.0) {
            return Err(Error::InvalidArgument("bandwidth must be positive".into()));
        }
        if !(self.alpha > 0.0) {
            return Err(Error::InvalidArgument("alpha must be positive".into()));
        }
        if !(self.m_exp >= 1.0) {
            return Err(Error::InvalidArgument("m_exp must be >= 1".into()));
        }
        Ok(())
    }

    /// Constant part of the INR budget: `G/T - L_a - 10 log10(k_B W)`, with
    /// the noise term referenced to milliwatts so it composes with dBm power.
    fn inr_budget_const_db(&self) -> f64 {
        self.g_over_t_db
            - self.atmospheric_loss_db
            - 10.0 * (BOLTZMANN_J_PER_K * self.bandwidth_hz * 1e3).log10()
    }
}

/// Which boundary of the feasible interval (if any) pinned the decision.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BindingConstraint {
    UtilityPeak,
    RateFloor,
    InrCap,
    PMin,
    PMax,
}

#[derive(Clone, Debug)]
pub struct PowerDecision {
    pub p_opt_dbm: f64,
    /// Utility at the optimum (bit/s per mW).
    pub utility_at_opt: f64,
    pub rate_at_opt_bps: f64,
    pub inr_per_satellite_db: Vec<f64>,
    pub binding_constraint: BindingConstraint,
}

/// Linear SINR at transmit power `p` (dBm) for a beamformed channel gain in
/// dB: `10^((p + gain - I_ter)/10)`.
pub fn sinr(p_dbm: f64, gain_db: f64, ctx: &PowerControlContext) -> f64 {
    10f64.powf((p_dbm + gain_db - ctx.interference_plus_noise_dbm) / 10.0)
}

/// Shannon rate `W log2(1 + SINR)` in bit/s.
pub fn rate_bps(p_dbm: f64, gain_db: f64, ctx: &PowerControlContext) -> f64 {
    ctx.bandwidth_hz * (1.0 + sinr(p_dbm, gain_db, ctx)).log2()
}

/// Sigmoidal utility `W (1 - exp(-alpha SINR))^M / P_mW` in bit/s per mW.
pub fn utility(p_dbm: f64, gain_db: f64, ctx: &PowerControlContext) -> f64 {
    let p_mw = 10f64.powf(p_dbm / 10.0);
    let s = sinr(p_dbm, gain_db, ctx);
    ctx.bandwidth_hz * (1.0 - (-ctx.alpha * s).exp()).powf(ctx.m_exp) / p_mw
}

/// Leakage gain `10 log10(|w_t^H h_sat|^2)` with a -300 dB floor on exact
/// nulls.
pub fn leakage_gain_db(w_t: &ComplexMatrix, h_sat: &ComplexMatrix) -> f64 {
    let g = hdot(w_t.as_slice(), h_sat.as_slice()).norm_sqr();
    if g <= 0.0 {
        INR_FLOOR_DB
    } else {
        (10.0 * g.log10()).max(INR_FLOOR_DB)
    }
}

/// Interference-to-noise ratio at one satellite (dB):
/// `p + 10 log10(|w_t^H h|^2) + G/T - L_a - 10 log10(k_B W)`, with the
/// channel vector carrying path loss and the dish gain folded into G/T.
pub fn inr_db(
    p_dbm: f64,
    w_t: &ComplexMatrix,
    h_sat: &ComplexMatrix,
    ctx: &PowerControlContext,
) -> f64 {
    let leak = leakage_gain_db(w_t, h_sat);
    if leak <= INR_FLOOR_DB {
        return INR_FLOOR_DB;
    }
    (p_dbm + leak + ctx.inr_budget_const_db()).max(INR_FLOOR_DB)
}

/// Closed-form power floor enforcing `rate(p) >= epsilon * rate(p_max)`.
/// Returns negative infinity when the floor is vacuous.
pub fn rate_floor_dbm(gain_db: f64, ctx: &PowerControlContext) -> f64 {
    let s_max = sinr(ctx.p_max_dbm, gain_db, ctx);
    let s_floor = (1.0 + s_max).powf(ctx.epsilon) - 1.0;
    if s_floor <= 0.0 {
        return f64::NEG_INFINITY;
    }
    ctx.p_max_dbm + 10.0 * (s_floor / s_max).log10()
}

/// Closed-form power cap enforcing `INR_j(p) <= INR_max` for every
/// satellite. Returns positive infinity when no satellite constrains power.
pub fn inr_cap_dbm(
    w_t: &ComplexMatrix,
    sat_channels: &[ComplexMatrix],
    ctx: &PowerControlContext,
) -> f64 {
    let c = ctx.inr_budget_const_db();
    sat_channels
        .iter()
        .map(|h| {
            let leak = leakage_gain_db(w_t, h);
            if leak <= INR_FLOOR_DB {
                f64::INFINITY
            } else {
                ctx.inr_max_db - leak - c
            }
        })
        .fold(f64::INFINITY, f64::min)
}

/// Solve the constrained power problem for one scheduled link.
pub fn solve_power(
    gain_db: f64,
    w_t: &ComplexMatrix,
    sat_channels: &[ComplexMatrix],
    ctx: &PowerControlContext,
) -> Result<PowerDecision> {
    ctx.validate()?;
    let p_rate = rate_floor_dbm(gain_db, ctx);
    let p_inr = inr_cap_dbm(w_t, sat_channels, ctx);
    let lo = p_rate.max(ctx.p_min_dbm);
    let hi = p_inr.min(ctx.p_max_dbm);
    if lo > hi {
        return Err(Error::InfeasibleLink {
            p_rate_dbm: lo,
            p_inr_dbm: hi,
        });
    }

    let f = |p: f64| utility(p, gain_db, ctx);
    let p_opt = golden_section_max(f, lo, hi, SEARCH_TOL_DB);

    let tol = 2.0 * SEARCH_TOL_DB;
    let binding = if p_opt <= lo + tol && lo > ctx.p_min_dbm {
        BindingConstraint::RateFloor
    } else if p_opt <= lo + tol && lo == ctx.p_min_dbm && f(lo) >= f(lo + tol) {
        BindingConstraint::PMin
    } else if p_opt >= hi - tol && hi < ctx.p_max_dbm {
        BindingConstraint::InrCap
    } else if p_opt >= hi - tol && f(hi) >= f(hi - tol) {
        BindingConstraint::PMax
    } else {
        BindingConstraint::UtilityPeak
    };

    Ok(PowerDecision {
        p_opt_dbm: p_opt,
        utility_at_opt: f(p_opt),
        rate_at_opt_bps: rate_bps(p_opt, gain_db, ctx),
        inr_per_satellite_db: sat_channels
            .iter()
            .map(|h| inr_db(p_opt, w_t, h, ctx))
            .collect(),
        binding_constraint: binding,
    })
}

/// Golden-section maximization of a unimodal function on `[a, b]`.
pub fn golden_section_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    if b - a <= tol {
        let mid = 0.5 * (a + b);
        return [a, mid, b]
            .into_iter()
            .max_by(|x, y| f(*x).partial_cmp(&f(*y)).unwrap())
            .unwrap();
    }
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while b - a > tol {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        }
    }
    0.5 * (a + b)
}
