//! Run evaluation: RSS degradation, Jain's fairness index, INR percentiles
//! and power savings.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{hdot, ComplexMatrix};

/// Ceiling used when the degraded beamformer zeroes the link entirely.
pub const RSS_CEIL_DB: f64 = 300.0;

/// Per-slot outputs of one scheduled link.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SlotRecord {
    pub slot: usize,
    pub ue_id: usize,
    pub lambda: f64,
    pub p_selected_dbm: f64,
    pub beamformed_gain_db: f64,
    pub rss_degradation_db: f64,
    pub inr_per_sat_db: Vec<f64>,
    pub degeneracy_flag: bool,
    pub infeasible_flag: bool,
}

impl SlotRecord {
    pub fn worst_inr_db(&self) -> f64 {
        self.inr_per_sat_db
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Received-signal-strength loss of the degraded strategy against the
/// full-power, zero-regularization reference on the same channel:
/// `10 log10((P_max |w^H H w_ref|^2) / (P_hat |w^H H w_hat|^2))`, powers in
/// linear mW. Tiny negatives from eigensolver roundoff clamp to zero.
pub fn rss_degradation_db(
    p_max_dbm: f64,
    w_t_ref: &ComplexMatrix,
    p_hat_dbm: f64,
    w_t_hat: &ComplexMatrix,
    w_ue: &ComplexMatrix,
    h_ter: &ComplexMatrix,
) -> f64 {
    let num_bf = {
        let hw = h_ter.mul(w_t_ref).expect("reference beamformer shape");
        hdot(w_ue.as_slice(), hw.as_slice()).norm_sqr()
    };
    let den_bf = {
        let hw = h_ter.mul(w_t_hat).expect("actual beamformer shape");
        hdot(w_ue.as_slice(), hw.as_slice()).norm_sqr()
    };
    let num = 10f64.powf(p_max_dbm / 10.0) * num_bf;
    let den = 10f64.powf(p_hat_dbm / 10.0) * den_bf;
    if den <= 0.0 {
        return RSS_CEIL_DB;
    }
    let d = 10.0 * (num / den).log10();
    if d < 0.0 {
        0.0
    } else {
        d.min(RSS_CEIL_DB)
    }
}

/// Jain's fairness index `(sum v)^2 / (K sum v^2)`. An all-zero vector is
/// the no-degradation case and reports perfect fairness; the flag marks
/// that convention was used.
pub fn jain_index(values: &[f64]) -> (f64, bool) {
    let k = values.len() as f64;
    let sum: f64 = values.iter().sum();
    let sum_sq: f64 = values.iter().map(|v| v * v).sum();
    if sum_sq == 0.0 {
        return (1.0, true);
    }
    (sum * sum / (k * sum_sq), false)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunSummary {
    /// Mean degradation per UE (dB), indexed by UE id.
    pub per_ue_mean_drss_db: Vec<f64>,
    pub jfi: f64,
    /// Set when the JFI came from the all-zero convention.
    pub jfi_all_zero: bool,
    /// Largest per-slot degradation across the run (dB).
    pub worst_case_rss_db: f64,
    /// Population standard deviation over the per-UE means (dB).
    pub rss_std_db: f64,
    pub inr_p5_db: Option<f64>,
    pub inr_p25_db: Option<f64>,
    pub inr_median_db: Option<f64>,
    pub inr_p75_db: Option<f64>,
    pub inr_p95_db: Option<f64>,
    /// `100 (1 - mean(P_hat) / P_max)` with powers in linear mW.
    pub power_decrease_pct: f64,
    /// Energy saved over the run; equals the power decrease under
    /// equal-duration slots.
    pub energy_saved_pct: f64,
    pub n_records: usize,
    pub n_infeasible_slots: usize,
    pub n_degenerate_slots: usize,
}

/// Linear-interpolation percentile of a sorted sample, `q` in [0, 100].
pub fn percentile_linear(sorted: &[f64], q: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let rank = q / 100.0 * (n - 1) as f64;
    let lo = rank.floor() as usize;
    let hi = rank.ceil() as usize;
    let frac = rank - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

/// Aggregate a run. Requires every UE id in `0..k` to appear in the records;
/// degradations are clamped at 0 dB before entering the fairness index.
pub fn summarize(records: &[SlotRecord], k: usize, p_max_dbm: f64) -> Result<RunSummary> {
    if records.is_empty() {
        return Err(Error::EmptyRun);
    }
    let mut per_ue_sum = vec![0.0f64; k];
    let mut per_ue_count = vec![0usize; k];
    let mut worst = 0.0f64;
    let mut inr_pool = Vec::new();
    let mut p_lin_sum = 0.0f64;
    let mut n_infeasible = 0;
    let mut n_degenerate = 0;
    for r in records {
        if r.ue_id >= k {
            return Err(Error::InvalidArgument(format!(
                "record for UE {} but K = {k}",
                r.ue_id
            )));
        }
        let d = r.rss_degradation_db.max(0.0);
        per_ue_sum[r.ue_id] += d;
        per_ue_count[r.ue_id] += 1;
        worst = worst.max(d);
        inr_pool.extend_from_slice(&r.inr_per_sat_db);
        p_lin_sum += 10f64.powf(r.p_selected_dbm / 10.0);
        n_infeasible += r.infeasible_flag as usize;
        n_degenerate += r.degeneracy_flag as usize;
    }
    if let Some(ue) = per_ue_count.iter().position(|&c| c == 0) {
        return Err(Error::InvalidArgument(format!(
            "UE {ue} never appears in the records"
        )));
    }

    let per_ue_mean: Vec<f64> = per_ue_sum
        .iter()
        .zip(per_ue_count.iter())
        .map(|(s, &c)| s / c as f64)
        .collect();
    let (jfi, jfi_all_zero) = jain_index(&per_ue_mean);
    let mean_of_means = per_ue_mean.iter().sum::<f64>() / k as f64;
    let rss_std = (per_ue_mean
        .iter()
        .map(|m| (m - mean_of_means).powi(2))
        .sum::<f64>()
        / k as f64)
        .sqrt();

    inr_pool.sort_by(|a, b| a.total_cmp(b));
    let pct = |q: f64| -> Option<f64> {
        if inr_pool.is_empty() {
            None
        } else {
            Some(percentile_linear(&inr_pool, q))
        }
    };

    let mean_p_lin = p_lin_sum / records.len() as f64;
    let p_max_lin = 10f64.powf(p_max_dbm / 10.0);
    // Selected powers never exceed p_max; clamp roundoff-level negatives.
    let power_decrease_pct = (100.0 * (1.0 - mean_p_lin / p_max_lin)).max(0.0);

    Ok(RunSummary {
        per_ue_mean_drss_db: per_ue_mean,
        jfi,
        jfi_all_zero,
        worst_case_rss_db: worst,
        rss_std_db: rss_std,
        inr_p5_db: pct(5.0),
        inr_p25_db: pct(25.0),
        inr_median_db: pct(50.0),
        inr_p75_db: pct(75.0),
        inr_p95_db: pct(95.0),
        power_decrease_pct,
        energy_saved_pct: power_decrease_pct,
        n_records: records.len(),
        n_infeasible_slots: n_infeasible,
        n_degenerate_slots: n_degenerate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::array::ArrayGeometry;
    use approx::assert_relative_eq;
    use num_complex::Complex64;
    use proptest::prelude::{prop_assert, proptest};

    fn record(slot: usize, ue: usize, drss: f64) -> SlotRecord {
        SlotRecord {
            slot,
            ue_id: ue,
            lambda: 0.0,
            p_selected_dbm: 33.0,
            beamformed_gain_db: -60.0,
            rss_degradation_db: drss,
            inr_per_sat_db: vec![-20.0 - slot as f64],
            degeneracy_flag: false,
            infeasible_flag: false,
        }
    }

    #[test]
    fn identical_strategy_zero_degradation() {
        let g = ArrayGeometry::new(4, 4);
        let e = g.steering_vector(80.0, 5.0);
        let r = ArrayGeometry::new(2, 1).steering_vector(90.0, 0.0);
        let h = ComplexMatrix::outer(r.as_slice(), e.as_slice());
        let d = rss_degradation_db(33.0, &e, 33.0, &e, &r, &h);
        assert_relative_eq!(d, 0.0, epsilon = 1e-9);
    }

    #[test]
    fn power_only_reduces_to_power_ratio() {
        let g = ArrayGeometry::new(4, 4);
        let e = g.steering_vector(80.0, 5.0);
        let r = ArrayGeometry::new(2, 1).steering_vector(90.0, 0.0);
        let h = ComplexMatrix::outer(r.as_slice(), e.as_slice());
        let d = rss_degradation_db(33.0, &e, 26.4, &e, &r, &h);
        // Same beamformer: 33 - 26.4 = 6.6 dB, the published median cost.
        assert_relative_eq!(d, 6.6, epsilon = 1e-9);
    }

    #[test]
    fn zero_denominator_clamps_high() {
        let mut w_ref = vec![Complex64::new(0.0, 0.0); 4];
        w_ref[0] = Complex64::new(1.0, 0.0);
        let mut w_hat = vec![Complex64::new(0.0, 0.0); 4];
        w_hat[1] = Complex64::new(1.0, 0.0);
        let mut h = ComplexMatrix::zeros(1, 4);
        h.set(0, 0, Complex64::new(1.0, 0.0));
        let w_ue = ComplexMatrix::col_vector(vec![Complex64::new(1.0, 0.0)]);
        let d = rss_degradation_db(
            33.0,
            &ComplexMatrix::col_vector(w_ref),
            33.0,
            &ComplexMatrix::col_vector(w_hat),
            &w_ue,
            &h,
        );
        assert_relative_eq!(d, RSS_CEIL_DB);
    }

    #[test]
    fn jain_equal_is_one() {
        let (j, flag) = jain_index(&[2.5; 30]);
        assert_relative_eq!(j, 1.0, epsilon = 1e-15);
        assert!(!flag);
    }

    #[test]
    fn jain_one_hot_is_one_over_k() {
        let mut v = vec![0.0; 30];
        v[7] = 20.0;
        let (j, _) = jain_index(&v);
        assert_relative_eq!(j, 1.0 / 30.0, epsilon = 1e-15);
    }

    #[test]
    fn jain_two_values() {
        let (j, _) = jain_index(&[1.0, 3.0]);
        assert_relative_eq!(j, 0.8, epsilon = 1e-15);
    }

    #[test]
    fn jain_all_zero_convention() {
        let (j, flag) = jain_index(&[0.0; 5]);
        assert_relative_eq!(j, 1.0);
        assert!(flag);
    }

    proptest! {
        #[test]
        fn jain_scale_invariant(scale in 1e-6f64..1e6, n in 1usize..40, seed in 0u64..500) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let v: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() + 1e-3).collect();
            let scaled: Vec<f64> = v.iter().map(|x| x * scale).collect();
            let (a, _) = jain_index(&v);
            let (b, _) = jain_index(&scaled);
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn summarize_single_ue_constant() {
        let records: Vec<SlotRecord> = (0..10).map(|s| record(s, 0, 4.0)).collect();
        let s = summarize(&records, 1, 33.0).unwrap();
        assert_relative_eq!(s.per_ue_mean_drss_db[0], 4.0);
        assert_relative_eq!(s.worst_case_rss_db, 4.0);
        assert_relative_eq!(s.rss_std_db, 0.0);
        assert_relative_eq!(s.jfi, 1.0);
        assert_relative_eq!(s.power_decrease_pct, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn summarize_one_hot_ue() {
        let mut records = Vec::new();
        for ue in 0..30 {
            records.push(record(ue, ue, if ue == 3 { 20.0 } else { 0.0 }));
        }
        let s = summarize(&records, 30, 33.0).unwrap();
        assert_relative_eq!(s.jfi, 1.0 / 30.0, epsilon = 1e-15);
    }

    #[test]
    fn summarize_permutation_invariant() {
        let mut records: Vec<SlotRecord> = (0..12).map(|s| record(s, s % 3, s as f64)).collect();
        let a = summarize(&records, 3, 33.0).unwrap();
        records.reverse();
        let b = summarize(&records, 3, 33.0).unwrap();
        assert_eq!(a.per_ue_mean_drss_db, b.per_ue_mean_drss_db);
        assert_eq!(a.inr_median_db, b.inr_median_db);
        assert_eq!(a.jfi, b.jfi);
    }

    #[test]
    fn summarize_requires_every_ue() {
        let records = vec![record(0, 0, 1.0)];
        assert!(summarize(&records, 2, 33.0).is_err());
    }

    #[test]
    fn summarize_empty_rejected() {
        assert!(matches!(summarize(&[], 1, 33.0), Err(Error::EmptyRun)));
    }

    #[test]
    fn percentile_interpolates() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_relative_eq!(percentile_linear(&v, 0.0), 1.0);
        assert_relative_eq!(percentile_linear(&v, 100.0), 4.0);
        assert_relative_eq!(percentile_linear(&v, 50.0), 2.5);
        assert_relative_eq!(percentile_linear(&v, 25.0), 1.75);
    }

    #[test]
    fn percentiles_monotone_in_summary() {
        let records: Vec<SlotRecord> = (0..20).map(|s| record(s, 0, 1.0)).collect();
        let s = summarize(&records, 1, 33.0).unwrap();
        let ps = [
            s.inr_p5_db.unwrap(),
            s.inr_p25_db.unwrap(),
            s.inr_median_db.unwrap(),
            s.inr_p75_db.unwrap(),
            s.inr_p95_db.unwrap(),
        ];
        for w in ps.windows(2) {
            assert!(w[0] <= w[1]);
        }
    }

    #[test]
    fn power_decrease_uses_linear_mean() {
        // Half the slots at full power, half 10 dB down:
        // mean linear = (1 + 0.1)/2 of max -> 45% decrease.
        let mut records = Vec::new();
        for s in 0..10 {
            let mut r = record(s, 0, 0.0);
            r.p_selected_dbm = if s % 2 == 0 { 33.0 } else { 23.0 };
            records.push(r);
        }
        let s = summarize(&records, 1, 33.0).unwrap();
        assert_relative_eq!(s.power_decrease_pct, 45.0, epsilon = 1e-9);
        assert_relative_eq!(s.energy_saved_pct, 45.0, epsilon = 1e-9);
    }
}
