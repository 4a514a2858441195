//! LOS link budgets and per-slot channel construction.
//!
//! Every link is a deterministic line-of-sight channel: a rank-1 outer
//! product of the receive and transmit steering vectors, scaled by the
//! free-space amplitude and a carrier-phase term. Satellite channels carry
//! path loss only; the satellite dish gain enters the interference budget
//! through the receiver's G/T figure instead.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use crate::array::ArrayGeometry;
use crate::error::{Error, Result};
use crate::numerics::ComplexMatrix;
use crate::orbits::SatelliteState;

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Free-space path loss `20 log10(4 pi d f / c)` in dB.
pub fn fspl_db(range_m: f64, carrier_hz: f64) -> f64 {
    20.0 * (4.0 * std::f64::consts::PI * range_m * carrier_hz / SPEED_OF_LIGHT).log10()
}

/// Per-element radiation pattern applied as a scalar amplitude on each link.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum ElementPattern {
    Isotropic,
    /// Cosine-power rolloff about the array normal with a gain floor 30 dB
    /// below the peak.
    CosinePower {
        exponent: f64,
        peak_gain_dbi: f64,
    },
}

impl ElementPattern {
    /// Element gain (dB) toward a local array direction.
    pub fn gain_db(&self, theta_deg: f64, phi_deg: f64) -> f64 {
        match *self {
            ElementPattern::Isotropic => 0.0,
            ElementPattern::CosinePower {
                exponent,
                peak_gain_dbi,
            } => {
                let theta = theta_deg.to_radians();
                let phi = phi_deg.to_radians();
                // Cosine of the angle off the array normal.
                let ca = (theta.sin() * phi.cos()).max(0.0);
                let rolloff = if ca > 0.0 {
                    (20.0 * exponent * ca.log10()).max(-30.0)
                } else {
                    -30.0
                };
                peak_gain_dbi + rolloff
            }
        }
    }
}

/// Build `H = g * e_rx e_tx^H` for a LOS link, scaled so every matrix entry
/// carries the per-element path amplitude `10^((-FSPL + extra_gain_db)/20)`
/// (hence `||H||_F` is that amplitude times `sqrt(N_r N_t)`). The common
/// phase is `2 pi range / wavelength`.
#[allow(clippy::too_many_arguments)]
pub fn los_channel(
    tx: &ArrayGeometry,
    rx: &ArrayGeometry,
    tx_elevation_deg: f64,
    tx_azimuth_deg: f64,
    rx_elevation_deg: f64,
    rx_azimuth_deg: f64,
    range_m: f64,
    carrier_hz: f64,
    extra_gain_db: f64,
) -> Result<ComplexMatrix> {
    if !(range_m > 0.0) {
        return Err(Error::DegenerateGeometry(format!(
            "LOS link requires positive range, got {range_m}"
        )));
    }
    let amp_db = -fspl_db(range_m, carrier_hz) + extra_gain_db;
    let amp = 10f64.powf(amp_db / 20.0) * ((tx.n_elements() * rx.n_elements()) as f64).sqrt();
    let wavelength = SPEED_OF_LIGHT / carrier_hz;
    let g = Complex64::from_polar(amp, TAU * range_m / wavelength);
    let e_tx = tx.steering_vector_site(tx_elevation_deg, tx_azimuth_deg);
    let e_rx = rx.steering_vector_site(rx_elevation_deg, rx_azimuth_deg);
    Ok(ComplexMatrix::outer(e_rx.as_slice(), e_tx.as_slice()).scaled(g))
}

/// Static cell geometry: the gNB array, the UE array template and the
/// placement disc.
#[derive(Clone, Debug)]
pub struct CellGeometry {
    pub gnb_array: ArrayGeometry,
    pub ue_n_az: usize,
    pub ue_n_el: usize,
    pub gnb_height_m: f64,
    pub ue_height_m: f64,
    pub cell_radius_m: f64,
    pub min_distance_m: f64,
    pub sector_width_deg: f64,
    pub carrier_hz: f64,
    pub element_pattern: ElementPattern,
}

/// A UE drawn inside the sector, with look angles precomputed from the
/// tower geometry.
#[derive(Clone, Debug)]
pub struct UePlacement {
    pub east_m: f64,
    pub north_m: f64,
    pub range_m: f64,
    /// Elevation/azimuth of the UE as seen from the gNB (site frame).
    pub elevation_from_gnb_deg: f64,
    pub azimuth_from_gnb_deg: f64,
    /// Elevation/azimuth of the gNB as seen from the UE.
    pub elevation_from_ue_deg: f64,
    pub azimuth_from_ue_deg: f64,
}

/// Draw `k` UEs uniformly over the sector annulus
/// `[min_distance, cell_radius]` around the gNB boresight azimuth.
pub fn place_ues(cell: &CellGeometry, k: usize, rng: &mut impl Rng) -> Vec<UePlacement> {
    let r2_min = cell.min_distance_m * cell.min_distance_m;
    let r2_max = cell.cell_radius_m * cell.cell_radius_m;
    (0..k)
        .map(|_| {
            let r = (r2_min + rng.gen::<f64>() * (r2_max - r2_min)).sqrt();
            let az =
                cell.gnb_array.boresight_az_deg + (rng.gen::<f64>() - 0.5) * cell.sector_width_deg;
            let east = r * az.to_radians().sin();
            let north = r * az.to_radians().cos();
            let dz = cell.ue_height_m - cell.gnb_height_m;
            let range = (r * r + dz * dz).sqrt();
            let elev_gnb = (dz / range).asin().to_degrees();
            UePlacement {
                east_m: east,
                north_m: north,
                range_m: range,
                elevation_from_gnb_deg: elev_gnb,
                azimuth_from_gnb_deg: az,
                elevation_from_ue_deg: -elev_gnb,
                azimuth_from_ue_deg: az + 180.0,
            }
        })
        .collect()
}

impl CellGeometry {
    /// UE array oriented toward the gNB, no tilt.
    pub fn ue_array(&self, ue: &UePlacement) -> ArrayGeometry {
        ArrayGeometry {
            n_az: self.ue_n_az,
            n_el: self.ue_n_el,
            element_spacing_wl: self.gnb_array.element_spacing_wl,
            boresight_az_deg: ue.azimuth_from_ue_deg,
            downtilt_deg: 0.0,
        }
    }
}

/// Per-slot channel bundle: one terrestrial matrix per UE, one channel
/// vector per visible satellite, plus unit-norm copies of both.
#[derive(Clone, Debug)]
pub struct ChannelSet {
    pub slot: usize,
    /// `N_r x N_t` physical channel per UE.
    pub h_ter: Vec<ComplexMatrix>,
    /// Unit-Frobenius-norm copies.
    pub h_ter_norm: Vec<ComplexMatrix>,
    /// Link amplitude gain per UE (dB), path loss plus element gains.
    pub ter_path_gain_db: Vec<f64>,
    /// UE directions in the gNB array's local chart.
    pub ue_local: Vec<(f64, f64)>,
    /// Indices of satellites at or above the elevation mask this slot.
    pub visible_sats: Vec<usize>,
    /// `N_t x 1` physical channel per visible satellite.
    pub h_sat: Vec<ComplexMatrix>,
    /// Unit-2-norm copies.
    pub h_sat_norm: Vec<ComplexMatrix>,
    /// Link amplitude gain per visible satellite (dB).
    pub sat_path_gain_db: Vec<f64>,
    /// Satellite directions in the gNB array's local chart.
    pub sat_local: Vec<(f64, f64)>,
}

/// Build the slot's channels. Satellites below the mask are excluded; an
/// empty satellite list is valid and degenerates nulling to plain
/// beamforming.
pub fn build_channel_set(
    cell: &CellGeometry,
    ues: &[UePlacement],
    sat_states: &[&SatelliteState],
    slot: usize,
    elevation_mask_deg: f64,
) -> Result<ChannelSet> {
    let mut h_ter = Vec::with_capacity(ues.len());
    let mut h_ter_norm = Vec::with_capacity(ues.len());
    let mut ter_path_gain_db = Vec::with_capacity(ues.len());
    let mut ue_local = Vec::with_capacity(ues.len());
    for ue in ues {
        let ue_array = cell.ue_array(ue);
        let (t_gnb, p_gnb) = cell
            .gnb_array
            .local_angles(ue.elevation_from_gnb_deg, ue.azimuth_from_gnb_deg);
        let (t_ue, p_ue) = ue_array.local_angles(ue.elevation_from_ue_deg, ue.azimuth_from_ue_deg);
        let extra =
            cell.element_pattern.gain_db(t_gnb, p_gnb) + cell.element_pattern.gain_db(t_ue, p_ue);
        let h = los_channel(
            &cell.gnb_array,
            &ue_array,
            ue.elevation_from_gnb_deg,
            ue.azimuth_from_gnb_deg,
            ue.elevation_from_ue_deg,
            ue.azimuth_from_ue_deg,
            ue.range_m,
            cell.carrier_hz,
            extra,
        )?;
        let fro = h.frobenius_norm();
        h_ter_norm.push(h.scaled(Complex64::new(1.0 / fro, 0.0)));
        ter_path_gain_db.push(-fspl_db(ue.range_m, cell.carrier_hz) + extra);
        ue_local.push((t_gnb, p_gnb));
        h_ter.push(h);
    }

    let mut visible_sats = Vec::new();
    let mut h_sat = Vec::new();
    let mut h_sat_norm = Vec::new();
    let mut sat_path_gain_db = Vec::new();
    let mut sat_local = Vec::new();
    for (j, s) in sat_states.iter().enumerate() {
        if s.elevation_deg < elevation_mask_deg {
            continue;
        }
        let (t_loc, p_loc) = cell.gnb_array.local_angles(s.elevation_deg, s.azimuth_deg);
        let gain_db =
            -fspl_db(s.range_m, cell.carrier_hz) + cell.element_pattern.gain_db(t_loc, p_loc);
        let amp = 10f64.powf(gain_db / 20.0) * (cell.gnb_array.n_elements() as f64).sqrt();
        let wavelength = SPEED_OF_LIGHT / cell.carrier_hz;
        let g = Complex64::from_polar(amp, TAU * s.range_m / wavelength);
        let e = cell.gnb_array.steering_vector(t_loc, p_loc);
        let h = e.scaled(g);
        let nrm = h.vector_norm();
        visible_sats.push(j);
        h_sat_norm.push(h.scaled(Complex64::new(1.0 / nrm, 0.0)));
        h_sat.push(h);
        sat_path_gain_db.push(gain_db);
        sat_local.push((t_loc, p_loc));
    }

    Ok(ChannelSet {
        slot,
        h_ter,
        h_ter_norm,
        ter_path_gain_db,
        ue_local,
        visible_sats,
        h_sat,
        h_sat_norm,
        sat_path_gain_db,
        sat_local,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::svd;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn test_cell() -> CellGeometry {
        CellGeometry {
            gnb_array: ArrayGeometry {
                n_az: 8,
                n_el: 8,
                element_spacing_wl: 0.5,
                boresight_az_deg: 0.0,
                downtilt_deg: 12.0,
            },
            ue_n_az: 2,
            ue_n_el: 1,
            gnb_height_m: 50.0,
            ue_height_m: 1.6,
            cell_radius_m: 100.0,
            min_distance_m: 35.0,
            sector_width_deg: 120.0,
            carrier_hz: 7.125e9,
            element_pattern: ElementPattern::Isotropic,
        }
    }

    fn sat_state(elev: f64, az: f64, range: f64) -> SatelliteState {
        SatelliteState {
            slot_index: 0,
            position_ecef: [0.0; 3],
            elevation_deg: elev,
            azimuth_deg: az,
            range_m: range,
        }
    }

    #[test]
    fn fspl_reference_values() {
        // Oracle: 20 log10(4 pi d f / c) evaluated independently.
        let oracle =
            |d: f64, f: f64| 20.0 * (4.0 * std::f64::consts::PI * d * f / 299_792_458.0).log10();
        assert_relative_eq!(
            fspl_db(600e3, 7.125e9),
            oracle(600e3, 7.125e9),
            epsilon = 1e-12
        );
        assert_relative_eq!(fspl_db(600e3, 7.125e9), 165.0665, epsilon = 5e-4);
        assert_relative_eq!(fspl_db(100.0, 7.125e9), 89.5035, epsilon = 5e-4);
    }

    #[test]
    fn los_channel_is_rank_one() {
        let cell = test_cell();
        let ue_array = ArrayGeometry::new(2, 1);
        let h = los_channel(
            &cell.gnb_array,
            &ue_array,
            -25.0,
            10.0,
            25.0,
            190.0,
            100.0,
            cell.carrier_hz,
            0.0,
        )
        .unwrap();
        assert_eq!((h.rows(), h.cols()), (2, 64));
        let f = svd(&h).unwrap();
        assert!(f.s[1] <= 1e-12 * f.s[0]);
    }

    #[test]
    fn zero_range_rejected() {
        let cell = test_cell();
        let ue_array = ArrayGeometry::new(2, 1);
        let res = los_channel(
            &cell.gnb_array,
            &ue_array,
            0.0,
            0.0,
            0.0,
            180.0,
            0.0,
            cell.carrier_hz,
            0.0,
        );
        assert!(matches!(res, Err(Error::DegenerateGeometry(_))));
    }

    #[test]
    fn channel_set_shapes_and_normalization() {
        let cell = test_cell();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let ues = place_ues(&cell, 30, &mut rng);
        let states: Vec<SatelliteState> = (0..40)
            .map(|j| sat_state(15.0 + j as f64, (j as f64 * 7.0) % 60.0, 1.2e6))
            .collect();
        let refs: Vec<&SatelliteState> = states.iter().collect();
        let cs = build_channel_set(&cell, &ues, &refs, 0, 10.0).unwrap();
        assert_eq!(cs.h_ter.len(), 30);
        assert_eq!(cs.h_sat.len(), 40);
        for h in &cs.h_ter {
            assert_eq!((h.rows(), h.cols()), (2, 64));
        }
        for (hn, h) in cs.h_ter_norm.iter().zip(&cs.h_ter) {
            assert_relative_eq!(hn.frobenius_norm(), 1.0, epsilon = 1e-12);
            assert!(h.frobenius_norm() > 0.0);
        }
        for hn in &cs.h_sat_norm {
            assert_eq!((hn.rows(), hn.cols()), (64, 1));
            assert_relative_eq!(hn.vector_norm(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn no_incumbents_is_valid() {
        let cell = test_cell();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let ues = place_ues(&cell, 1, &mut rng);
        let cs = build_channel_set(&cell, &ues, &[], 0, 10.0).unwrap();
        assert_eq!(cs.h_ter.len(), 1);
        assert!(cs.h_sat.is_empty());
    }

    #[test]
    fn mask_excludes_low_satellites() {
        let cell = test_cell();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let ues = place_ues(&cell, 1, &mut rng);
        let states = [sat_state(5.0, 0.0, 2e6), sat_state(45.0, 10.0, 8e5)];
        let refs: Vec<&SatelliteState> = states.iter().collect();
        let cs = build_channel_set(&cell, &ues, &refs, 0, 10.0).unwrap();
        assert_eq!(cs.visible_sats, vec![1]);
    }

    #[test]
    fn path_gain_monotone_in_range() {
        let mut last = f64::MAX;
        for range in [400.0, 800.0, 1600.0, 3200.0] {
            let g = -fspl_db(range, 7.125e9);
            assert!(g < last);
            last = g;
        }
    }

    #[test]
    fn sat_channel_norm_matches_path_amplitude() {
        // Satellite channels carry the per-element path amplitude only (so
        // the vector norm is amplitude * sqrt(N_t)); no dish gain on top.
        let cell = test_cell();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let ues = place_ues(&cell, 1, &mut rng);
        let states = [sat_state(90.0, 0.0, 600e3)];
        let refs: Vec<&SatelliteState> = states.iter().collect();
        let cs = build_channel_set(&cell, &ues, &refs, 0, 10.0).unwrap();
        let expect_db = -fspl_db(600e3, 7.125e9) + 10.0 * 64f64.log10();
        assert_relative_eq!(
            20.0 * cs.h_sat[0].vector_norm().log10(),
            expect_db,
            epsilon = 1e-9
        );
    }

    #[test]
    fn beamformed_gain_includes_array_factors() {
        // Matched beamformers on a LOS link collect the full rx and tx
        // array gains on top of the path amplitude.
        let cell = test_cell();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let ues = place_ues(&cell, 1, &mut rng);
        let cs = build_channel_set(&cell, &ues, &[], 0, 10.0).unwrap();
        let f = svd(&cs.h_ter[0]).unwrap();
        let expect = -fspl_db(ues[0].range_m, cell.carrier_hz) + 10.0 * (64f64 * 2.0).log10();
        assert_relative_eq!(20.0 * f.s[0].log10(), expect, epsilon = 1e-9);
    }

    #[test]
    fn cosine_pattern_attenuates_off_normal() {
        let p = ElementPattern::CosinePower {
            exponent: 1.0,
            peak_gain_dbi: 8.0,
        };
        assert_relative_eq!(p.gain_db(90.0, 0.0), 8.0, epsilon = 1e-12);
        assert!(p.gain_db(30.0, 0.0) < 8.0);
        // Behind the panel: floored 30 dB below peak.
        assert_relative_eq!(p.gain_db(90.0, 180.0), -22.0, epsilon = 1e-12);
    }

    #[test]
    fn ue_placement_respects_bounds() {
        let cell = test_cell();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let ues = place_ues(&cell, 200, &mut rng);
        for ue in &ues {
            let r = (ue.east_m * ue.east_m + ue.north_m * ue.north_m).sqrt();
            assert!(r >= cell.min_distance_m - 1e-9 && r <= cell.cell_radius_m + 1e-9);
            let mut az = ue.azimuth_from_gnb_deg - cell.gnb_array.boresight_az_deg;
            while az > 180.0 {
                az -= 360.0;
            }
            assert!(az.abs() <= cell.sector_width_deg / 2.0 + 1e-9);
            assert!(ue.elevation_from_gnb_deg < 0.0);
        }
    }
}
