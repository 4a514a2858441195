//! LEO constellation generation, circular two-body propagation and look
//! angles from a ground site.
//!
//! The orbit model is deliberately simple: circular Keplerian motion at
//! radius `R_earth + altitude` plus uniform Earth rotation. Perturbations
//! (J2, drag) are irrelevant over the 150-slot windows this simulator uses.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vec3::{self, Vec3};

/// Earth gravitational parameter (m^3/s^2).
pub const MU_EARTH: f64 = 3.986_004_418e14;
/// Earth mean radius (m); altitudes are measured above this sphere.
pub const R_EARTH: f64 = 6_371_000.0;
/// Earth rotation rate (rad/s).
pub const OMEGA_EARTH: f64 = 7.292_115_9e-5;

/// Circular orbit definition. Eccentricity is fixed to zero, so the initial
/// anomaly is equivalent to the argument of latitude at epoch.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OrbitalElements {
    /// Altitude above Earth mean radius (m).
    pub altitude_m: f64,
    /// Inclination (deg), clamped to [0, 180].
    pub inclination_deg: f64,
    /// Right ascension of the ascending node (deg), normalized to [0, 360).
    pub raan_deg: f64,
    /// Anomaly at epoch (deg), normalized to [0, 360).
    pub true_anomaly_deg: f64,
}

impl OrbitalElements {
    pub fn validate(&self) -> Result<()> {
        if !(self.altitude_m > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "altitude must be positive, got {}",
                self.altitude_m
            )));
        }
        if !(0.0..=180.0).contains(&self.inclination_deg) {
            return Err(Error::InvalidArgument(format!(
                "inclination must be in [0, 180] deg, got {}",
                self.inclination_deg
            )));
        }
        Ok(())
    }

    fn normalized(mut self) -> Self {
        self.inclination_deg = self.inclination_deg.clamp(0.0, 180.0);
        self.raan_deg = normalize_deg(self.raan_deg);
        self.true_anomaly_deg = normalize_deg(self.true_anomaly_deg);
        self
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GroundSite {
    pub latitude_deg: f64,
    pub longitude_deg: f64,
    pub height_m: f64,
}

impl GroundSite {
    pub fn validate(&self) -> Result<()> {
        if !(-90.0..=90.0).contains(&self.latitude_deg) {
            return Err(Error::InvalidArgument(format!(
                "latitude must be in [-90, 90] deg, got {}",
                self.latitude_deg
            )));
        }
        if !(-180.0..=180.0).contains(&self.longitude_deg) {
            return Err(Error::InvalidArgument(format!(
                "longitude must be in [-180, 180] deg, got {}",
                self.longitude_deg
            )));
        }
        Ok(())
    }

    /// Site position in ECEF, spherical Earth.
    pub fn ecef(&self) -> Vec3 {
        let lat = self.latitude_deg.to_radians();
        let lon = self.longitude_deg.to_radians();
        let r = R_EARTH + self.height_m;
        [
            r * lat.cos() * lon.cos(),
            r * lat.cos() * lon.sin(),
            r * lat.sin(),
        ]
    }

    /// Local east/north/up basis vectors at the site.
    pub fn enu_basis(&self) -> (Vec3, Vec3, Vec3) {
        let lat = self.latitude_deg.to_radians();
        let lon = self.longitude_deg.to_radians();
        let east = [-lon.sin(), lon.cos(), 0.0];
        let north = [-lat.sin() * lon.cos(), -lat.sin() * lon.sin(), lat.cos()];
        let up = [lat.cos() * lon.cos(), lat.cos() * lon.sin(), lat.sin()];
        (east, north, up)
    }
}

/// Per-slot satellite geometry as seen from the ground site.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SatelliteState {
    pub slot_index: usize,
    pub position_ecef: Vec3,
    pub elevation_deg: f64,
    pub azimuth_deg: f64,
    pub range_m: f64,
}

/// Constellation with per-satellite inclination offsets: element `k` copies
/// the base orbit with inclination shifted by `k * delta_inclination`.
pub fn build_constellation(
    base: &OrbitalElements,
    n_sat: usize,
    delta_inclination_deg: f64,
) -> Result<Vec<OrbitalElements>> {
    if n_sat == 0 {
        return Err(Error::InvalidArgument("n_sat must be >= 1".into()));
    }
    base.validate()?;
    Ok((0..n_sat)
        .map(|k| {
            OrbitalElements {
                inclination_deg: base.inclination_deg + k as f64 * delta_inclination_deg,
                ..base.clone()
            }
            .normalized()
        })
        .collect())
}

/// Propagate one satellite over `n_slots` steps of `slot_duration_s` and
/// compute look angles from the site at each step.
pub fn propagate(
    elements: &OrbitalElements,
    site: &GroundSite,
    n_slots: usize,
    slot_duration_s: f64,
) -> Result<Vec<SatelliteState>> {
    if n_slots == 0 {
        return Err(Error::InvalidArgument("n_slots must be >= 1".into()));
    }
    if !(slot_duration_s > 0.0) {
        return Err(Error::InvalidArgument(
            "slot_duration must be positive".into(),
        ));
    }
    elements.validate()?;
    site.validate()?;

    let r = R_EARTH + elements.altitude_m;
    let mean_motion = (MU_EARTH / (r * r * r)).sqrt();
    let incl = elements.inclination_deg.to_radians();
    let raan = elements.raan_deg.to_radians();
    let u0 = elements.true_anomaly_deg.to_radians();

    let mut out = Vec::with_capacity(n_slots);
    for slot in 0..n_slots {
        let t = slot as f64 * slot_duration_s;
        let u = u0 + mean_motion * t;
        // Orbital plane -> ECI (inertial frame aligned with ECEF at t = 0).
        let (su, cu) = u.sin_cos();
        let (si, ci) = incl.sin_cos();
        let (so, co) = raan.sin_cos();
        let eci = [
            r * (co * cu - so * su * ci),
            r * (so * cu + co * su * ci),
            r * su * si,
        ];
        // ECI -> ECEF: rotate by the accumulated Earth rotation angle.
        let theta = OMEGA_EARTH * t;
        let (st, ct) = theta.sin_cos();
        let ecef = [
            ct * eci[0] + st * eci[1],
            -st * eci[0] + ct * eci[1],
            eci[2],
        ];

        let (elevation_deg, azimuth_deg, range_m) = look_angles(site, &ecef);
        out.push(SatelliteState {
            slot_index: slot,
            position_ecef: ecef,
            elevation_deg,
            azimuth_deg,
            range_m,
        });
    }
    Ok(out)
}

/// Elevation, azimuth (clockwise from north, [0, 360)) and range from the
/// site to an ECEF position.
pub fn look_angles(site: &GroundSite, position_ecef: &Vec3) -> (f64, f64, f64) {
    let d = vec3::sub(position_ecef, &site.ecef());
    let range = vec3::norm(&d);
    let (east, north, up) = site.enu_basis();
    let e = vec3::dot(&d, &east) / range;
    let n = vec3::dot(&d, &north) / range;
    let u = vec3::dot(&d, &up) / range;
    let elevation = u.clamp(-1.0, 1.0).asin().to_degrees();
    let azimuth = normalize_deg(e.atan2(n).to_degrees());
    (elevation, azimuth, range)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ElevationStats {
    pub mean_deg: f64,
    pub median_deg: f64,
    pub std_deg: f64,
    pub min_deg: f64,
    pub max_deg: f64,
    pub n_samples: usize,
}

/// Statistics over all (satellite, slot) pairs at or above the mask.
/// Standard deviation is the population form; the median interpolates
/// between the two central order statistics for even counts.
pub fn elevation_statistics(states: &[SatelliteState], mask_deg: f64) -> Result<ElevationStats> {
    let mut sample: Vec<f64> = states
        .iter()
        .map(|s| s.elevation_deg)
        .filter(|&e| e >= mask_deg)
        .collect();
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    sample.sort_by(|a, b| a.total_cmp(b));
    let n = sample.len();
    let mean = sample.iter().sum::<f64>() / n as f64;
    let var = sample.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / n as f64;
    let median = if n % 2 == 1 {
        sample[n / 2]
    } else {
        0.5 * (sample[n / 2 - 1] + sample[n / 2])
    };
    Ok(ElevationStats {
        mean_deg: mean,
        median_deg: median,
        std_deg: var.sqrt(),
        min_deg: sample[0],
        max_deg: sample[n - 1],
        n_samples: n,
    })
}

/// CSV export of satellite states: `slot,sat_id,elev_deg,az_deg,range_m`.
pub fn states_csv(trajectories: &[Vec<SatelliteState>]) -> String {
    let mut out = String::from("slot,sat_id,elev_deg,az_deg,range_m\n");
    if trajectories.is_empty() {
        return out;
    }
    let n_slots = trajectories[0].len();
    for slot in 0..n_slots {
        for (sat_id, traj) in trajectories.iter().enumerate() {
            let s = &traj[slot];
            out.push_str(&format!(
                "{},{},{:.6},{:.6},{:.3}\n",
                slot, sat_id, s.elevation_deg, s.azimuth_deg, s.range_m
            ));
        }
    }
    out
}

fn normalize_deg(x: f64) -> f64 {
    let mut v = x % 360.0;
    if v < 0.0 {
        v += 360.0;
    }
    v
}
