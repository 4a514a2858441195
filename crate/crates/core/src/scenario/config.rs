//! Declarative scenario configuration.
//!
//! A single TOML file describes a run: strategy mode, regularization sweep
//! values, the constellation, the arrays and the power-control parameters.
//! Unset fields take the published defaults, so an empty file is a valid
//! scenario. `validate` checks a file without running it.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::channel::ElementPattern;
use crate::error::{Error, Result};
use crate::orbits::{GroundSite, OrbitalElements};
use crate::power::PowerControlContext;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    NullingOnly,
    PowerControlOnly,
    #[default]
    Joint,
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Mode::NullingOnly => "nulling_only",
            Mode::PowerControlOnly => "power_control_only",
            Mode::Joint => "joint",
        };
        f.write_str(s)
    }
}

/// What to do when no power satisfies both the rate floor and the INR cap.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InfeasiblePolicy {
    /// Transmit at the INR cap, accept the rate shortfall and flag the slot.
    #[default]
    Fallback,
    /// Abort the run.
    Error,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConstellationConfig {
    pub n_sat: usize,
    pub altitude_m: f64,
    /// Base inclination (the constellation definition's C parameter).
    pub inclination_deg: f64,
    /// Ascending-node longitude (D parameter).
    pub raan_deg: f64,
    /// Anomaly at epoch (E parameter).
    pub anomaly_deg: f64,
    /// Per-satellite anomaly step (F parameter).
    pub anomaly_step_deg: f64,
    /// Per-satellite inclination offset spreading the trajectories.
    pub delta_inclination_deg: f64,
    pub slot_duration_s: f64,
    pub elevation_mask_deg: f64,
}

impl Default for ConstellationConfig {
    fn default() -> Self {
        Self {
            n_sat: 40,
            altitude_m: 600e3,
            inclination_deg: 63.4,
            raan_deg: -28.8,
            anomaly_deg: 44.55,
            anomaly_step_deg: 0.0,
            delta_inclination_deg: 0.5,
            slot_duration_s: 1.0,
            elevation_mask_deg: 10.0,
        }
    }
}

impl ConstellationConfig {
    pub fn base_elements(&self, satellite_index: usize) -> OrbitalElements {
        OrbitalElements {
            altitude_m: self.altitude_m,
            inclination_deg: self.inclination_deg,
            raan_deg: self.raan_deg,
            true_anomaly_deg: self.anomaly_deg + satellite_index as f64 * self.anomaly_step_deg,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SiteConfig {
    pub latitude_deg: f64,
    pub longitude_deg: f64,
    pub height_m: f64,
}

impl Default for SiteConfig {
    fn default() -> Self {
        // Central Spain.
        Self {
            latitude_deg: 38.85,
            longitude_deg: -5.0,
            height_m: 0.0,
        }
    }
}

impl SiteConfig {
    pub fn ground_site(&self) -> GroundSite {
        GroundSite {
            latitude_deg: self.latitude_deg,
            longitude_deg: self.longitude_deg,
            height_m: self.height_m,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ArraysConfig {
    pub gnb_n_az: usize,
    pub gnb_n_el: usize,
    pub ue_n_az: usize,
    pub ue_n_el: usize,
    pub element_spacing_wl: f64,
    pub gnb_boresight_az_deg: f64,
    pub gnb_downtilt_deg: f64,
    pub gnb_height_m: f64,
    pub ue_height_m: f64,
    pub cell_radius_m: f64,
    pub min_distance_m: f64,
    pub sector_width_deg: f64,
    pub carrier_hz: f64,
    pub element_pattern: ElementPattern,
    /// Use pure steering vectors toward the satellites in the nulling
    /// objective (the LOS simplification); `false` uses the normalized
    /// satellite channel vectors instead.
    pub use_steering_vectors_for_nulling: bool,
}

impl Default for ArraysConfig {
    fn default() -> Self {
        Self {
            gnb_n_az: 8,
            gnb_n_el: 8,
            ue_n_az: 2,
            ue_n_el: 1,
            element_spacing_wl: 0.5,
            // Face the sector toward the constellation's pass so the
            // satellites fall inside the served angular window.
            gnb_boresight_az_deg: 285.0,
            gnb_downtilt_deg: 12.0,
            gnb_height_m: 50.0,
            ue_height_m: 1.6,
            cell_radius_m: 100.0,
            min_distance_m: 35.0,
            sector_width_deg: 120.0,
            carrier_hz: 7.125e9,
            element_pattern: ElementPattern::Isotropic,
            use_steering_vectors_for_nulling: true,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PowerConfig {
    pub bandwidth_hz: f64,
    pub interference_plus_noise_dbm: f64,
    pub alpha: f64,
    pub m_exp: f64,
    pub inr_max_db: f64,
    pub p_min_dbm: f64,
    pub p_max_dbm: f64,
    pub g_over_t_db: f64,
    pub atmospheric_loss_db: f64,
    pub infeasible_policy: InfeasiblePolicy,
}

impl Default for PowerConfig {
    fn default() -> Self {
        Self {
            bandwidth_hz: 30e6,
            interference_plus_noise_dbm: -73.0,
            alpha: 1e-3,
            m_exp: 3.0,
            inr_max_db: -6.0,
            p_min_dbm: 10.0,
            p_max_dbm: 33.0,
            g_over_t_db: 13.0,
            atmospheric_loss_db: 1.0,
            infeasible_policy: InfeasiblePolicy::Fallback,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub records_csv: String,
    pub summary_json: String,
    pub manifest_json: String,
    /// When set, satellite states are exported to this CSV.
    pub orbits_csv: Option<String>,
    /// When set, the full channel set of this slot is dumped to JSON.
    pub channel_dump_slot: Option<usize>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            records_csv: "records.csv".into(),
            summary_json: "summary.json".into(),
            manifest_json: "manifest.json".into(),
            orbits_csv: None,
            channel_dump_slot: None,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub seed: u64,
    pub mode: Mode,
    /// Regularization values; `run` uses the first entry, `sweep-lambda`
    /// runs one full scenario per entry.
    pub lambda_list: Vec<f64>,
    /// Rate-floor fraction of the full-power rate.
    pub epsilon: f64,
    pub n_slots: usize,
    pub n_ues: usize,
    pub constellation: ConstellationConfig,
    pub site: SiteConfig,
    pub arrays: ArraysConfig,
    pub power_control: PowerConfig,
    pub output: OutputConfig,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            mode: Mode::default(),
            lambda_list: vec![0.0, 0.1, 1.0, 10.0],
            epsilon: 0.85,
            n_slots: 150,
            n_ues: 30,
            constellation: ConstellationConfig::default(),
            site: SiteConfig::default(),
            arrays: ArraysConfig::default(),
            power_control: PowerConfig::default(),
            output: OutputConfig::default(),
        }
    }
}

impl ScenarioConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: ScenarioConfig =
            toml::from_str(s).map_err(|e| Error::Config(format!("parse error: {e}")))?;
        Ok(cfg)
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        let s = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&s)
    }

    /// Active regularization for a single run.
    pub fn active_lambda(&self) -> f64 {
        match self.mode {
            Mode::PowerControlOnly => 0.0,
            _ => self.lambda_list.first().copied().unwrap_or(0.0),
        }
    }

    pub fn power_context(&self) -> PowerControlContext {
        PowerControlContext {
            bandwidth_hz: self.power_control.bandwidth_hz,
            interference_plus_noise_dbm: self.power_control.interference_plus_noise_dbm,
            alpha: self.power_control.alpha,
            m_exp: self.power_control.m_exp,
            epsilon: self.epsilon,
            inr_max_db: self.power_control.inr_max_db,
            p_min_dbm: self.power_control.p_min_dbm,
            p_max_dbm: self.power_control.p_max_dbm,
            g_over_t_db: self.power_control.g_over_t_db,
            atmospheric_loss_db: self.power_control.atmospheric_loss_db,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.n_ues == 0 {
            return fail("n_ues must be >= 1".into());
        }
        if self.n_slots == 0 {
            return fail("n_slots must be >= 1".into());
        }
        if self.n_slots < self.n_ues {
            return fail(format!(
                "n_slots ({}) must cover every UE at least once (n_ues = {})",
                self.n_slots, self.n_ues
            ));
        }
        if self.mode != Mode::PowerControlOnly && self.lambda_list.is_empty() {
            return fail("lambda_list must be nonempty for nulling modes".into());
        }
        for l in &self.lambda_list {
            if !(*l >= 0.0) || !l.is_finite() {
                return fail(format!("lambda values must be finite and >= 0, got {l}"));
            }
        }
        if self.constellation.n_sat == 0 {
            return fail("constellation.n_sat must be >= 1".into());
        }
        if !(self.constellation.slot_duration_s > 0.0) {
            return fail("constellation.slot_duration_s must be positive".into());
        }
        self.constellation
            .base_elements(0)
            .validate()
            .map_err(|e| Error::Config(e.to_string()))?;
        self.site
            .ground_site()
            .validate()
            .map_err(|e| Error::Config(e.to_string()))?;
        let a = &self.arrays;
        if a.gnb_n_az == 0 || a.gnb_n_el == 0 || a.ue_n_az == 0 || a.ue_n_el == 0 {
            return fail("array dimensions must be >= 1".into());
        }
        if !(a.element_spacing_wl > 0.0) {
            return fail("element_spacing_wl must be positive".into());
        }
        if !(a.carrier_hz > 0.0) {
            return fail("carrier_hz must be positive".into());
        }
        if !(a.cell_radius_m > a.min_distance_m) {
            return fail("cell_radius_m must exceed min_distance_m".into());
        }
        if !(a.sector_width_deg > 0.0 && a.sector_width_deg <= 360.0) {
            return fail("sector_width_deg must be in (0, 360]".into());
        }
        self.power_context()
            .validate()
            .map_err(|e| Error::Config(e.to_string()))?;
        Ok(())
    }

    /// Deterministic hash of the canonical (JSON) form of the config.
    pub fn canonical_hash(&self) -> String {
        let canon = serde_json::to_string(self).expect("config serializes");
        let mut hasher = Sha256::new();
        hasher.update(canon.as_bytes());
        let digest = hasher.finalize();
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}
