//! End-to-end per-slot pipeline: propagate the constellation, build the
//! slot's channels, schedule a UE, solve the beamformers and the power for
//! the configured strategy, and collect records.

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::{InfeasiblePolicy, Mode, ScenarioConfig};
use crate::channel::{build_channel_set, place_ues, CellGeometry, ChannelSet, UePlacement};
use crate::error::{Error, Result};
use crate::metrics::{self, RunSummary, SlotRecord};
use crate::nulling::{solve_nulling, BeamformerPair, NullingConfig};
use crate::numerics::ComplexMatrix;
use crate::orbits::{build_constellation, propagate, SatelliteState};
use crate::power::{self, PowerControlContext};
use crate::{array::ArrayGeometry, metrics::rss_degradation_db};

/// Round-robin TDM scheduling: one UE per slot.
pub fn schedule(slot: usize, k: usize) -> usize {
    debug_assert!(k >= 1);
    slot % k
}

/// Reproducibility sidecar written next to the outputs. `duration_ms` is
/// wall-clock and varies between runs; everything else is deterministic.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub config_hash: String,
    pub seed: u64,
    pub tool_version: String,
    pub mode: String,
    pub lambda: f64,
    pub epsilon: f64,
    pub records_csv: String,
    pub summary_json: String,
    pub manifest_json: String,
    pub duration_ms: u64,
}

pub struct RunOutput {
    pub records: Vec<SlotRecord>,
    pub summary: RunSummary,
    pub manifest: RunManifest,
}

/// Static per-run state shared by the runner and the CLI inspection
/// commands (gain maps, utility curves).
pub struct Assembled {
    pub cell: CellGeometry,
    pub ues: Vec<UePlacement>,
    pub trajectories: Vec<Vec<SatelliteState>>,
    pub ctx: PowerControlContext,
}

pub fn assemble(cfg: &ScenarioConfig) -> Result<Assembled> {
    cfg.validate()?;
    let a = &cfg.arrays;
    let cell = CellGeometry {
        gnb_array: ArrayGeometry {
            n_az: a.gnb_n_az,
            n_el: a.gnb_n_el,
            element_spacing_wl: a.element_spacing_wl,
            boresight_az_deg: a.gnb_boresight_az_deg,
            downtilt_deg: a.gnb_downtilt_deg,
        },
        ue_n_az: a.ue_n_az,
        ue_n_el: a.ue_n_el,
        gnb_height_m: a.gnb_height_m,
        ue_height_m: a.ue_height_m,
        cell_radius_m: a.cell_radius_m,
        min_distance_m: a.min_distance_m,
        sector_width_deg: a.sector_width_deg,
        carrier_hz: a.carrier_hz,
        element_pattern: a.element_pattern,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let ues = place_ues(&cell, cfg.n_ues, &mut rng);
    let site = cfg.site.ground_site();
    let elements = build_constellation(
        &cfg.constellation.base_elements(0),
        cfg.constellation.n_sat,
        cfg.constellation.delta_inclination_deg,
    )?;
    let trajectories: Vec<Vec<SatelliteState>> = elements
        .iter()
        .enumerate()
        .map(|(k, _)| {
            let e = crate::orbits::OrbitalElements {
                inclination_deg: elements[k].inclination_deg,
                ..cfg.constellation.base_elements(k)
            };
            propagate(&e, &site, cfg.n_slots, cfg.constellation.slot_duration_s)
        })
        .collect::<Result<_>>()?;
    Ok(Assembled {
        cell,
        ues,
        trajectories,
        ctx: cfg.power_context(),
    })
}

/// Channels for one slot of an assembled scenario.
pub fn slot_channels(cfg: &ScenarioConfig, asm: &Assembled, slot: usize) -> Result<ChannelSet> {
    let states: Vec<&SatelliteState> = asm.trajectories.iter().map(|t| &t[slot]).collect();
    build_channel_set(
        &asm.cell,
        &asm.ues,
        &states,
        slot,
        cfg.constellation.elevation_mask_deg,
    )
}

/// Satellite vectors entering the nulling objective: pure steering vectors
/// toward the satellite directions (the LOS simplification) or the
/// normalized channel vectors, per config.
pub fn nulling_inputs(
    cfg: &ScenarioConfig,
    asm: &Assembled,
    cs: &ChannelSet,
) -> Vec<ComplexMatrix> {
    if cfg.arrays.use_steering_vectors_for_nulling {
        cs.sat_local
            .iter()
            .map(|&(t, p)| asm.cell.gnb_array.steering_vector(t, p))
            .collect()
    } else {
        cs.h_sat_norm.clone()
    }
}

/// Beamformers for one slot: the zero-regularization reference pair and the
/// active pair for the configured mode.
pub fn slot_beamformers(
    cfg: &ScenarioConfig,
    asm: &Assembled,
    cs: &ChannelSet,
    ue: usize,
) -> Result<(BeamformerPair, BeamformerPair)> {
    let h_norm = &cs.h_ter_norm[ue];
    let reference = solve_nulling(h_norm, &[], &NullingConfig { lambda: 0.0 })?;
    let lambda = cfg.active_lambda();
    let active = match cfg.mode {
        Mode::PowerControlOnly => reference.clone(),
        _ => {
            if lambda == 0.0 {
                reference.clone()
            } else {
                let sats = nulling_inputs(cfg, asm, cs);
                solve_nulling(h_norm, &sats, &NullingConfig { lambda })?
            }
        }
    };
    Ok((reference, active))
}

fn run_slot(cfg: &ScenarioConfig, asm: &Assembled, slot: usize) -> Result<SlotRecord> {
    let cs = slot_channels(cfg, asm, slot)?;
    let ue = schedule(slot, cfg.n_ues);
    let (reference, active) = slot_beamformers(cfg, asm, &cs, ue)?;
    let h_phys = &cs.h_ter[ue];
    let gain_db = crate::nulling::beamformed_gain_db(&active, h_phys);
    let ctx = &asm.ctx;

    let (p_selected, infeasible, inr_per_sat) = match cfg.mode {
        Mode::NullingOnly => {
            let p = ctx.p_max_dbm;
            let inrs = cs
                .h_sat
                .iter()
                .map(|h| power::inr_db(p, &active.w_t, h, ctx))
                .collect();
            (p, false, inrs)
        }
        _ => match power::solve_power(gain_db, &active.w_t, &cs.h_sat, ctx) {
            Ok(d) => (d.p_opt_dbm, false, d.inr_per_satellite_db),
            Err(Error::InfeasibleLink { p_inr_dbm, .. })
                if cfg.power_control.infeasible_policy == InfeasiblePolicy::Fallback =>
            {
                // Protect the incumbent: transmit at the INR cap even when
                // it undercuts the rate floor (or the hardware minimum).
                let p = p_inr_dbm;
                let inrs = cs
                    .h_sat
                    .iter()
                    .map(|h| power::inr_db(p, &active.w_t, h, ctx))
                    .collect();
                (p, true, inrs)
            }
            Err(e) => return Err(e),
        },
    };

    let drss = rss_degradation_db(
        ctx.p_max_dbm,
        &reference.w_t,
        p_selected,
        &active.w_t,
        &active.w_r,
        h_phys,
    );

    Ok(SlotRecord {
        slot,
        ue_id: ue,
        lambda: cfg.active_lambda(),
        p_selected_dbm: p_selected,
        beamformed_gain_db: gain_db,
        rss_degradation_db: drss,
        inr_per_sat_db: inr_per_sat,
        degeneracy_flag: active.degenerate,
        infeasible_flag: infeasible,
    })
}

/// Run one scenario end to end. Identical config and seed produce
/// bit-identical records.
pub fn run(cfg: &ScenarioConfig) -> Result<RunOutput> {
    let start = Instant::now();
    let asm = assemble(cfg)?;
    let mut records = Vec::with_capacity(cfg.n_slots);
    for slot in 0..cfg.n_slots {
        let rec = run_slot(cfg, &asm, slot).map_err(|e| Error::SlotFailure {
            slot,
            source: Box::new(e),
        })?;
        records.push(rec);
    }
    let summary = metrics::summarize(&records, cfg.n_ues, asm.ctx.p_max_dbm)?;
    let manifest = RunManifest {
        config_hash: cfg.canonical_hash(),
        seed: cfg.seed,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        mode: cfg.mode.to_string(),
        lambda: cfg.active_lambda(),
        epsilon: cfg.epsilon,
        records_csv: cfg.output.records_csv.clone(),
        summary_json: cfg.output.summary_json.clone(),
        manifest_json: cfg.output.manifest_json.clone(),
        duration_ms: start.elapsed().as_millis() as u64,
    };
    Ok(RunOutput {
        records,
        summary,
        manifest,
    })
}

/// Per-seed summaries plus their pooled mean, for seed-averaged results.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PooledSummary {
    pub n_runs: usize,
    pub seeds: Vec<u64>,
    pub jfi_mean: f64,
    pub worst_case_rss_db_mean: f64,
    pub power_decrease_pct_mean: f64,
    pub inr_median_db_mean: Option<f64>,
}

pub struct RepeatedRun {
    pub per_seed: Vec<(u64, RunOutput)>,
    pub pooled: PooledSummary,
}

/// Run `repeats` copies of the scenario with consecutive seeds.
pub fn run_repeated(cfg: &ScenarioConfig, repeats: usize) -> Result<RepeatedRun> {
    if repeats == 0 {
        return Err(Error::InvalidArgument("repeats must be >= 1".into()));
    }
    let mut per_seed = Vec::with_capacity(repeats);
    for i in 0..repeats {
        let mut c = cfg.clone();
        c.seed = cfg.seed + i as u64;
        let out = run(&c)?;
        per_seed.push((c.seed, out));
    }
    let n = per_seed.len() as f64;
    let mean = |f: &dyn Fn(&RunSummary) -> f64| {
        per_seed.iter().map(|(_, o)| f(&o.summary)).sum::<f64>() / n
    };
    let medians: Vec<f64> = per_seed
        .iter()
        .filter_map(|(_, o)| o.summary.inr_median_db)
        .collect();
    let pooled = PooledSummary {
        n_runs: per_seed.len(),
        seeds: per_seed.iter().map(|(s, _)| *s).collect(),
        jfi_mean: mean(&|s| s.jfi),
        worst_case_rss_db_mean: mean(&|s| s.worst_case_rss_db),
        power_decrease_pct_mean: mean(&|s| s.power_decrease_pct),
        inr_median_db_mean: if medians.is_empty() {
            None
        } else {
            Some(medians.iter().sum::<f64>() / medians.len() as f64)
        },
    };
    Ok(RepeatedRun { per_seed, pooled })
}

/// One full run per swept value, shared seed, summaries keyed by value.
pub enum SweepDimension {
    Lambda(Vec<f64>),
    Epsilon(Vec<f64>),
    ArraySize(Vec<(usize, usize)>),
    NSat(Vec<usize>),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepEntry {
    pub key: String,
    pub summary: RunSummary,
}

pub fn sweep(cfg: &ScenarioConfig, dim: &SweepDimension) -> Result<Vec<SweepEntry>> {
    let mut out = Vec::new();
    match dim {
        SweepDimension::Lambda(values) => {
            if values.is_empty() {
                return Err(Error::InvalidArgument("lambda sweep needs values".into()));
            }
            for &l in values {
                let mut c = cfg.clone();
                c.lambda_list = vec![l];
                out.push(SweepEntry {
                    key: format!("lambda={l}"),
                    summary: run(&c)?.summary,
                });
            }
        }
        SweepDimension::Epsilon(values) => {
            for &e in values {
                let mut c = cfg.clone();
                c.epsilon = e;
                out.push(SweepEntry {
                    key: format!("epsilon={e}"),
                    summary: run(&c)?.summary,
                });
            }
        }
        SweepDimension::ArraySize(sizes) => {
            for &(az, el) in sizes {
                let mut c = cfg.clone();
                c.arrays.gnb_n_az = az;
                c.arrays.gnb_n_el = el;
                out.push(SweepEntry {
                    key: format!("array={az}x{el}"),
                    summary: run(&c)?.summary,
                });
            }
        }
        SweepDimension::NSat(values) => {
            for &n in values {
                let mut c = cfg.clone();
                c.constellation.n_sat = n;
                out.push(SweepEntry {
                    key: format!("n_sat={n}"),
                    summary: run(&c)?.summary,
                });
            }
        }
    }
    Ok(out)
}
