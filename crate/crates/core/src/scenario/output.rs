//! Deterministic serialization of run outputs.
//!
//! CSV floats use fixed six-decimal formatting and JSON goes through
//! serde_json with struct-ordered keys, so identical runs produce
//! byte-identical files.

use std::path::Path;

use super::runner::{RunManifest, SweepEntry};
use crate::error::Result;
use crate::metrics::{RunSummary, SlotRecord};
use crate::nulling::GainMap;
use crate::power::INR_FLOOR_DB;

pub const RECORDS_HEADER: &str = "slot,ue_id,lambda,p_dbm,gain_db,drss_db,inr_worst_db,flags";

fn flags(r: &SlotRecord) -> &'static str {
    match (r.degeneracy_flag, r.infeasible_flag) {
        (false, false) => "-",
        (true, false) => "d",
        (false, true) => "i",
        (true, true) => "di",
    }
}

pub fn records_csv(records: &[SlotRecord]) -> String {
    let mut out = String::from(RECORDS_HEADER);
    out.push('\n');
    for r in records {
        let worst = if r.inr_per_sat_db.is_empty() {
            INR_FLOOR_DB
        } else {
            r.worst_inr_db()
        };
        out.push_str(&format!(
            "{},{},{:.6},{:.6},{:.6},{:.6},{:.6},{}\n",
            r.slot,
            r.ue_id,
            r.lambda,
            r.p_selected_dbm,
            r.beamformed_gain_db,
            r.rss_degradation_db,
            worst,
            flags(r)
        ));
    }
    out
}

pub fn summary_json(summary: &RunSummary) -> String {
    let mut s = serde_json::to_string_pretty(summary).expect("summary serializes");
    s.push('\n');
    s
}

pub fn manifest_json(manifest: &RunManifest) -> String {
    let mut s = serde_json::to_string_pretty(manifest).expect("manifest serializes");
    s.push('\n');
    s
}

pub fn sweep_json(entries: &[SweepEntry]) -> String {
    let mut s = serde_json::to_string_pretty(entries).expect("sweep serializes");
    s.push('\n');
    s
}

/// CSV rows `p_dbm,utility,feasible_flag` of one slot's utility curve.
pub fn utility_curve_csv(points: &[(f64, f64, bool)]) -> String {
    let mut out = String::from("p_dbm,utility,feasible_flag\n");
    for (p, u, ok) in points {
        out.push_str(&format!("{:.3},{:.6e},{}\n", p, u, *ok as u8));
    }
    out
}

/// Marker sidecar for a gain map: served UE and satellite directions in the
/// array's local chart.
pub fn gainmap_markers_json(
    ue_local: (f64, f64),
    sat_local: &[(f64, f64)],
    map: &GainMap,
) -> String {
    #[derive(serde::Serialize)]
    struct Marker {
        theta_deg: f64,
        phi_deg: f64,
    }
    #[derive(serde::Serialize)]
    struct Sidecar {
        ue: Marker,
        satellites: Vec<Marker>,
        theta_min_deg: f64,
        theta_max_deg: f64,
        phi_min_deg: f64,
        phi_max_deg: f64,
    }
    let sidecar = Sidecar {
        ue: Marker {
            theta_deg: ue_local.0,
            phi_deg: ue_local.1,
        },
        satellites: sat_local
            .iter()
            .map(|&(t, p)| Marker {
                theta_deg: t,
                phi_deg: p,
            })
            .collect(),
        theta_min_deg: *map.theta_deg.first().unwrap(),
        theta_max_deg: *map.theta_deg.last().unwrap(),
        phi_min_deg: *map.phi_deg.first().unwrap(),
        phi_max_deg: *map.phi_deg.last().unwrap(),
    };
    let mut s = serde_json::to_string_pretty(&sidecar).expect("sidecar serializes");
    s.push('\n');
    s
}

/// Channel dump for one slot: complex entries as `[re, im]` pairs.
pub fn channel_dump_json(cs: &crate::channel::ChannelSet) -> String {
    #[derive(serde::Serialize)]
    struct Dump {
        slot: usize,
        h_ter: Vec<Vec<Vec<[f64; 2]>>>,
        h_sat: Vec<Vec<[f64; 2]>>,
        visible_sats: Vec<usize>,
    }
    let dump = Dump {
        slot: cs.slot,
        h_ter: cs
            .h_ter
            .iter()
            .map(|h| {
                (0..h.rows())
                    .map(|r| {
                        (0..h.cols())
                            .map(|c| {
                                let z = h.at(r, c);
                                [z.re, z.im]
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect(),
        h_sat: cs
            .h_sat
            .iter()
            .map(|h| {
                (0..h.rows())
                    .map(|r| {
                        let z = h.at(r, 0);
                        [z.re, z.im]
                    })
                    .collect()
            })
            .collect(),
        visible_sats: cs.visible_sats.clone(),
    };
    let mut s = serde_json::to_string_pretty(&dump).expect("dump serializes");
    s.push('\n');
    s
}

pub fn write_string(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    std::fs::write(path, contents)?;
    Ok(())
}
