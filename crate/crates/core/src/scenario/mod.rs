//! Scenario configuration, the per-slot pipeline and output serialization.

mod config;
mod output;
mod runner;

pub use config::{
    ArraysConfig, ConstellationConfig, InfeasiblePolicy, Mode, OutputConfig, PowerConfig,
    ScenarioConfig, SiteConfig,
};
pub use output::{
    channel_dump_json, gainmap_markers_json, manifest_json, records_csv, summary_json, sweep_json,
    utility_curve_csv, write_string, RECORDS_HEADER,
};
pub use runner::{
    assemble, nulling_inputs, run, run_repeated, schedule, slot_beamformers, slot_channels, sweep,
    Assembled, PooledSummary, RepeatedRun, RunManifest, RunOutput, SweepDimension, SweepEntry,
};
