//! Command-line front end: one subcommand per study family.
//!
//! Exit codes: 0 on success, 2 on configuration errors, 3 on numerical
//! failures (the offending slot index goes to stderr).

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use coexsim::error::{Error, Result};
use coexsim::nulling::gain_map;
use coexsim::power;
use coexsim::scenario::{
    self, assemble, run, run_repeated, slot_beamformers, slot_channels, sweep, Mode,
    ScenarioConfig, SweepDimension,
};

#[derive(Parser)]
#[command(
    name = "coexsim",
    version,
    about = "Satellite-terrestrial coexistence simulator"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone)]
struct CommonOpts {
    /// Scenario file (TOML); defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override the scenario seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the strategy mode: nulling_only | power_control_only | joint.
    #[arg(long)]
    mode: Option<String>,
    /// Override the active regularization (replaces lambda_list).
    #[arg(long)]
    lambda: Option<f64>,
    /// Override the rate-floor fraction.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the configured scenario over one or more seeds.
    Run {
        #[command(flatten)]
        common: CommonOpts,
        /// Number of consecutive seeds to run and pool.
        #[arg(long, default_value_t = 5)]
        repeats: usize,
    },
    /// One full run per value in lambda_list.
    SweepLambda {
        #[command(flatten)]
        common: CommonOpts,
    },
    /// One full run per gNB array size.
    SweepArray {
        #[command(flatten)]
        common: CommonOpts,
        /// Comma-separated sizes, e.g. 4x4,8x8,16x16,32x32.
        #[arg(long, default_value = "4x4,8x8,16x16,32x32")]
        sizes: String,
    },
    /// One full run per constellation size.
    SweepNsat {
        #[command(flatten)]
        common: CommonOpts,
        /// Comma-separated satellite counts.
        #[arg(long, default_value = "2,10,40")]
        values: String,
    },
    /// Export the transmit beamforming-gain map of one slot.
    Gainmap {
        #[command(flatten)]
        common: CommonOpts,
        #[arg(long, default_value_t = 0)]
        slot: usize,
        #[arg(long, default_value_t = 0.0)]
        theta_min: f64,
        #[arg(long, default_value_t = 180.0)]
        theta_max: f64,
        #[arg(long, default_value_t = 1.0)]
        theta_step: f64,
        #[arg(long, default_value_t = -90.0)]
        phi_min: f64,
        #[arg(long, default_value_t = 90.0)]
        phi_max: f64,
        #[arg(long, default_value_t = 1.0)]
        phi_step: f64,
    },
    /// Export the utility curve of one slot's scheduled link.
    UtilityCurve {
        #[command(flatten)]
        common: CommonOpts,
        #[arg(long, default_value_t = 0)]
        slot: usize,
        /// Sampling step on the power axis (dB).
        #[arg(long, default_value_t = 0.1)]
        step: f64,
    },
    /// Check a scenario file without running it.
    Validate {
        /// Scenario file (TOML).
        config: PathBuf,
    },
}

fn load_config(common: &CommonOpts) -> Result<ScenarioConfig> {
    let mut cfg = match &common.config {
        Some(path) => ScenarioConfig::from_path(path)?,
        None => ScenarioConfig::default(),
    };
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(mode) = &common.mode {
        cfg.mode = match mode.as_str() {
            "nulling_only" => Mode::NullingOnly,
            "power_control_only" => Mode::PowerControlOnly,
            "joint" => Mode::Joint,
            other => {
                return Err(Error::Config(format!(
                    "unknown mode '{other}', expected nulling_only | power_control_only | joint"
                )))
            }
        };
    }
    if let Some(l) = common.lambda {
        cfg.lambda_list = vec![l];
    }
    if let Some(e) = common.epsilon {
        cfg.epsilon = e;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn write_run_outputs(cfg: &ScenarioConfig, out: &scenario::RunOutput, dir: &Path) -> Result<()> {
    scenario::write_string(
        &dir.join(&cfg.output.records_csv),
        &scenario::records_csv(&out.records),
    )?;
    scenario::write_string(
        &dir.join(&cfg.output.summary_json),
        &scenario::summary_json(&out.summary),
    )?;
    scenario::write_string(
        &dir.join(&cfg.output.manifest_json),
        &scenario::manifest_json(&out.manifest),
    )?;
    if cfg.output.orbits_csv.is_some() || cfg.output.channel_dump_slot.is_some() {
        let asm = assemble(cfg)?;
        if let Some(name) = &cfg.output.orbits_csv {
            scenario::write_string(
                &dir.join(name),
                &coexsim::orbits::states_csv(&asm.trajectories),
            )?;
        }
        if let Some(slot) = cfg.output.channel_dump_slot {
            if slot >= cfg.n_slots {
                return Err(Error::Config(format!(
                    "channel_dump_slot {slot} out of range (n_slots = {})",
                    cfg.n_slots
                )));
            }
            let cs = slot_channels(cfg, &asm, slot)?;
            scenario::write_string(
                &dir.join(format!("channels_slot{slot}.json")),
                &scenario::channel_dump_json(&cs),
            )?;
        }
    }
    Ok(())
}

fn cmd_run(common: &CommonOpts, repeats: usize) -> Result<()> {
    let cfg = load_config(common)?;
    if repeats <= 1 {
        let out = run(&cfg)?;
        write_run_outputs(&cfg, &out, &common.out_dir)?;
        println!(
            "run complete: seed {} mode {} lambda {} | jfi {:.4} worst {:.3} dB power saved {:.2}%",
            cfg.seed,
            cfg.mode,
            cfg.active_lambda(),
            out.summary.jfi,
            out.summary.worst_case_rss_db,
            out.summary.power_decrease_pct
        );
        return Ok(());
    }
    let rep = run_repeated(&cfg, repeats)?;
    for (seed, out) in &rep.per_seed {
        let mut c = cfg.clone();
        c.seed = *seed;
        write_run_outputs(&c, out, &common.out_dir.join(format!("seed_{seed}")))?;
    }
    let mut pooled = serde_json::to_string_pretty(&rep.pooled).expect("pooled serializes");
    pooled.push('\n');
    scenario::write_string(&common.out_dir.join("pooled.json"), &pooled)?;
    println!(
        "{} runs complete: jfi {:.4} worst {:.3} dB power saved {:.2}% (pooled means)",
        rep.pooled.n_runs,
        rep.pooled.jfi_mean,
        rep.pooled.worst_case_rss_db_mean,
        rep.pooled.power_decrease_pct_mean
    );
    Ok(())
}

fn parse_sizes(s: &str) -> Result<Vec<(usize, usize)>> {
    s.split(',')
        .map(|tok| {
            let (a, b) = tok
                .trim()
                .split_once('x')
                .ok_or_else(|| Error::Config(format!("bad array size '{tok}', expected AxB")))?;
            Ok((
                a.parse()
                    .map_err(|_| Error::Config(format!("bad array size '{tok}'")))?,
                b.parse()
                    .map_err(|_| Error::Config(format!("bad array size '{tok}'")))?,
            ))
        })
        .collect()
}

fn run_sweep(common: &CommonOpts, dim: SweepDimension, file: &str) -> Result<()> {
    let cfg = load_config(common)?;
    let entries = sweep(&cfg, &dim)?;
    scenario::write_string(&common.out_dir.join(file), &scenario::sweep_json(&entries))?;
    for e in &entries {
        println!(
            "{}: jfi {:.4} worst {:.3} dB power saved {:.2}%",
            e.key, e.summary.jfi, e.summary.worst_case_rss_db, e.summary.power_decrease_pct
        );
    }
    Ok(())
}

fn cmd_gainmap(
    common: &CommonOpts,
    slot: usize,
    theta: (f64, f64, f64),
    phi: (f64, f64, f64),
) -> Result<()> {
    let cfg = load_config(common)?;
    if slot >= cfg.n_slots {
        return Err(Error::Config(format!(
            "slot {slot} out of range (n_slots = {})",
            cfg.n_slots
        )));
    }
    let asm = assemble(&cfg)?;
    let cs = slot_channels(&cfg, &asm, slot)?;
    let ue = scenario::schedule(slot, cfg.n_ues);
    let (_, active) = slot_beamformers(&cfg, &asm, &cs, ue)?;
    let grid = |(lo, hi, step): (f64, f64, f64)| -> Vec<f64> {
        let mut v = Vec::new();
        let mut x = lo;
        while x <= hi + 1e-9 {
            v.push(x);
            x += step;
        }
        v
    };
    let map = gain_map(&active, &asm.cell.gnb_array, &grid(theta), &grid(phi))?;
    let lambda = cfg.active_lambda();
    let base = format!("gainmap_slot{slot}_lambda{lambda}");
    scenario::write_string(&common.out_dir.join(format!("{base}.csv")), &map.to_csv())?;
    scenario::write_string(
        &common.out_dir.join(format!("{base}_markers.json")),
        &scenario::gainmap_markers_json(cs.ue_local[ue], &cs.sat_local, &map),
    )?;
    println!(
        "gain map written: {} ({} x {} points)",
        common.out_dir.join(format!("{base}.csv")).display(),
        map.theta_deg.len(),
        map.phi_deg.len()
    );
    Ok(())
}

fn cmd_utility_curve(common: &CommonOpts, slot: usize, step: f64) -> Result<()> {
    let cfg = load_config(common)?;
    if slot >= cfg.n_slots {
        return Err(Error::Config(format!(
            "slot {slot} out of range (n_slots = {})",
            cfg.n_slots
        )));
    }
    if !(step > 0.0) {
        return Err(Error::Config("step must be positive".into()));
    }
    let asm = assemble(&cfg)?;
    let cs = slot_channels(&cfg, &asm, slot)?;
    let ue = scenario::schedule(slot, cfg.n_ues);
    let (_, active) = slot_beamformers(&cfg, &asm, &cs, ue)?;
    let gain_db = coexsim::nulling::beamformed_gain_db(&active, &cs.h_ter[ue]);
    let ctx = &asm.ctx;
    let lo = power::rate_floor_dbm(gain_db, ctx).max(ctx.p_min_dbm);
    let hi = power::inr_cap_dbm(&active.w_t, &cs.h_sat, ctx).min(ctx.p_max_dbm);
    let mut points = Vec::new();
    let mut p = ctx.p_min_dbm;
    while p <= ctx.p_max_dbm + 1e-9 {
        points.push((p, power::utility(p, gain_db, ctx), p >= lo && p <= hi));
        p += step;
    }
    let name = format!("utility_slot{slot}.csv");
    scenario::write_string(
        &common.out_dir.join(&name),
        &scenario::utility_curve_csv(&points),
    )?;
    println!(
        "utility curve written: {} (gain {:.2} dB, feasible [{:.2}, {:.2}] dBm)",
        common.out_dir.join(&name).display(),
        gain_db,
        lo,
        hi
    );
    Ok(())
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.cmd {
        Cmd::Run { common, repeats } => cmd_run(&common, repeats),
        Cmd::SweepLambda { common } => {
            let cfg = load_config(&common)?;
            let dim = SweepDimension::Lambda(cfg.lambda_list.clone());
            run_sweep(&common, dim, "sweep_lambda.json")
        }
        Cmd::SweepArray { common, sizes } => {
            let dim = SweepDimension::ArraySize(parse_sizes(&sizes)?);
            run_sweep(&common, dim, "sweep_array.json")
        }
        Cmd::SweepNsat { common, values } => {
            let parsed: Result<Vec<usize>> = values
                .split(',')
                .map(|t| {
                    t.trim()
                        .parse()
                        .map_err(|_| Error::Config(format!("bad satellite count '{t}'")))
                })
                .collect();
            run_sweep(&common, SweepDimension::NSat(parsed?), "sweep_nsat.json")
        }
        Cmd::Gainmap {
            common,
            slot,
            theta_min,
            theta_max,
            theta_step,
            phi_min,
            phi_max,
            phi_step,
        } => cmd_gainmap(
            &common,
            slot,
            (theta_min, theta_max, theta_step),
            (phi_min, phi_max, phi_step),
        ),
        Cmd::UtilityCurve { common, slot, step } => cmd_utility_curve(&common, slot, step),
        Cmd::Validate { config } => {
            let cfg = ScenarioConfig::from_path(&config)?;
            cfg.validate()?;
            println!("ok: {} (hash {})", config.display(), cfg.canonical_hash());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
