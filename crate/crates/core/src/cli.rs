//! `forkwork` command line: `analytic`, `simulate` and `sweep`.
//!
//! Exit codes: 0 on success, 1 for configuration or input errors, 2 for
//! numerical failures (quadrature non-convergence, unreliable estimates).

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::analytic::{average_block_energy, AnalyticResult};
use crate::config_file::{config_hash, load_config};
use crate::error::{Error, Result};
use crate::model::SystemConfig;
use crate::simulator::{self, SimulationSummary};
use crate::sweep::{fmt_f64, load_sweep, run_sweep, SweepSpec};

pub const ANALYTIC_HEADER: &str =
    "p_n,p_n_error,e_s,e_tm,e_tu,round_energy,energy_analytic,energy_error,quadrature_error,seed,config_hash";

pub const SIMULATE_HEADER: &str = "p_n_sim,p_n_se,p_n_ci_low,p_n_ci_high,fork_rate,rounds_mean,rounds_se,energy_sim,energy_se,e_s,e_s_se,e_tm,e_tm_se,e_tu,e_tu_se,system_energy_ext,capped_blocks,round_trials,block_trials,seed,config_hash";

#[derive(Debug, Parser)]
#[command(
    name = "forkwork",
    version,
    about = "Forking probability and block energy for wireless mobile miners"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate the no-forking probability and average block energy by quadrature.
    Analytic { config: PathBuf },
    /// Estimate the same quantities by Monte Carlo.
    Simulate {
        config: PathBuf,
        /// Independent rounds for the fork rate.
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        /// Independent blocks for rounds and energy (default: trials / 10, at least 100).
        #[arg(long)]
        blocks: Option<u64>,
        /// Overrides the config's `rng_seed`.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run a parameter sweep from a spec file or a built-in preset.
    Sweep {
        #[arg(required_unless_present = "preset", conflicts_with = "preset")]
        spec: Option<PathBuf>,
        #[arg(long, value_parser = ["fig2", "fig3", "fig4"])]
        preset: Option<String>,
        /// Output CSV path (stdout when absent). Warnings go to `<out>.warnings`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Exit code for a failed command.
pub fn exit_code(err: &Error) -> i32 {
    if err.is_numerical() {
        2
    } else {
        1
    }
}

pub fn analytic_row(config: &SystemConfig, r: &AnalyticResult) -> String {
    [
        fmt_f64(r.p_n),
        fmt_f64(r.p_n_error),
        fmt_f64(r.exp_min_compute),
        fmt_f64(r.exp_mobility),
        fmt_f64(r.exp_uplink),
        fmt_f64(r.exp_round_energy),
        fmt_f64(r.avg_block_energy),
        fmt_f64(r.energy_error),
        fmt_f64(r.quadrature_error),
        config.rng_seed.to_string(),
        config_hash(config),
    ]
    .join(",")
}

pub fn simulate_row(s: &SimulationSummary) -> String {
    [
        fmt_f64(s.no_fork.mean),
        fmt_f64(s.no_fork.se),
        fmt_f64(s.no_fork.ci_low),
        fmt_f64(s.no_fork.ci_high),
        fmt_f64(s.fork_rate.mean),
        fmt_f64(s.rounds.mean),
        fmt_f64(s.rounds.se),
        fmt_f64(s.block_energy.mean),
        fmt_f64(s.block_energy.se),
        fmt_f64(s.min_compute.mean),
        fmt_f64(s.min_compute.se),
        fmt_f64(s.mobility.mean),
        fmt_f64(s.mobility.se),
        fmt_f64(s.uplink.mean),
        fmt_f64(s.uplink.se),
        fmt_f64(s.system_block_energy.mean),
        s.capped_blocks.to_string(),
        s.round_trials.to_string(),
        s.block_trials.to_string(),
        s.seed.to_string(),
        config_hash(&s.config),
    ]
    .join(",")
}

/// CSV for `forkwork analytic`.
pub fn cmd_analytic(config: &SystemConfig) -> Result<(String, AnalyticResult)> {
    let r = average_block_energy(config)?;
    Ok((
        format!("{ANALYTIC_HEADER}\n{}\n", analytic_row(config, &r)),
        r,
    ))
}

/// CSV for `forkwork simulate`.
pub fn cmd_simulate(
    config: &SystemConfig,
    trials: u64,
    blocks: Option<u64>,
) -> Result<(String, SimulationSummary)> {
    let blocks = blocks.unwrap_or((trials / 10).max(simulator::MIN_TRIALS));
    let s = simulator::estimate(config, trials, blocks)?;
    Ok((format!("{SIMULATE_HEADER}\n{}\n", simulate_row(&s)), s))
}

/// Runs a parsed command, writing CSV to `out` and diagnostics to `err`.
pub fn run(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    match execute(cli, out, err) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            if let Error::InvalidConfig(issues) = &e {
                for issue in issues {
                    let _ = writeln!(err, "  {issue}");
                }
            }
            exit_code(&e)
        }
    }
}

fn execute(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    match &cli.command {
        Command::Analytic { config } => {
            let config = load_config(config)?;
            let (csv, r) = cmd_analytic(&config)?;
            writeln!(
                err,
                "p_n = {:.6} (±{:.1e})  E[S*] = {:.6} s  E[T_m] = {:.6} s  E[T_u] = {:.6} s  energy/block = {:.6} J",
                r.p_n, r.p_n_error, r.exp_min_compute, r.exp_mobility, r.exp_uplink, r.avg_block_energy
            )?;
            out.write_all(csv.as_bytes())?;
        }
        Command::Simulate {
            config,
            trials,
            blocks,
            seed,
        } => {
            let mut config = load_config(config)?;
            if let Some(seed) = seed {
                config.rng_seed = *seed;
            }
            let (csv, s) = cmd_simulate(&config, *trials, *blocks)?;
            writeln!(
                err,
                "p̂_n = {:.6} ± {:.1e}  rounds/block = {:.4}  energy/block = {:.6} J",
                s.no_fork.mean, s.no_fork.se, s.rounds.mean, s.block_energy.mean
            )?;
            out.write_all(csv.as_bytes())?;
        }
        Command::Sweep {
            spec,
            preset,
            out: path,
        } => {
            let spec = match (spec, preset) {
                (_, Some(name)) => SweepSpec::preset(name)?,
                (Some(p), None) => load_sweep(p)?,
                (None, None) => return Err(Error::InvalidSweep("no sweep spec given".into())),
            };
            let result = run_sweep(&spec)?;
            let csv = result.csv();
            let warnings = result.warnings();
            match path {
                Some(p) => {
                    std::fs::write(p, &csv)?;
                    if !warnings.is_empty() {
                        let mut sidecar = p.clone().into_os_string();
                        sidecar.push(".warnings");
                        std::fs::write(sidecar, warnings.join("\n") + "\n")?;
                    }
                }
                None => out.write_all(csv.as_bytes())?,
            }
            for w in &warnings {
                writeln!(err, "warning: {w}")?;
            }
        }
    }
    Ok(())
}
