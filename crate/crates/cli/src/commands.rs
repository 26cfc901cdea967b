//! Command-line verbs.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use log::warn;
use swimflow::{parse_config, Config};

use crate::check::{format_table, run_checks, Fault};
use crate::error::{exit, CliError, CliResult};
use crate::experiments::{gronwall_twin, oracle_twin, simulate, sweep, write_twin, SWEEP_COLUMNS};
use crate::timeseries::{format_value, write_table};

#[derive(Debug, Parser)]
#[command(name = "swimflow", version, about = "Stokes-coupled polar active suspension solver")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Configuration file.
    #[arg(long, value_name = "PATH")]
    pub config: PathBuf,
    /// Output directory, overriding the configured one.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Random seed of the initial field, overriding the configured one.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one simulation and write the energy table and snapshots.
    Simulate(Common),
    /// Run a list of coupling strengths against the uncoupled model.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Comma-separated, strictly decreasing coupling strengths.
        #[arg(long, value_name = "LIST", value_delimiter = ',', required = true)]
        eps: Vec<f64>,
    },
    /// Compare the integrator with the Galerkin reference solver.
    Twin(Common),
    /// Run the self-check suite.
    Check {
        /// Accepted for symmetry with the other verbs; the suite uses its own setups.
        #[arg(long, value_name = "PATH")]
        config: Option<PathBuf>,
        /// Only run checks whose name contains this text.
        #[arg(long, value_name = "NAME")]
        filter: Option<String>,
        #[arg(long, hide = true)]
        inject_fault: Option<Fault>,
    },
    /// Print the resolved configuration.
    DumpConfig(Common),
}

pub fn load_config(common: &Common) -> CliResult<(Config, PathBuf)> {
    let text = fs::read_to_string(&common.config).map_err(|e| CliError::io(&common.config, e))?;
    let mut cfg = parse_config(&text).map_err(|e| CliError::Config(format!("{}: {e}", common.config.display())))?;
    if let Some(seed) = common.seed {
        cfg.run.seed = seed;
    }
    if let Some(out) = &common.out {
        cfg.run.output.dir = out.display().to_string();
    }
    let out = PathBuf::from(&cfg.run.output.dir);
    Ok((cfg, out))
}

/// Executes a parsed command line and returns the exit status.
pub fn run(cli: Cli, stdout: &mut dyn Write) -> u8 {
    let result = match cli.command {
        Command::Simulate(c) => cmd_simulate(&c, stdout),
        Command::Sweep { common, eps } => cmd_sweep(&common, &eps, stdout),
        Command::Twin(c) => cmd_twin(&c, stdout),
        Command::Check { config, filter, inject_fault } => {
            if let Some(path) = config {
                if let Err(e) = fs::metadata(&path) {
                    return report(&CliError::io(&path, e));
                }
            }
            Ok(cmd_check(filter.as_deref(), inject_fault, stdout))
        }
        Command::DumpConfig(c) => load_config(&c).map(|(cfg, _)| {
            let _ = write!(stdout, "{}", cfg.canonical());
            exit::OK
        }),
    };
    result.unwrap_or_else(|e| report(&e))
}

fn report(e: &CliError) -> u8 {
    eprintln!("error: {e}");
    e.exit_code()
}

fn cmd_simulate(common: &Common, stdout: &mut dyn Write) -> CliResult<u8> {
    let (cfg, out) = load_config(common)?;
    let s = simulate(&cfg, &out)?;
    let _ = writeln!(stdout, "steps {} dt {:e} t_end {}", s.steps, s.dt, s.t_end);
    if let Some(d) = s.max_abs_defect {
        let _ = writeln!(stdout, "max |balance defect| {:e} ({:e} of E(0))", d, d / s.initial_energy);
    }
    Ok(exit::OK)
}

fn cmd_sweep(common: &Common, eps: &[f64], stdout: &mut dyn Write) -> CliResult<u8> {
    let (cfg, out) = load_config(common)?;
    crate::experiments::check_eps_list(eps)?;
    fs::create_dir_all(&out).map_err(|e| CliError::io(&out, e))?;
    let result = sweep(&cfg, eps, Some(&out.join("sweep.csv")))?;
    let _ = writeln!(stdout, "{}", SWEEP_COLUMNS.join(" "));
    for r in &result.rows {
        let _ = writeln!(stdout, "{:e} {:e} {:e}", r.eps, r.sup_distance, r.u_sq_integral);
    }
    write_fit(&out.join("sweep_fit.csv"), result.p_slope, result.u_slope)?;
    match (result.p_slope, result.u_slope) {
        (Some(p), Some(u)) => {
            let _ = writeln!(stdout, "slope p-distance {p:.4} u-norm-squared {u:.4}");
        }
        _ => {
            let _ = writeln!(stdout, "insufficient for slope");
        }
    }
    Ok(exit::OK)
}

fn write_fit(path: &Path, p: Option<f64>, u: Option<f64>) -> CliResult<()> {
    let status = if p.is_some() { "ok" } else { "insufficient for slope" };
    let text = format!("p_slope,u_slope,status\n{},{},{status}\n", format_value(p), format_value(u));
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

fn cmd_twin(common: &Common, stdout: &mut dyn Write) -> CliResult<u8> {
    let (cfg, out) = load_config(common)?;
    if cfg.run.grid.num_points() > 4096 {
        warn!("the Galerkin reference is slow beyond 16^3 points");
    }
    let r = oracle_twin(&cfg)?;
    let _ = writeln!(
        stdout,
        "oracle: {} steps at dt {:e}, max distance {:e} (tolerance {:e}), halved {:e}, improvement {:.1}x",
        r.steps,
        r.dt,
        r.max_distance,
        r.tolerance,
        r.max_distance_half,
        r.improvement()
    );
    let g = gronwall_twin(&cfg)?;
    let path = write_twin(&g, &out, &cfg.run.output.relative_csv)?;
    write_table(
        &out.join("twin.csv"),
        &["steps", "dt", "max_distance", "max_distance_half", "c_min", "c_min_refined"],
        &[vec![
            Some(r.steps as f64),
            Some(r.dt),
            Some(r.max_distance),
            Some(r.max_distance_half),
            Some(g.c_min),
            Some(g.c_min_refined),
        ]],
    )?;
    let _ = writeln!(
        stdout,
        "relative energy: c_min {:e}, refined {:e}, table {}",
        g.c_min,
        g.c_min_refined,
        path.display()
    );
    let _ = writeln!(stdout, "{}", if r.pass { "pass" } else { "FAIL" });
    Ok(if r.pass { exit::OK } else { exit::NUMERIC })
}

fn cmd_check(filter: Option<&str>, fault: Option<Fault>, stdout: &mut dyn Write) -> u8 {
    let results = run_checks(filter, fault);
    if results.is_empty() {
        let _ = writeln!(stdout, "no check matches the filter");
        return exit::CHECK;
    }
    let _ = write!(stdout, "{}", format_table(&results));
    let failed = results.iter().filter(|r| !r.pass).count();
    let _ = writeln!(stdout, "{} passed, {failed} failed", results.len() - failed);
    if failed == 0 {
        exit::OK
    } else {
        exit::CHECK
    }
}
