//! Experiment drivers shared by the command-line verbs and the tests.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use log::info;
use rayon::prelude::*;
use swimflow::diagnostics::cumulative_integral;
use swimflow::galerkin::max_cutoff;
use swimflow::integrate::step_plan;
use swimflow::spectral::norm_l2;
use swimflow::{
    apply_coupling, energy_ledger, galerkin_reference_step, gronwall_check, if_rk4_step, initial_field, integrate,
    weak_strong_report, Config, EnergyLedger, Error, GronwallReport, ModelParams, RunConfig, State, Trajectory,
};

use crate::error::{CliError, CliResult};
use crate::snapshot::write_snapshot;
use crate::timeseries::{format_row, write_relative, write_table, ENERGY_COLUMNS};

fn create_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

#[derive(Debug, Clone)]
pub struct SimulateSummary {
    pub steps: usize,
    pub dt: f64,
    pub t_end: f64,
    pub initial_energy: f64,
    pub max_abs_defect: Option<f64>,
    pub ledger: Option<EnergyLedger>,
}

/// Runs the configured simulation and writes the energy table and snapshots
/// into `out`. Nothing is written when the run fails.
pub fn simulate(cfg: &Config, out: &Path) -> CliResult<SimulateSummary> {
    let p0 = initial_field(&cfg.run);
    let traj = integrate(&p0, &cfg.run, &cfg.params)?;
    create_dir(out)?;
    let ledger = cfg.run.diagnostics.energy.then(|| energy_ledger(&traj));
    let rows: Vec<Vec<Option<f64>>> = match &ledger {
        Some(l) => crate::timeseries::energy_rows(l),
        None => traj
            .states
            .iter()
            .map(|s| {
                let mut r = vec![None; ENERGY_COLUMNS.len()];
                r[0] = Some(s.t);
                r
            })
            .collect(),
    };
    write_table(&out.join(&cfg.run.output.energy_csv), &ENERGY_COLUMNS, &rows)?;
    if cfg.run.output.snapshots {
        for (i, s) in traj.states.iter().enumerate() {
            write_snapshot(s, &out.join(format!("{}_{i:05}.apfs", cfg.run.output.snapshot_prefix)))?;
        }
    }
    let (steps, _) = step_plan(cfg.run.t_end, cfg.run.dt);
    let summary = SimulateSummary {
        steps,
        dt: traj.dt,
        t_end: traj.last().t,
        initial_energy: 0.5 * norm_l2(&p0).powi(2),
        max_abs_defect: ledger.as_ref().map(|l| l.max_abs_defect()),
        ledger,
    };
    info!("simulate finished {} steps at dt {:e}", summary.steps, summary.dt);
    Ok(summary)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub eps: f64,
    /// `sup_t ‖p_ε - p̃‖` against the reduced model.
    pub sup_distance: f64,
    /// `∫‖u_ε‖²`
    pub u_sq_integral: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    /// Fitted slopes of `log sup‖p_ε - p̃‖` and `log ∫‖u_ε‖²` against `log ε`;
    /// absent for fewer than two rows.
    pub p_slope: Option<f64>,
    pub u_slope: Option<f64>,
}

pub const SWEEP_COLUMNS: [&str; 3] = ["eps", "sup_p_distance", "u_sq_integral"];

pub fn check_eps_list(eps: &[f64]) -> CliResult<()> {
    if eps.is_empty() {
        return Err(CliError::Config("eps list is empty".into()));
    }
    if eps.iter().any(|e| !(*e > 0.0) || !e.is_finite()) {
        return Err(CliError::Config(format!("eps values must be positive, got {eps:?}")));
    }
    if eps.windows(2).any(|w| w[1] >= w[0]) {
        return Err(CliError::Config(format!("eps values must be strictly decreasing, got {eps:?}")));
    }
    Ok(())
}

/// Least-squares slope of `log y` against `log x`.
pub fn log_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() < 2 {
        return None;
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    Some(sxy / sxx)
}

fn u_sq_integral(traj: &Trajectory) -> f64 {
    let ts = traj.times();
    let u: Vec<f64> = (0..traj.states.len()).map(|i| norm_l2(&traj.velocity(i)).powi(2)).collect();
    cumulative_integral(&ts, &u).last().copied().unwrap_or(0.0)
}

/// Runs every `ε` from the same initial field and compares it with the
/// `ε = 0` run. Runs execute in parallel; when `csv` is given, rows are
/// appended in list order as soon as all earlier rows are done.
pub fn sweep(cfg: &Config, eps: &[f64], csv: Option<&Path>) -> CliResult<SweepResult> {
    check_eps_list(eps)?;
    let p0 = initial_field(&cfg.run);
    let with_eps = |e: f64| -> CliResult<ModelParams> {
        let mut p = apply_coupling(cfg.params.base, e)?;
        p.strict = cfg.params.strict;
        Ok(p)
    };
    let reduced = integrate(&p0, &cfg.run, &with_eps(0.0)?)?;

    let writer = match csv {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path).map_err(|e| CliError::io(path, e))?);
            writeln!(w, "{}", SWEEP_COLUMNS.join(",")).map_err(|e| CliError::io(path, e))?;
            w.flush().map_err(|e| CliError::io(path, e))?;
            Some((w, path.to_path_buf()))
        }
        None => None,
    };
    let pending = Mutex::new((0usize, BTreeMap::new(), writer));
    let results: Vec<CliResult<SweepRow>> = eps
        .par_iter()
        .enumerate()
        .map(|(i, &e)| {
            let traj = integrate(&p0, &cfg.run, &with_eps(e)?)?;
            let row = SweepRow {
                eps: e,
                sup_distance: weak_strong_report(&traj, &reduced)?.max_distance,
                u_sq_integral: u_sq_integral(&traj),
            };
            info!("eps {e:e}: distance {:e}", row.sup_distance);
            let mut guard = pending.lock().unwrap();
            let (next, done, writer) = &mut *guard;
            done.insert(i, row);
            while let Some(r) = done.remove(next) {
                if let Some((w, path)) = writer.as_mut() {
                    let line = format_row(&[Some(r.eps), Some(r.sup_distance), Some(r.u_sq_integral)]);
                    writeln!(w, "{line}").and_then(|_| w.flush()).map_err(|err| CliError::io(path, err))?;
                }
                *next += 1;
            }
            Ok(row)
        })
        .collect();
    let rows = results.into_iter().collect::<CliResult<Vec<_>>>()?;
    let xs: Vec<f64> = rows.iter().map(|r| r.eps).collect();
    let p_slope = log_slope(&xs, &rows.iter().map(|r| r.sup_distance).collect::<Vec<_>>());
    let u_slope = log_slope(&xs, &rows.iter().map(|r| r.u_sq_integral).collect::<Vec<_>>());
    Ok(SweepResult { rows, p_slope, u_slope })
}

/// Spectral integrator against the Galerkin oracle from identical data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleReport {
    pub steps: usize,
    pub dt: f64,
    pub max_distance: f64,
    /// Same comparison with the step halved.
    pub max_distance_half: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl OracleReport {
    pub fn improvement(&self) -> f64 {
        self.max_distance / self.max_distance_half
    }
}

pub const ORACLE_TOLERANCE: f64 = 1e-8;
pub const ORACLE_MIN_IMPROVEMENT: f64 = 8.0;

fn oracle_pair(p0: &State, params: &ModelParams, dt: f64, steps: usize) -> CliResult<(Trajectory, Trajectory)> {
    let grid = *p0.p.grid();
    let cutoff = max_cutoff(&grid);
    let (mut a, mut b) = (vec![p0.clone()], vec![p0.clone()]);
    for _ in 0..steps {
        a.push(if_rk4_step(a.last().unwrap(), dt, params)?);
        b.push(galerkin_reference_step(b.last().unwrap(), dt, params, cutoff)?);
    }
    let traj = |states| Trajectory { states, params: *params, grid, dt, sample_every: 1 };
    Ok((traj(a), traj(b)))
}

/// Runs `run.t_end / run.dt` steps of both solvers, and again at half the
/// step over the same interval.
pub fn oracle_twin(cfg: &Config) -> CliResult<OracleReport> {
    if cfg.params.kappa() != 0.0 {
        return Err(Error::StrictModeKappaNonzero(cfg.params.kappa()).into());
    }
    let p0 = State::new(0.0, initial_field(&cfg.run));
    let (steps, dt) = step_plan(cfg.run.t_end, cfg.run.dt);
    let (a, b) = oracle_pair(&p0, &cfg.params, dt, steps)?;
    let (ah, bh) = oracle_pair(&p0, &cfg.params, dt / 2.0, 2 * steps)?;
    let max_distance = weak_strong_report(&a, &b)?.max_distance;
    let max_distance_half = weak_strong_report(&ah, &bh)?.max_distance;
    let improves = max_distance == 0.0 || max_distance / max_distance_half >= ORACLE_MIN_IMPROVEMENT;
    Ok(OracleReport {
        steps,
        dt,
        max_distance,
        max_distance_half,
        tolerance: ORACLE_TOLERANCE,
        pass: max_distance <= ORACLE_TOLERANCE && improves,
    })
}

/// Relative-energy monitor between a coarse run and a restart of the same
/// data at half the step, repeated one level finer.
#[derive(Debug, Clone)]
pub struct GronwallTwin {
    pub report: GronwallReport,
    pub c_min: f64,
    pub c_min_refined: f64,
    pub pass: bool,
}

pub const GRONWALL_STABILITY: f64 = 0.5;

fn twin_level(p0: &swimflow::SpectralVectorField, run: &RunConfig, params: &ModelParams, dt: f64) -> CliResult<GronwallReport> {
    let mut coarse = run.clone();
    coarse.dt = dt;
    let mut fine = coarse.clone();
    fine.dt = dt / 2.0;
    fine.sample_every = 2 * coarse.sample_every;
    let a = integrate(p0, &coarse, params)?;
    let b = integrate(p0, &fine, params)?;
    Ok(gronwall_check(&a, &b, params, run.gronwall_c)?)
}

pub fn gronwall_twin(cfg: &Config) -> CliResult<GronwallTwin> {
    let p0 = initial_field(&cfg.run);
    let (_, dt) = step_plan(cfg.run.t_end, cfg.run.dt);
    let report = twin_level(&p0, &cfg.run, &cfg.params, dt)?;
    let refined = twin_level(&p0, &cfg.run, &cfg.params, dt / 2.0)?;
    let (c_min, c_min_refined) = (report.fitted_c_min, refined.fitted_c_min);
    let stable = if c_min == 0.0 {
        c_min_refined == 0.0
    } else {
        (c_min_refined / c_min - 1.0).abs() <= GRONWALL_STABILITY
    };
    let pass = report.pass && refined.pass && stable;
    Ok(GronwallTwin { report, c_min, c_min_refined, pass })
}

/// Writes the relative-energy table of a twin run.
pub fn write_twin(twin: &GronwallTwin, out: &Path, name: &str) -> CliResult<PathBuf> {
    create_dir(out)?;
    let path = out.join(name);
    write_relative(&twin.report, &path)?;
    Ok(path)
}
