//! Acceptance criteria; one line per criterion.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use swimflow::spectral::norm_l2;
use swimflow::{apriori_bound_check, energy_ledger, initial_field, integrate, parse_config, Config};
use swimflow_cli::check::{run_checks, GRONWALL_TWIN_CONFIG};
use swimflow_cli::experiments::{gronwall_twin, oracle_twin, sweep, SweepResult, GRONWALL_STABILITY};

struct Outcome {
    pass: bool,
    detail: String,
}

fn config(text: &str) -> Config {
    parse_config(text).unwrap()
}

fn energy_inequality() -> Outcome {
    let cfg = config(
        "[model]\nepsilon = 0.1\n[grid]\ndim = 2\nn = 64\n[init]\nseed = 1\nk_cut = 1.0\n\
         [time]\nt_end = 1.0\n[diagnostics]\napriori = false\n",
    );
    assert!(cfg.run.dt_estimated);
    let p0 = initial_field(&cfg.run);
    let e0 = 0.5 * norm_l2(&p0).powi(2);
    let defect = |dt: f64| {
        let mut run = cfg.run.clone();
        run.dt = dt;
        energy_ledger(&integrate(&p0, &run, &cfg.params).unwrap()).max_abs_defect()
    };
    let (coarse, fine) = (defect(cfg.run.dt), defect(cfg.run.dt / 2.0));
    let order = (coarse / fine).log2();
    Outcome {
        pass: coarse <= 1e-6 * e0 && order >= 2.0,
        detail: format!(
            "64^2, dt {:.3e}: max |defect| {:.2e} E(0), halved {:.2e} E(0), order {order:.2}",
            cfg.run.dt,
            coarse / e0,
            fine / e0
        ),
    }
}

fn apriori_bound() -> Outcome {
    let cfg = config(
        "[model]\nepsilon = 0.1\nmu2 = 1.0\nalpha = 1.0\ngamma2 = -1.0\nbeta = -1.0\n[grid]\ndim = 2\nn = 64\n\
         [init]\nseed = 2\nk_cut = 1.0\n[time]\nt_end = 1.0\nsample_every = 10\n",
    );
    let p0 = initial_field(&cfg.run);
    let traj = integrate(&p0, &cfg.run, &cfg.params).unwrap();
    let volume = (2.0 * PI).powi(2);
    let rhs = norm_l2(&p0).powi(2) + cfg.run.t_end * volume * 2.25 / cfg.params.alpha();
    let check = apriori_bound_check(&energy_ledger(&traj), &cfg.params, cfg.run.t_end, volume);
    let worst = check.lhs.iter().fold(f64::MIN, |m, v| m.max(*v));
    Outcome {
        pass: check.pass && (check.rhs - rhs).abs() <= 1e-12 * rhs && worst <= rhs,
        detail: format!("64^2: max lhs {worst:.4e} <= rhs {rhs:.4e}"),
    }
}

const EPS: [f64; 5] = [1e-1, 3e-2, 1e-2, 3e-3, 1e-3];

fn run_sweep() -> SweepResult {
    let cfg = config(
        "[model]\nepsilon = 0.1\n[grid]\ndim = 2\nn = 32\n[init]\nseed = 2\nk_cut = 1.0\n\
         [time]\nt_end = 1.0\nsample_every = 10\n",
    );
    sweep(&cfg, &EPS, None).unwrap()
}

fn velocity_scaling(s: &SweepResult) -> Outcome {
    let slope = s.u_slope.unwrap();
    Outcome {
        pass: (slope - 2.0).abs() <= 0.1,
        detail: format!("32^2: slope of log int |u|^2 vs log eps {slope:.4}"),
    }
}

fn model_reduction(s: &SweepResult) -> Outcome {
    let slope = s.p_slope.unwrap();
    let monotone = s.rows.windows(2).all(|w| w[1].sup_distance < w[0].sup_distance);
    Outcome {
        pass: (slope - 1.0).abs() <= 0.15 && monotone,
        detail: format!(
            "32^2: slope of log sup |p_eps - p_0| vs log eps {slope:.4}, monotone {monotone}, distances {:.2e} .. {:.2e}",
            s.rows[0].sup_distance,
            s.rows[EPS.len() - 1].sup_distance
        ),
    }
}

fn oracle_agreement() -> Outcome {
    let cfg = config(
        "[model]\nepsilon = 0.3\ngamma2 = -0.5\nbeta = 0.2\n[grid]\ndim = 3\nn = 8\n\
         [init]\nseed = 11\nk_cut = 1.4142135623730951\n[time]\ndt = 1e-4\nt_end = 1e-3\n",
    );
    let r = oracle_twin(&cfg).unwrap();
    Outcome {
        pass: r.pass && r.steps == 10,
        detail: format!(
            "8^3, {} steps: max distance {:.2e}, halved {:.2e}, improvement {:.1}x",
            r.steps,
            r.max_distance,
            r.max_distance_half,
            r.improvement()
        ),
    }
}

fn relative_energy_monitor() -> Outcome {
    let t = gronwall_twin(&config(GRONWALL_TWIN_CONFIG)).unwrap();
    let change = t.c_min_refined / t.c_min - 1.0;
    Outcome {
        pass: t.pass && t.c_min.is_finite() && change.abs() <= GRONWALL_STABILITY,
        detail: format!("c_min {:.3e}, after halving {:.3e} ({:+.0}%)", t.c_min, t.c_min_refined, 100.0 * change),
    }
}

fn from_checks(filters: &[&str]) -> Outcome {
    let results: Vec<_> = filters.iter().flat_map(|f| run_checks(Some(f), None)).collect();
    Outcome {
        pass: !results.is_empty() && results.iter().all(|r| r.pass),
        detail: results.iter().map(|r| format!("{}: {}", r.name, r.detail)).collect::<Vec<_>>().join("; "),
    }
}

fn main() -> ExitCode {
    let mut failed = 0;
    let mut report = |id: usize, name: &str, limit: Duration, f: &mut dyn FnMut() -> Outcome| {
        let start = Instant::now();
        let o = f();
        let took = start.elapsed();
        let pass = o.pass && took <= limit;
        if !pass {
            failed += 1;
        }
        let status = if pass { "PASS" } else { "FAIL" };
        println!("{status} [{id}] {name}: {} ({:.1}s, limit {}s)", o.detail, took.as_secs_f64(), limit.as_secs());
    };
    let mins = |m: u64| Duration::from_secs(60 * m);
    report(1, "energy inequality", mins(2), &mut energy_inequality);
    report(2, "a priori bound", mins(2), &mut apriori_bound);
    let start = Instant::now();
    let s = run_sweep();
    let sweep_time = start.elapsed();
    println!("     shared coupling sweep took {:.1}s", sweep_time.as_secs_f64());
    report(3, "velocity bound scaling", mins(10).saturating_sub(sweep_time), &mut || velocity_scaling(&s));
    report(4, "model reduction", mins(10).saturating_sub(sweep_time), &mut || model_reduction(&s));
    report(5, "oracle agreement", mins(1), &mut oracle_agreement);
    report(6, "relative energy monitor", mins(5), &mut relative_energy_monitor);
    report(7, "operator oracles", mins(1), &mut || from_checks(&["operator-oracle", "transport-cancellation"]));
    report(8, "linear exactness", Duration::from_secs(10), &mut || from_checks(&["linear-exactness"]));
    println!("{} of 8 criteria passed", 8 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
