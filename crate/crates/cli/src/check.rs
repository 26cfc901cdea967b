//! Desk-scale self-check suite.

use std::time::Instant;

use num_complex::Complex64;
use swimflow::integrate::step_plan;
use swimflow::spectral::rng::counter_u64;
use swimflow::spectral::{inner, norm_grad, norm_l2, norm_l4, norm_laplacian};
use swimflow::{
    advect, apply_coupling, apriori_bound_check, cubic, energy_ledger, forward, initial_field, integrate, inverse,
    leray_project, linear_symbol, parse_config, random_solenoidal_field, rhs_p, solve_u, strain_coupling, vorticity_coupling,
    BaseCoefficients, Config, Grid, ModelParams, RealVectorField, SpectralVectorField, State,
};

use crate::experiments::{gronwall_twin, log_slope, oracle_twin};
use crate::snapshot::Snapshot;

/// Deliberate defects used to confirm that the suite notices them.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    CubicSign,
}

impl std::str::FromStr for Fault {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "cubic-sign" => Ok(Self::CubicSign),
            _ => Err(format!("unknown fault `{s}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
    pub seconds: f64,
}

type Outcome = (bool, String);

struct Check {
    name: &'static str,
    run: fn(Option<Fault>) -> Outcome,
}

const CHECKS: &[Check] = &[
    Check { name: "transform-roundtrip", run: transform_roundtrip },
    Check { name: "leray-projection", run: leray_projection },
    Check { name: "operator-oracle", run: operator_oracle },
    Check { name: "transport-cancellation", run: transport_cancellation },
    Check { name: "energy-identity", run: energy_identity },
    Check { name: "linear-exactness", run: linear_exactness },
    Check { name: "energy-ledger", run: energy_ledger_order },
    Check { name: "apriori-bound", run: apriori_bound },
    Check { name: "velocity-scaling", run: velocity_scaling },
    Check { name: "oracle-twin", run: oracle },
    Check { name: "gronwall-twin", run: gronwall },
    Check { name: "snapshot-roundtrip", run: snapshot_roundtrip },
    Check { name: "determinism", run: determinism },
];

pub fn check_names() -> Vec<&'static str> {
    CHECKS.iter().map(|c| c.name).collect()
}

/// Runs every check whose name contains `filter`.
pub fn run_checks(filter: Option<&str>, fault: Option<Fault>) -> Vec<CheckResult> {
    CHECKS
        .iter()
        .filter(|c| filter.is_none_or(|f| c.name.contains(f)))
        .map(|c| {
            let start = Instant::now();
            let (pass, detail) = (c.run)(fault);
            CheckResult { name: c.name, pass, detail, seconds: start.elapsed().as_secs_f64() }
        })
        .collect()
}

pub fn format_table(results: &[CheckResult]) -> String {
    let width = results.iter().map(|r| r.name.len()).max().unwrap_or(0);
    let mut out = String::new();
    for r in results {
        let status = if r.pass { "pass" } else { "FAIL" };
        out += &format!("{status}  {:width$}  {:7.2}s  {}\n", r.name, r.seconds, r.detail);
    }
    out
}

fn params(eps: f64) -> ModelParams {
    let base = BaseCoefficients {
        mu1_tilde: 0.5,
        gamma1_tilde: 0.3,
        lambda1_tilde: 1.0,
        mu2: 1.0,
        gamma2: -0.5,
        lambda2: 1.0,
        alpha: 1.0,
        beta: 0.2,
        kappa: 0.0,
    };
    apply_coupling(base, eps).unwrap()
}

fn smooth(grid: &Grid, seed: u64, kc: f64) -> SpectralVectorField {
    random_solenoidal_field(grid, seed, |k| (-k * k / (kc * kc)).exp())
}

fn random_real(grid: &Grid, seed: u64) -> RealVectorField {
    let n = grid.dim() * grid.real_len();
    let v = (0..n as u64).map(|i| (counter_u64(seed, i) >> 11) as f64 / (1u64 << 53) as f64 - 0.5).collect();
    RealVectorField::from_values(*grid, v).unwrap()
}

/// Field with every mode in `|m_j| ≤ band` filled, then made real.
fn band_limited(grid: &Grid, seed: u64, band: i64) -> SpectralVectorField {
    let mut f = SpectralVectorField::zeros(*grid);
    let mut c = 0;
    for m in cube(grid.dim(), band) {
        let mut v = [Complex64::default(); 3];
        for x in v.iter_mut().take(grid.dim()) {
            c += 2;
            let r = |i| (counter_u64(seed, i) >> 11) as f64 / (1u64 << 53) as f64 - 0.5;
            *x = Complex64::new(r(c), r(c + 1));
        }
        f.set_mode(m, v);
    }
    f.symmetrize();
    f
}

fn cube(d: usize, r: i64) -> Vec<[i64; 3]> {
    let rr = |j: usize| if j < d { r } else { 0 };
    let mut out = Vec::new();
    for a in -rr(0)..=rr(0) {
        for b in -rr(1)..=rr(1) {
            for c in -rr(2)..=rr(2) {
                out.push([a, b, c]);
            }
        }
    }
    out
}

fn diff(a: &SpectralVectorField, b: &SpectralVectorField) -> f64 {
    a.sub(b).max_abs()
}

fn transform_roundtrip(_: Option<Fault>) -> Outcome {
    let mut worst: f64 = 0.0;
    for g in [Grid::periodic(3, 16).unwrap(), Grid::new(2, &[32, 12], &[1.0, 3.0]).unwrap()] {
        let f = random_real(&g, 1);
        let back = inverse(&forward(&f)).unwrap();
        worst = f.values().iter().zip(back.values()).fold(worst, |m, (a, b)| m.max((a - b).abs()));
    }
    (worst <= 1e-12, format!("max error {worst:.2e}"))
}

fn leray_projection(_: Option<Fault>) -> Outcome {
    let g = Grid::periodic(3, 16).unwrap();
    let f = forward(&random_real(&g, 2));
    let p = leray_project(&f);
    let idem = diff(&leray_project(&p), &p);
    let orth = inner(&f.sub(&p), &p).abs();
    let ok = idem <= 1e-14 && orth <= 1e-11 * norm_l2(&f).powi(2);
    (ok, format!("idempotence {idem:.2e}, orthogonality {orth:.2e}"))
}

/// Direct convolution of `(a·∇)b`, `|a|²a` and `½(∇a ± ∇aᵀ)b` on the full
/// active band.
fn operator_oracle(_: Option<Fault>) -> Outcome {
    let g = Grid::periodic(3, 8).unwrap();
    let band = 3;
    let a = leray_project(&band_limited(&g, 3, band));
    let b = band_limited(&g, 4, band);
    let modes = cube(3, band);
    let i = Complex64::new(0.0, 1.0);
    let sub = |m: [i64; 3], n: [i64; 3]| [m[0] - n[0], m[1] - n[1], m[2] - n[2]];
    let inside = |m: [i64; 3], r: i64| m.iter().all(|x| x.abs() <= r);
    let dot = |x: [Complex64; 3], y: [Complex64; 3]| (0..3).map(|j| x[j] * y[j]).sum::<Complex64>();
    // |a|² has support up to twice the band
    let squares: Vec<([i64; 3], Complex64)> = cube(3, 2 * band)
        .into_iter()
        .map(|m| {
            let s = modes.iter().filter(|n| inside(sub(m, **n), band)).map(|n| dot(a.mode(*n), a.mode(sub(m, *n)))).sum();
            (m, s)
        })
        .collect();
    let mut adv = SpectralVectorField::zeros(g);
    let mut cub = SpectralVectorField::zeros(g);
    let mut skw = SpectralVectorField::zeros(g);
    let mut sym = SpectralVectorField::zeros(g);
    let wave = |m: [i64; 3]| g.wavevector_of(m).map(|k| Complex64::new(k, 0.0));
    for &m in &modes {
        let mut acc = [Complex64::default(); 3];
        let (mut acc_skw, mut acc_sym) = (acc, acc);
        for &n in modes.iter().filter(|n| inside(sub(m, **n), band)) {
            let (va, vb, ka) = (a.mode(n), b.mode(sub(m, n)), wave(n));
            let s = dot(va, wave(sub(m, n))) * i;
            let (grad_b, ab) = (dot(vb, ka) * i, dot(va, vb) * i);
            for j in 0..3 {
                acc[j] += s * vb[j];
                acc_skw[j] += 0.5 * (va[j] * grad_b - ab * ka[j]);
                acc_sym[j] += 0.5 * (va[j] * grad_b + ab * ka[j]);
            }
        }
        adv.set_mode(m, acc);
        skw.set_mode(m, acc_skw);
        sym.set_mode(m, acc_sym);
        let mut acc = [Complex64::default(); 3];
        for &(ms, s) in &squares {
            let n = sub(m, ms);
            if inside(n, band) {
                let va = a.mode(n);
                for j in 0..3 {
                    acc[j] += s * va[j];
                }
            }
        }
        cub.set_mode(m, acc);
    }
    let errs = [
        diff(&advect(&a, &b).unwrap(), &adv),
        diff(&cubic(&a), &cub),
        diff(&vorticity_coupling(&a, &b).unwrap(), &skw),
        diff(&strain_coupling(&a, &b).unwrap(), &sym),
    ];
    let ok = errs.iter().all(|e| *e <= 1e-11);
    let [e0, e1, e2, e3] = errs;
    (ok, format!("advect {e0:.2e}, cubic {e1:.2e}, vorticity {e2:.2e}, strain {e3:.2e}"))
}

fn transport_cancellation(_: Option<Fault>) -> Outcome {
    let g = Grid::periodic(3, 8).unwrap();
    let u = leray_project(&band_limited(&g, 5, 3));
    let p = leray_project(&band_limited(&g, 6, 3));
    let skew = inner(&vorticity_coupling(&u, &p).unwrap(), &p).abs();
    let adv = inner(&advect(&u, &p).unwrap(), &p).abs();
    (skew <= 1e-11 && adv <= 1e-11, format!("skew {skew:.2e}, transport {adv:.2e}"))
}

fn energy_identity(fault: Option<Fault>) -> Outcome {
    let g = Grid::periodic(3, 16).unwrap();
    let pr = params(0.4);
    let p = smooth(&g, 7, 2.0);
    let u = solve_u(&p, &pr);
    let mut t = rhs_p(&p, &u, &pr).unwrap().dpdt;
    if fault == Some(Fault::CubicSign) {
        t.axpy(2.0 * pr.alpha(), &leray_project(&cubic(&p)));
    }
    let rate = inner(&t, &p);
    let dissipation = pr.mu2() * norm_laplacian(&p).powi(2)
        + pr.gamma2() * norm_grad(&p).powi(2)
        + pr.alpha() * norm_l4(&p).powi(4)
        + pr.beta() * norm_l2(&p).powi(2);
    let err = (rate + dissipation).abs() / dissipation.abs();
    (err <= 1e-10, format!("relative error {err:.2e}"))
}

fn linear_exactness(_: Option<Fault>) -> Outcome {
    let g = Grid::periodic(2, 16).unwrap();
    let mut pr = params(0.0);
    pr.base.lambda2 = 0.0;
    pr.base.alpha = 0.0;
    let m = [2, -1, 0];
    let k = g.wavevector_of(m);
    let a = Complex64::new(0.4, -0.1);
    let amp = [a * k[1], -a * k[0], Complex64::default()];
    let mut p = SpectralVectorField::zeros(g);
    p.set_mode(m, amp);
    let mut cfg = swimflow::RunConfig::new(g);
    cfg.dt = 0.01;
    cfg.t_end = 1.0;
    cfg.sample_every = 10;
    let traj = integrate(&p, &cfg, &pr).unwrap();
    let l = linear_symbol(k[0].hypot(k[1]), &pr);
    let mut worst: f64 = 0.0;
    for s in &traj.states {
        let got = s.p.mode(m);
        for j in 0..2 {
            worst = worst.max((got[j] - amp[j] * (l * s.t).exp()).norm());
        }
    }
    (worst <= 1e-8, format!("max error {worst:.2e}"))
}

fn energy_ledger_order(_: Option<Fault>) -> Outcome {
    let g = Grid::periodic(2, 32).unwrap();
    let pr = apply_coupling(BaseCoefficients { gamma2: -1.5, beta: 0.5, ..Default::default() }, 0.1).unwrap();
    let p0 = smooth(&g, 8, 1.0);
    let defect = |dt: f64| {
        let mut c = swimflow::RunConfig::new(g);
        c.dt = dt;
        c.t_end = 0.5;
        energy_ledger(&integrate(&p0, &c, &pr).unwrap()).max_abs_defect()
    };
    let (a, b) = (defect(2e-3), defect(1e-3));
    let e0 = 0.5 * norm_l2(&p0).powi(2);
    let order = (a / b).log2();
    (b <= 1e-6 * e0 && order >= 2.0, format!("defect {:.2e} E(0), order {order:.2}", b / e0))
}

fn apriori_bound(_: Option<Fault>) -> Outcome {
    let g = Grid::periodic(2, 32).unwrap();
    let mut pr = params(0.1);
    pr.base.gamma2 = -1.0;
    pr.base.beta = -1.0;
    let p0 = smooth(&g, 9, 1.5);
    let mut c = swimflow::RunConfig::new(g);
    c.dt = 2e-3;
    c.t_end = 1.0;
    c.sample_every = 5;
    let traj = integrate(&p0, &c, &pr).unwrap();
    let check = apriori_bound_check(&energy_ledger(&traj), &pr, c.t_end, g.volume());
    (check.pass, format!("margin {:.3e}", check.margin))
}

fn velocity_scaling(_: Option<Fault>) -> Outcome {
    let g = Grid::periodic(2, 16).unwrap();
    let p0 = smooth(&g, 10, 1.5);
    let eps = [1e-1, 1e-2, 1e-3];
    let ints: Vec<f64> = eps
        .iter()
        .map(|&e| {
            let mut c = swimflow::RunConfig::new(g);
            c.dt = 5e-3;
            c.t_end = 0.3;
            energy_ledger(&integrate(&p0, &c, &params(e)).unwrap()).u_sq_integral()
        })
        .collect();
    let slope = log_slope(&eps, &ints).unwrap();
    ((slope - 2.0).abs() <= 0.1, format!("slope {slope:.4}"))
}

fn config(text: &str) -> Config {
    parse_config(text).expect("built-in check config parses")
}

fn oracle(_: Option<Fault>) -> Outcome {
    let cfg = config(
        "[model]\nepsilon = 0.3\ngamma2 = -0.5\nbeta = 0.2\n[grid]\ndim = 3\nn = 8\n\
         [init]\nseed = 11\nk_cut = 1.4142135623730951\n[time]\ndt = 1e-4\nt_end = 1e-3\n",
    );
    match oracle_twin(&cfg) {
        Ok(r) => (r.pass, format!("distance {:.2e}, improvement {:.1}x", r.max_distance, r.improvement())),
        Err(e) => (false, e.to_string()),
    }
}

/// Every active mode of the 8π box is linearly unstable, so the twin
/// difference needs a positive constant.
pub const GRONWALL_TWIN_CONFIG: &str = "[model]\nepsilon = 0.2\ngamma2 = -2.0\nbeta = -1.0\n\
    [grid]\ndim = 2\nn = 8\nlength = 25.132741228718345\n\
    [init]\nseed = 10\nk_cut = 1.0\nrms = 0.3\n[time]\ndt = 0.025\nt_end = 1.0\n";

fn gronwall(_: Option<Fault>) -> Outcome {
    match gronwall_twin(&config(GRONWALL_TWIN_CONFIG)) {
        Ok(t) => (t.pass && t.c_min > 0.0, format!("c_min {:.3e}, refined {:.3e}", t.c_min, t.c_min_refined)),
        Err(e) => (false, e.to_string()),
    }
}

fn snapshot_roundtrip(_: Option<Fault>) -> Outcome {
    let g = Grid::new(3, &[8, 6, 4], &[1.0, 2.0, 3.0]).unwrap();
    let state = State::new(0.75, smooth(&g, 12, 2.0));
    let snap = Snapshot::from_state(&state).unwrap();
    let bytes = snap.encode();
    let back = Snapshot::decode(&bytes).unwrap();
    let again = Snapshot::from_state(&back.to_state()).unwrap().encode();
    let same = back == snap && bytes == back.encode();
    let drift = snap.field.values().iter().zip(Snapshot::decode(&again).unwrap().field.values())
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    (same && drift <= 1e-14, format!("{} bytes, spectral re-encode drift {drift:.1e}", bytes.len()))
}

fn determinism(_: Option<Fault>) -> Outcome {
    let cfg = config("[model]\nepsilon = 0.2\n[grid]\ndim = 2\nn = 16\n[init]\nseed = 5\n[time]\nt_end = 0.1\n");
    let run = || {
        let traj = integrate(&initial_field(&cfg.run), &cfg.run, &cfg.params).unwrap();
        Snapshot::from_state(traj.last()).unwrap().encode()
    };
    let (steps, _) = step_plan(cfg.run.t_end, cfg.run.dt);
    (run() == run(), format!("{steps} steps"))
}
