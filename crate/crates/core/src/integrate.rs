//! Integrating-factor RK4 time stepping.

use log::{debug, warn};

use crate::config::RunConfig;
use crate::diagnostics::apriori_rhs;
use crate::error::{Error, Result};
use crate::operators::{evaluate_nonlinear, solve_u};
use crate::params::ModelParams;
use crate::spectral::ops::leray_project_in_place;
use crate::spectral::{norm_l2, norm_l4, norm_laplacian, Grid, SpectralVectorField};

const C_ADV: f64 = 0.03125;
const C_CUB: f64 = 0.015625;
const APRIORI_SLACK: f64 = 0.01;

/// A sampled time and the polar field at that time.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub t: f64,
    pub p: SpectralVectorField,
}

impl State {
    pub fn new(t: f64, p: SpectralVectorField) -> Self {
        Self { t, p }
    }
}

/// States sampled at a uniform interval.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub states: Vec<State>,
    pub params: ModelParams,
    pub grid: Grid,
    /// Step size actually used.
    pub dt: f64,
    pub sample_every: usize,
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.t).collect()
    }

    /// Velocity at sample `i`, recomputed from `p`.
    pub fn velocity(&self, i: usize) -> SpectralVectorField {
        solve_u(&self.states[i].p, &self.params)
    }

    pub fn last(&self) -> &State {
        self.states.last().expect("trajectory holds at least the initial state")
    }

    /// Spacing between samples.
    pub fn sample_interval(&self) -> f64 {
        self.dt * self.sample_every as f64
    }
}

/// `L(k) = -(μ2|k|⁴ + γ2|k|² + β)` for wavenumber magnitude `k`.
pub fn linear_symbol(k: f64, params: &ModelParams) -> f64 {
    let k2 = k * k;
    -(params.mu2() * k2 * k2 + params.gamma2() * k2 + params.beta())
}

/// Cached exponentials of the linear symbol for one step size.
#[derive(Debug, Clone)]
pub struct Stepper {
    grid: Grid,
    dt: f64,
    full: Vec<f64>,
    half: Vec<f64>,
}

impl Stepper {
    pub fn new(grid: &Grid, dt: f64, params: &ModelParams) -> Self {
        let (full, half) = grid
            .table()
            .k2
            .iter()
            .map(|&k2| {
                let l = linear_symbol(k2.sqrt(), params);
                ((l * dt).exp(), (0.5 * l * dt).exp())
            })
            .unzip();
        Self { grid: *grid, dt, full, half }
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    fn apply(&self, mult: &[f64], f: &mut SpectralVectorField) {
        let n = self.grid.spec_len();
        let sol = f.is_solenoidal();
        for chunk in f.coeffs_mut().chunks_mut(n) {
            for (c, m) in chunk.iter_mut().zip(mult) {
                *c *= *m;
            }
        }
        if sol {
            f.mark_solenoidal();
        }
    }

    fn times(&self, mult: &[f64], f: &SpectralVectorField) -> SpectralVectorField {
        let mut out = f.clone();
        self.apply(mult, &mut out);
        out
    }

    /// Advances `p` by one step. The nonlinear part is evaluated four times,
    /// each with a freshly solved velocity.
    pub fn step(&self, p: &SpectralVectorField, params: &ModelParams) -> SpectralVectorField {
        let dt = self.dt;
        if dt == 0.0 {
            return p.clone();
        }
        let n = |v: &SpectralVectorField| evaluate_nonlinear(v, params);

        let k1 = n(p);
        let mut a = p.clone();
        a.axpy(0.5 * dt, &k1);
        let v2 = self.times(&self.half, &a);
        let k2 = n(&v2);

        let ep_half = self.times(&self.half, p);
        let mut v3 = ep_half.clone();
        v3.axpy(0.5 * dt, &k2);
        let k3 = n(&v3);

        let ep = self.times(&self.full, p);
        let mut v4 = ep.clone();
        v4.axpy(dt, &self.times(&self.half, &k3));
        let k4 = n(&v4);

        let mut mid = k2;
        mid.axpy(1.0, &k3);
        let mut out = ep;
        out.axpy(dt / 6.0, &self.times(&self.full, &k1));
        out.axpy(dt / 3.0, &self.times(&self.half, &mid));
        out.axpy(dt / 6.0, &k4);
        leray_project_in_place(&mut out);
        out
    }
}

/// One integrating-factor RK4 step.
pub fn if_rk4_step(state: &State, dt: f64, params: &ModelParams) -> Result<State> {
    if !(dt >= 0.0) {
        return Err(Error::InvalidParameter(format!("dt must be nonnegative, got {dt}")));
    }
    let p = Stepper::new(state.p.grid(), dt, params).step(&state.p, params);
    let t = state.t + dt;
    if !p.is_finite() {
        return Err(Error::NonFinite { step: 1, time: t });
    }
    Ok(State { t, p })
}

/// Step count and effective step size reaching `t_end` exactly.
pub fn step_plan(t_end: f64, dt: f64) -> (usize, f64) {
    if t_end <= 0.0 {
        return (0, dt);
    }
    let steps = ((t_end / dt) - 1e-9).ceil().max(1.0) as usize;
    (steps, t_end / steps as f64)
}

/// Running check of `‖p‖² + ∫(μ2‖Δp‖² + α‖p‖⁴_{L⁴}) ≤ bound(t)`.
struct AprioriMonitor {
    p0_sq: f64,
    integral: f64,
    last_t: f64,
    last_rate: f64,
}

impl AprioriMonitor {
    fn rate(p: &SpectralVectorField, params: &ModelParams) -> f64 {
        let lap = norm_laplacian(p);
        let l4 = norm_l4(p);
        params.mu2() * lap * lap + params.alpha() * l4.powi(4)
    }

    fn new(p0: &SpectralVectorField, params: &ModelParams) -> Self {
        let n = norm_l2(p0);
        Self { p0_sq: n * n, integral: 0.0, last_t: 0.0, last_rate: Self::rate(p0, params) }
    }

    fn observe(&mut self, t: f64, p: &SpectralVectorField, params: &ModelParams) -> Result<()> {
        let rate = Self::rate(p, params);
        self.integral += 0.5 * (t - self.last_t) * (rate + self.last_rate);
        self.last_t = t;
        self.last_rate = rate;
        let n = norm_l2(p);
        let lhs = n * n + self.integral;
        let rhs = apriori_rhs(params, t, p.grid().volume(), self.p0_sq);
        if lhs > rhs * (1.0 + APRIORI_SLACK) {
            return Err(Error::AprioriViolation { time: t, lhs, rhs });
        }
        Ok(())
    }
}

/// Integrates from `p0` to `config.t_end`, sampling every
/// `config.sample_every` steps. The step size is adjusted down so that an
/// integer number of steps lands on `t_end`.
pub fn integrate(p0: &SpectralVectorField, config: &RunConfig, params: &ModelParams) -> Result<Trajectory> {
    p0.grid().same_as(&config.grid)?;
    let mut p = p0.clone();
    if !p.is_solenoidal() {
        leray_project_in_place(&mut p);
    }
    let (steps, dt) = step_plan(config.t_end, config.dt);
    let every = config.sample_every.max(1);
    let stepper = Stepper::new(&config.grid, dt, params);
    if params.kappa() != 0.0 {
        warn!("kappa = {} is outside the analysed setting; diagnostics carry no guarantee", params.kappa());
    }
    let mut monitor = config.diagnostics.apriori.then(|| AprioriMonitor::new(&p, params));
    let mut states = vec![State::new(0.0, p.clone())];
    for step in 1..=steps {
        p = stepper.step(&p, params);
        let t = step as f64 * dt;
        if !p.is_finite() {
            return Err(Error::NonFinite { step, time: t });
        }
        if let Some(m) = monitor.as_mut() {
            m.observe(t, &p, params)?;
        }
        if step % every == 0 {
            states.push(State::new(t, p.clone()));
        }
    }
    debug!("integrated {steps} steps of size {dt:.3e}");
    Ok(Trajectory { states, params: *params, grid: config.grid, dt, sample_every: every })
}

/// Explicit step-size estimate from the advective and cubic time scales.
///
/// `p_est` bounds the magnitude of `p`; the velocity scale is estimated as
/// `p_est (λ2 + ε(λ̃1 + |γ̃1| + μ̃1))`. The stiff linear part is treated
/// exactly and imposes no limit.
pub fn stable_dt(grid: &Grid, params: &ModelParams, p_est: f64, dt_max: f64) -> f64 {
    let b = &params.base;
    let speed = p_est * (b.lambda2.abs() + params.epsilon * (b.lambda1_tilde + b.gamma1_tilde.abs() + b.mu1_tilde));
    let mut dt = dt_max;
    if speed > 0.0 {
        dt = dt.min(C_ADV / (grid.k_nyquist() * speed));
    }
    let cubic_rate = b.alpha * p_est * p_est;
    if cubic_rate > 0.0 {
        dt = dt.min(C_CUB / cubic_rate);
    }
    dt
}
