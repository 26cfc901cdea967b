use crate::error::{Error, Result};
use crate::integrate::Trajectory;
use super::energy::cumulative_integral;
use crate::operators::{evaluate, residual, solve_u};
use crate::params::{positive_part, ModelParams};
use crate::spectral::{
    inner, max_gradient, norm_grad, norm_l2, norm_l4, norm_laplacian, norm_lp, stokes_inverse, SpectralVectorField,
};

/// `½‖p - p̃‖²`
pub fn relative_energy(p: &SpectralVectorField, p_tilde: &SpectralVectorField) -> Result<f64> {
    p.grid().same_as(p_tilde.grid())?;
    let n = norm_l2(&p.sub(p_tilde));
    Ok(0.5 * n * n)
}

/// `μ2‖Δe‖² + γ2⁺‖∇e‖² + α‖e‖⁴_{L⁴} + β⁺‖e‖²` with `e = p - p̃`.
pub fn relative_dissipation(p: &SpectralVectorField, p_tilde: &SpectralVectorField, params: &ModelParams) -> Result<f64> {
    p.grid().same_as(p_tilde.grid())?;
    let e = p.sub(p_tilde);
    let lap = norm_laplacian(&e);
    let g = norm_grad(&e);
    let l4 = norm_l4(&e);
    let l2 = norm_l2(&e);
    Ok(params.mu2() * lap * lap
        + positive_part(params.gamma2()) * g * g
        + params.alpha() * l4.powi(4)
        + positive_part(params.beta()) * l2 * l2)
}

/// `εc(1 + ‖∇p̃‖²_∞ + S²‖∇p̃‖²_∞ + ‖p̃‖⁴_{L⁴})` where `S` is the larger of
/// `l65_sup` and `‖p̃‖_{L^{6/5}}`. Callers pass the running supremum of the
/// `L^{6/5}` norm over earlier samples as `l65_sup` (0 for none).
pub fn k_functional(p_tilde: &SpectralVectorField, params: &ModelParams, c: f64, l65_sup: f64) -> f64 {
    let g = max_gradient(p_tilde);
    let s = l65_sup.max(norm_lp(p_tilde, 1.2));
    let l4 = norm_l4(p_tilde);
    params.epsilon * c * (1.0 + g * g + s * s * g * g + l4.powi(4))
}

/// `K[p̃]` along a trajectory with the running `L^{6/5}` supremum.
pub fn k_series(traj_tilde: &Trajectory, params: &ModelParams, c: f64) -> Vec<f64> {
    let mut sup: f64 = 0.0;
    traj_tilde
        .states
        .iter()
        .map(|s| {
            sup = sup.max(norm_lp(&s.p, 1.2));
            k_functional(&s.p, params, c, sup)
        })
        .collect()
}

/// Per-sample terms of the relative energy inequality.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RelEnergyRow {
    pub t: f64,
    pub e_rel: f64,
    pub w_rel: f64,
    /// `K[p̃]` at the requested constant.
    pub k_val: f64,
    pub r1_norm: f64,
    pub r2_norm: f64,
    /// `(R₁, A⁻¹(ũ - u))`
    pub pairing1: f64,
    /// `(R₂, p̃ - p)`
    pub pairing2: f64,
    /// `(∂t p - F(p), p - p̃)`, the weak side's own discretisation defect.
    pub weak_defect: f64,
    /// `E(t) + ½∫W`
    pub lhs: f64,
    /// `E(0) + ∫K E + ∫(pairings + defect)` at the requested constant.
    pub rhs: f64,
    /// Gronwall form `E(0)e^{∫K} + ∫(pairings + defect)e^{∫_s^t K}`.
    pub rhs_gronwall: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GronwallReport {
    pub rows: Vec<RelEnergyRow>,
    /// Constant used for `k_val`, `rhs` and `rhs_gronwall`.
    pub c: f64,
    /// Smallest constant for which `lhs ≤ rhs` at every sample; infinite
    /// when no constant works.
    pub fitted_c_min: f64,
    pub holds_at_c: bool,
    pub pass: bool,
}

fn check_times(a: &Trajectory, b: &Trajectory) -> Result<()> {
    a.grid.same_as(&b.grid)?;
    if a.states.len() != b.states.len() {
        return Err(Error::TimeGridMismatch(format!("{} vs {} samples", a.states.len(), b.states.len())));
    }
    for (x, y) in a.states.iter().zip(&b.states) {
        if (x.t - y.t).abs() > 1e-9 * x.t.abs().max(1.0) {
            return Err(Error::TimeGridMismatch(format!("sample at t = {} vs t = {}", x.t, y.t)));
        }
    }
    Ok(())
}

/// Finite-difference time derivative at sample `i`: fourth order from five
/// samples (centred inside, one-sided at the ends), second order for three
/// or four samples.
pub fn sample_derivative(traj: &Trajectory, i: usize) -> SpectralVectorField {
    let s = &traj.states;
    let n = s.len();
    let grid = traj.grid;
    if n < 2 {
        return SpectralVectorField::zeros(grid);
    }
    let h = (s[n - 1].t - s[0].t) / (n - 1) as f64;
    // weights for samples i+o, o = -2..=2 or the mirrored end stencils
    let (start, w, scale): (usize, &[f64], f64) = if n == 2 {
        (0, &[-1.0, 1.0], 1.0)
    } else if n < 5 {
        match i {
            0 => (0, &[-3.0, 4.0, -1.0], 0.5),
            _ if i == n - 1 => (n - 3, &[1.0, -4.0, 3.0], 0.5),
            _ => (i - 1, &[-1.0, 0.0, 1.0], 0.5),
        }
    } else {
        let k = 1.0 / 12.0;
        match i {
            0 => (0, &[-25.0, 48.0, -36.0, 16.0, -3.0], k),
            1 => (0, &[-3.0, -10.0, 18.0, -6.0, 1.0], k),
            _ if i == n - 2 => (n - 5, &[-1.0, 6.0, -18.0, 10.0, 3.0], k),
            _ if i == n - 1 => (n - 5, &[3.0, -16.0, 36.0, -48.0, 25.0], k),
            _ => (i - 2, &[1.0, -8.0, 0.0, 8.0, -1.0], k),
        }
    };
    let mut out = SpectralVectorField::zeros(grid);
    for (j, wj) in w.iter().enumerate() {
        if *wj != 0.0 {
            out.axpy(wj * scale / h, &s[start + j].p);
        }
    }
    out
}

/// Evaluates the relative energy inequality between a trajectory `traj`
/// (the weak side, run with `params`) and a reference `traj_tilde` whose
/// velocity is recomputed with its own parameters.
///
/// Both sides are kept in integral form,
/// `E(t) + ½∫W ≤ E(0) + c∫K̂E + ∫(pairing1 + pairing2 + weak_defect)`,
/// which is linear in `c`; `fitted_c_min` is the exact smallest constant.
/// The exponential Gronwall form is reported alongside.
pub fn gronwall_check(traj: &Trajectory, traj_tilde: &Trajectory, params: &ModelParams, c: f64) -> Result<GronwallReport> {
    check_times(traj, traj_tilde)?;
    let n = traj.states.len();
    let k_hat = k_series(traj_tilde, params, 1.0);
    let mut rows = Vec::with_capacity(n);
    let mut forcing = Vec::with_capacity(n);
    for i in 0..n {
        let p = &traj.states[i].p;
        let pt = &traj_tilde.states[i].p;
        let e = p.sub(pt);
        let (u, fp) = evaluate(p, params);
        let ut = solve_u(pt, &traj_tilde.params);
        let dpt = sample_derivative(traj_tilde, i);
        let dp = sample_derivative(traj, i);
        let r = residual(&ut, pt, &dpt, params)?;
        let mut rho = dp;
        rho.axpy(-1.0, &fp.dpdt);
        let e_norm = norm_l2(&e);
        let pairing1 = inner(&r.r1, &stokes_inverse(&ut.sub(&u)));
        let pairing2 = -inner(&r.r2, &e);
        let weak_defect = inner(&rho, &e);
        let mut band = rho;
        band.axpy(-1.0, &r.r2);
        forcing.push(pairing1 + inner(&band, &e));
        rows.push(RelEnergyRow {
            t: traj.states[i].t,
            e_rel: 0.5 * e_norm * e_norm,
            w_rel: relative_dissipation(p, pt, params)?,
            k_val: c * k_hat[i],
            r1_norm: norm_l2(&r.r1),
            r2_norm: norm_l2(&r.r2),
            pairing1,
            pairing2,
            weak_defect,
            ..Default::default()
        });
    }

    let e0 = rows.first().map_or(0.0, |r| r.e_rel);
    let ts: Vec<f64> = rows.iter().map(|r| r.t).collect();
    let cum_w = cumulative_integral(&ts, &rows.iter().map(|r| r.w_rel).collect::<Vec<_>>());
    let ke: Vec<f64> = rows.iter().zip(&k_hat).map(|(r, k)| k * r.e_rel).collect();
    let cum_ke = cumulative_integral(&ts, &ke);
    let cum_f = cumulative_integral(&ts, &forcing);
    let lhs: Vec<f64> = rows.iter().zip(&cum_w).map(|(r, w)| r.e_rel + 0.5 * w).collect();

    let mut c_min: f64 = 0.0;
    for i in 0..n {
        let need = lhs[i] - e0 - cum_f[i];
        if need > 0.0 {
            c_min = if cum_ke[i] > 0.0 { c_min.max(need / cum_ke[i]) } else { f64::INFINITY };
        }
    }

    let mut gron = e0;
    for i in 0..n {
        if i > 0 {
            let h = rows[i].t - rows[i - 1].t;
            let growth = (0.5 * h * c * (k_hat[i - 1] + k_hat[i])).exp();
            gron = gron * growth + 0.5 * h * (forcing[i - 1] * growth + forcing[i]);
        }
        let row = &mut rows[i];
        row.lhs = lhs[i];
        row.rhs = e0 + c * cum_ke[i] + cum_f[i];
        row.rhs_gronwall = gron;
    }
    let holds_at_c = rows.iter().all(|r| r.lhs <= r.rhs);
    Ok(GronwallReport { rows, c, fitted_c_min: c_min, holds_at_c, pass: c_min.is_finite() })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeakStrongReport {
    pub max_e_rel: f64,
    pub terminal_e_rel: f64,
    /// `max √(2 E_rel)`, the largest `L²` distance.
    pub max_distance: f64,
    pub terminal_distance: f64,
}

/// Distance summary between two trajectories sampled at the same times.
pub fn weak_strong_report(traj_a: &Trajectory, traj_b: &Trajectory) -> Result<WeakStrongReport> {
    check_times(traj_a, traj_b)?;
    let mut max_e: f64 = 0.0;
    let mut last = 0.0;
    for (a, b) in traj_a.states.iter().zip(&traj_b.states) {
        last = relative_energy(&a.p, &b.p)?;
        max_e = max_e.max(last);
    }
    Ok(WeakStrongReport {
        max_e_rel: max_e,
        terminal_e_rel: last,
        max_distance: (2.0 * max_e).sqrt(),
        terminal_distance: (2.0 * last).sqrt(),
    })
}
