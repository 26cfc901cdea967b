use log::warn;

use crate::error::{Error, Result};
use crate::integrate::Trajectory;
use crate::params::{negative_part, ModelParams};
use crate::spectral::{norm_grad, norm_l2, norm_l4, norm_laplacian};

/// One sample of the energy balance.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EnergyRow {
    pub t: f64,
    /// `½‖p‖²`
    pub e: f64,
    /// `μ2‖Δp‖²`
    pub d_visc: f64,
    /// `γ2‖∇p‖²`, signed
    pub d_grad: f64,
    /// `α‖p‖⁴_{L⁴}`
    pub d_quart: f64,
    /// `β‖p‖²`, signed
    pub d_lin: f64,
    /// `‖u‖²`
    pub u_sq: f64,
    pub cum_visc: f64,
    pub cum_grad: f64,
    pub cum_quart: f64,
    pub cum_lin: f64,
    /// `E(t) + Σ cumulative - E(0)`; zero for an exact solution.
    pub balance_defect: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct EnergyLedger {
    pub rows: Vec<EnergyRow>,
}

impl EnergyLedger {
    pub fn max_abs_defect(&self) -> f64 {
        self.rows.iter().fold(0.0, |m, r| m.max(r.balance_defect.abs()))
    }

    pub fn initial_energy(&self) -> f64 {
        self.rows.first().map_or(0.0, |r| r.e)
    }

    /// `∫‖u‖²` over the whole ledger.
    pub fn u_sq_integral(&self) -> f64 {
        let ts: Vec<f64> = self.rows.iter().map(|r| r.t).collect();
        let ys: Vec<f64> = self.rows.iter().map(|r| r.u_sq).collect();
        cumulative_integral(&ts, &ys).last().copied().unwrap_or(0.0)
    }
}

/// Running integral of sampled `ys`; each interval uses the cubic through the
/// four nearest samples, integrated exactly by two-point Gauss-Legendre.
pub fn cumulative_integral(ts: &[f64], ys: &[f64]) -> Vec<f64> {
    debug_assert_eq!(ts.len(), ys.len());
    let n = ts.len();
    let mut out = vec![0.0; n];
    let g = 0.5 / 3f64.sqrt();
    for i in 1..n {
        let lo = i.saturating_sub(2).min(n.saturating_sub(4));
        let hi = (lo + 4).min(n);
        let (a, b) = (ts[i - 1], ts[i]);
        let mid = 0.5 * (a + b);
        let interp = |x: f64| {
            (lo..hi)
                .map(|j| {
                    let w: f64 = (lo..hi).filter(|&m| m != j).map(|m| (x - ts[m]) / (ts[j] - ts[m])).product();
                    w * ys[j]
                })
                .sum::<f64>()
        };
        let h = b - a;
        out[i] = out[i - 1] + 0.5 * h * (interp(mid - g * h) + interp(mid + g * h));
    }
    out
}

/// Energy and dissipation at every sample, with fourth-order time integrals.
pub fn energy_ledger(traj: &Trajectory) -> EnergyLedger {
    let pr = &traj.params;
    if pr.kappa() != 0.0 {
        warn!("energy balance is only an identity for kappa = 0");
    }
    let mut rows: Vec<EnergyRow> = traj
        .states
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let l2 = norm_l2(&s.p);
            let g = norm_grad(&s.p);
            let lap = norm_laplacian(&s.p);
            let l4 = norm_l4(&s.p);
            let u = norm_l2(&traj.velocity(i));
            EnergyRow {
                t: s.t,
                e: 0.5 * l2 * l2,
                d_visc: pr.mu2() * lap * lap,
                d_grad: pr.gamma2() * g * g,
                d_quart: pr.alpha() * l4.powi(4),
                d_lin: pr.beta() * l2 * l2,
                u_sq: u * u,
                ..Default::default()
            }
        })
        .collect();
    let ts: Vec<f64> = rows.iter().map(|r| r.t).collect();
    let cum = |f: fn(&EnergyRow) -> f64| cumulative_integral(&ts, &rows.iter().map(f).collect::<Vec<_>>());
    let (cv, cg, cq, cl) = (cum(|r| r.d_visc), cum(|r| r.d_grad), cum(|r| r.d_quart), cum(|r| r.d_lin));
    for (i, r) in rows.iter_mut().enumerate() {
        (r.cum_visc, r.cum_grad, r.cum_quart, r.cum_lin) = (cv[i], cg[i], cq[i], cl[i]);
    }
    let e0 = rows.first().map_or(0.0, |r| r.e);
    for r in &mut rows {
        r.balance_defect = r.e + r.cum_visc + r.cum_grad + r.cum_quart + r.cum_lin - e0;
    }
    EnergyLedger { rows }
}

/// `‖p₀‖² + t|Ω|/α ((γ2⁻)²/(2μ2) + β⁻)²`
pub fn apriori_rhs(params: &ModelParams, t: f64, volume: f64, p0_sq: f64) -> f64 {
    let g = negative_part(params.gamma2());
    let s = g * g / (2.0 * params.mu2()) + negative_part(params.beta());
    p0_sq + t * volume / params.alpha() * s * s
}

#[derive(Debug, Clone, PartialEq)]
pub struct AprioriCheck {
    pub pass: bool,
    /// Smallest `rhs - lhs` over the samples.
    pub margin: f64,
    /// `‖p(t)‖² + ∫(μ2‖Δp‖² + α‖p‖⁴_{L⁴})` per sample.
    pub lhs: Vec<f64>,
    /// The bound evaluated at `T`.
    pub rhs: f64,
}

/// Checks `‖p(t)‖² + ∫₀ᵗ(μ2‖Δp‖² + α‖p‖⁴_{L⁴}) ≤ ‖p₀‖² + T|Ω|/α(…)²`.
pub fn apriori_bound_check(ledger: &EnergyLedger, params: &ModelParams, t_final: f64, volume: f64) -> AprioriCheck {
    let p0_sq = 2.0 * ledger.initial_energy();
    let rhs = apriori_rhs(params, t_final, volume, p0_sq);
    let lhs: Vec<f64> = ledger.rows.iter().map(|r| 2.0 * r.e + r.cum_visc + r.cum_quart).collect();
    let margin = lhs.iter().fold(f64::INFINITY, |m, l| m.min(rhs - l));
    AprioriCheck { pass: margin >= 0.0, margin, lhs, rhs }
}

/// `∫‖u‖² / (ε²(‖p₀‖² + 1))`; stays bounded as `ε → 0`.
pub fn velocity_bound_check(ledger: &EnergyLedger, params: &ModelParams) -> Result<f64> {
    if !(params.epsilon > 0.0) {
        return Err(Error::InvalidParameter("velocity bound needs epsilon > 0".into()));
    }
    let p0_sq = 2.0 * ledger.initial_energy();
    Ok(ledger.u_sq_integral() / (params.epsilon * params.epsilon * (p0_sq + 1.0)))
}
