//! Right-hand-side terms of the coupled model.
//!
//! The polar order `p` evolves by
//!
//! ```text
//! ∂t p = -P[ μ2 Δ²p - γ2 Δp + λ2 (p·∇)p + α|p|²p + βp
//!            + (u·∇)p + κ (∇u)_sym p - (∇u)_skw p ]
//! ```
//!
//! and the velocity is slaved to `p` through the Stokes problem
//! `u = A⁻¹ P(-μ1 Δ²p + γ1 Δp - λ1 (p·∇)p)`.

use num_complex::Complex64;

use crate::error::Result;
use crate::params::ModelParams;
use crate::spectral::ops::{from_padded, gradient_padded, leray_project_in_place, padded_grid, to_padded};
pub use crate::spectral::stokes_inverse;
use crate::spectral::{Grid, SpectralVectorField};

/// Time derivative of `p`, Leray-projected.
#[derive(Debug, Clone, PartialEq)]
pub struct Tendency {
    pub dpdt: SpectralVectorField,
}

/// Strong-form defects of a candidate pair `(ũ, p̃)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Residual {
    /// `P(-Δũ + μ1Δ²p̃ - γ1Δp̃ + λ1(p̃·∇)p̃)`
    pub r1: SpectralVectorField,
    /// `∂t p̃` minus the tendency at `(ũ, p̃)`.
    pub r2: SpectralVectorField,
}

/// `(a·∇)b`, dealiased, not projected.
pub fn advect(a: &SpectralVectorField, b: &SpectralVectorField) -> Result<SpectralVectorField> {
    a.grid().same_as(b.grid())?;
    let grid = *a.grid();
    let pg = padded_grid(&grid, 2);
    let av = to_padded(a, &pg);
    let gb = gradient_padded(b, &pg);
    Ok(from_padded(&grid, &pg, &contract(grid.dim(), &av, &gb, false)))
}

/// `out_i = Σ_j v_j g_{ij}` (or `g_{ji}` when `transpose`).
fn contract(d: usize, v: &[Vec<f64>], g: &[Vec<f64>], transpose: bool) -> Vec<Vec<f64>> {
    let n = v[0].len();
    (0..d)
        .map(|i| {
            let mut out = vec![0.0; n];
            for j in 0..d {
                let gij = if transpose { &g[j * d + i] } else { &g[i * d + j] };
                for ((o, a), b) in out.iter_mut().zip(&v[j]).zip(gij) {
                    *o += a * b;
                }
            }
            out
        })
        .collect()
}

/// `|p|²p`, dealiased with the cubic padding rule.
pub fn cubic(p: &SpectralVectorField) -> SpectralVectorField {
    let grid = *p.grid();
    let pg = padded_grid(&grid, 3);
    let mut pv = to_padded(p, &pg);
    let mut m2 = vec![0.0; pg.real_len()];
    for c in &pv {
        for (m, v) in m2.iter_mut().zip(c) {
            *m += v * v;
        }
    }
    for c in &mut pv {
        for (v, m) in c.iter_mut().zip(&m2) {
            *v *= m;
        }
    }
    from_padded(&grid, &pg, &pv)
}

/// `((∇u) + sign (∇u)ᵀ)/2 · p` on the quadratic padded grid.
fn gradient_part(u: &SpectralVectorField, p: &SpectralVectorField, sign: f64) -> Result<SpectralVectorField> {
    u.grid().same_as(p.grid())?;
    let grid = *u.grid();
    let d = grid.dim();
    let pg = padded_grid(&grid, 2);
    let gu = gradient_padded(u, &pg);
    let pv = to_padded(p, &pg);
    let mut a = contract(d, &pv, &gu, false);
    let b = contract(d, &pv, &gu, true);
    for (ai, bi) in a.iter_mut().zip(&b) {
        for (x, y) in ai.iter_mut().zip(bi) {
            *x = 0.5 * (*x + sign * y);
        }
    }
    Ok(from_padded(&grid, &pg, &a))
}

/// `(∇u)_skw p` with `(∇u)_skw = (∇u - (∇u)ᵀ)/2`.
pub fn vorticity_coupling(u: &SpectralVectorField, p: &SpectralVectorField) -> Result<SpectralVectorField> {
    gradient_part(u, p, -1.0)
}

/// `(∇u)_sym p` with `(∇u)_sym = (∇u + (∇u)ᵀ)/2`.
pub fn strain_coupling(u: &SpectralVectorField, p: &SpectralVectorField) -> Result<SpectralVectorField> {
    gradient_part(u, p, 1.0)
}

/// Padded values and gradient of `p`, shared by every quadratic term.
struct PaddedState {
    grid: Grid,
    pg: Grid,
    pv: Vec<Vec<f64>>,
    gp: Vec<Vec<f64>>,
}

impl PaddedState {
    fn new(p: &SpectralVectorField) -> Self {
        let grid = *p.grid();
        let pg = padded_grid(&grid, 2);
        Self { pv: to_padded(p, &pg), gp: gradient_padded(p, &pg), grid, pg }
    }

    /// `(p·∇)p`
    fn self_advection(&self) -> SpectralVectorField {
        let vals = contract(self.grid.dim(), &self.pv, &self.gp, false);
        from_padded(&self.grid, &self.pg, &vals)
    }

    /// `(u·∇)p + κ(∇u)_sym p - (∇u)_skw p`
    fn transport(&self, u: &SpectralVectorField, kappa: f64) -> SpectralVectorField {
        let d = self.grid.dim();
        let uv = to_padded(u, &self.pg);
        let gu = gradient_padded(u, &self.pg);
        let mut out = contract(d, &uv, &self.gp, false);
        let a = contract(d, &self.pv, &gu, false);
        let b = contract(d, &self.pv, &gu, true);
        // κ(a+b)/2 - (a-b)/2
        let ca = 0.5 * (kappa - 1.0);
        let cb = 0.5 * (kappa + 1.0);
        for i in 0..d {
            for (o, (x, y)) in out[i].iter_mut().zip(a[i].iter().zip(&b[i])) {
                *o += ca * x + cb * y;
            }
        }
        from_padded(&self.grid, &self.pg, &out)
    }
}

/// Velocity from `p` given the precomputed `(p·∇)p` (ignored when `λ1 = 0`).
fn velocity(p: &SpectralVectorField, pp: Option<&SpectralVectorField>, params: &ModelParams) -> SpectralVectorField {
    let grid = *p.grid();
    if params.mu1 == 0.0 && params.gamma1 == 0.0 && params.lambda1 == 0.0 {
        return SpectralVectorField::zeros(grid);
    }
    let mut f = p.clone();
    let n = grid.spec_len();
    let d = grid.dim();
    {
        let coeffs = f.coeffs_mut();
        for (flat, &k2) in grid.table().k2.iter().enumerate() {
            let s = -(params.mu1 * k2 * k2 + params.gamma1 * k2);
            for j in 0..d {
                coeffs[j * n + flat] *= s;
            }
        }
    }
    if params.lambda1 != 0.0 {
        if let Some(pp) = pp {
            f.axpy(-params.lambda1, pp);
        }
    }
    stokes_inverse(&f)
}

/// `u = A⁻¹ P(-μ1Δ²p + γ1Δp - λ1(p·∇)p)`; zero mean, solenoidal.
pub fn solve_u(p: &SpectralVectorField, params: &ModelParams) -> SpectralVectorField {
    if params.lambda1 != 0.0 {
        let pp = PaddedState::new(p).self_advection();
        velocity(p, Some(&pp), params)
    } else {
        velocity(p, None, params)
    }
}

/// Assembles `-P[linear + λ2 pp + α|p|²p + transport]`.
fn assemble(
    p: &SpectralVectorField,
    pp: Option<&SpectralVectorField>,
    transport: Option<&SpectralVectorField>,
    params: &ModelParams,
    linear: bool,
) -> SpectralVectorField {
    let grid = *p.grid();
    let n = grid.spec_len();
    let d = grid.dim();
    let mut bracket = if linear { p.clone() } else { SpectralVectorField::zeros(grid) };
    if linear {
        let coeffs = bracket.coeffs_mut();
        for (flat, &k2) in grid.table().k2.iter().enumerate() {
            let s = params.mu2() * k2 * k2 + params.gamma2() * k2 + params.beta();
            for j in 0..d {
                coeffs[j * n + flat] *= s;
            }
        }
    }
    if let Some(pp) = pp {
        bracket.axpy(params.lambda2(), pp);
    }
    if params.alpha() != 0.0 {
        bracket.axpy(params.alpha(), &cubic(p));
    }
    if let Some(t) = transport {
        bracket.axpy(1.0, t);
    }
    bracket.scale(-1.0);
    leray_project_in_place(&mut bracket);
    bracket
}

/// Tendency of `p` at a given velocity `u`.
pub fn rhs_p(p: &SpectralVectorField, u: &SpectralVectorField, params: &ModelParams) -> Result<Tendency> {
    p.grid().same_as(u.grid())?;
    let ws = PaddedState::new(p);
    let pp = (params.lambda2() != 0.0).then(|| ws.self_advection());
    let transport = (u.max_abs() > 0.0).then(|| ws.transport(u, params.kappa()));
    Ok(Tendency { dpdt: assemble(p, pp.as_ref(), transport.as_ref(), params, true) })
}

/// Velocity and tendency at `p` with shared intermediate products.
pub fn evaluate(p: &SpectralVectorField, params: &ModelParams) -> (SpectralVectorField, Tendency) {
    let ws = PaddedState::new(p);
    let need_pp = params.lambda1 != 0.0 || params.lambda2() != 0.0;
    let pp = need_pp.then(|| ws.self_advection());
    let u = velocity(p, pp.as_ref(), params);
    let transport = (u.max_abs() > 0.0).then(|| ws.transport(&u, params.kappa()));
    let lam2 = if params.lambda2() != 0.0 { pp.as_ref() } else { None };
    let dpdt = assemble(p, lam2, transport.as_ref(), params, true);
    (u, Tendency { dpdt })
}

/// Nonlinear part of the tendency, `dpdt - L p`, with the velocity
/// recomputed from `p`.
pub fn evaluate_nonlinear(p: &SpectralVectorField, params: &ModelParams) -> SpectralVectorField {
    let ws = PaddedState::new(p);
    let need_pp = params.lambda1 != 0.0 || params.lambda2() != 0.0;
    let pp = need_pp.then(|| ws.self_advection());
    let u = velocity(p, pp.as_ref(), params);
    let transport = (u.max_abs() > 0.0).then(|| ws.transport(&u, params.kappa()));
    let lam2 = if params.lambda2() != 0.0 { pp.as_ref() } else { None };
    assemble(p, lam2, transport.as_ref(), params, false)
}

/// Strong-form residual of `(u_t, p_t)` with the supplied time derivative.
pub fn residual(
    u_t: &SpectralVectorField,
    p_t: &SpectralVectorField,
    dpdt_t: &SpectralVectorField,
    params: &ModelParams,
) -> Result<Residual> {
    p_t.grid().same_as(u_t.grid())?;
    p_t.grid().same_as(dpdt_t.grid())?;
    let grid = *p_t.grid();
    let n = grid.spec_len();
    let d = grid.dim();
    let ws = PaddedState::new(p_t);
    let pp = ws.self_advection();

    // -Δũ + μ1Δ²p̃ - γ1Δp̃ + λ1(p̃·∇)p̃
    let mut r1 = SpectralVectorField::zeros(grid);
    {
        let coeffs = r1.coeffs_mut();
        for (flat, &k2) in grid.table().k2.iter().enumerate() {
            let sp = params.mu1 * k2 * k2 + params.gamma1 * k2;
            for j in 0..d {
                let i = j * n + flat;
                coeffs[i] = u_t.coeffs()[i] * k2 + p_t.coeffs()[i] * sp;
            }
        }
    }
    r1.axpy(params.lambda1, &pp);
    leray_project_in_place(&mut r1);

    let transport = (u_t.max_abs() > 0.0).then(|| ws.transport(u_t, params.kappa()));
    let lam2 = (params.lambda2() != 0.0).then_some(&pp);
    let tendency = assemble(p_t, lam2, transport.as_ref(), params, true);
    let mut r2 = dpdt_t.clone();
    leray_project_in_place(&mut r2);
    r2.axpy(-1.0, &tendency);
    Ok(Residual { r1, r2 })
}

/// `(p·∇)p` computed in divergence form `∇·(p⊗p)`.
pub fn advect_divergence_form(p: &SpectralVectorField) -> SpectralVectorField {
    let grid = *p.grid();
    let d = grid.dim();
    let n = grid.spec_len();
    let pg = padded_grid(&grid, 2);
    let pv = to_padded(p, &pg);
    let mut out = SpectralVectorField::zeros(grid);
    for j in 0..d {
        let prods: Vec<Vec<f64>> = (0..d)
            .map(|i| pv[i].iter().zip(&pv[j]).map(|(a, b)| a * b).collect())
            .collect();
        // prods[i] = p_i p_j; accumulate ∂_j (p_i p_j) into component i
        let t = from_padded(&grid, &pg, &prods);
        let coeffs = out.coeffs_mut();
        for (flat, k) in grid.table().k.iter().enumerate() {
            let kj = k[j];
            for i in 0..d {
                coeffs[i * n + flat] += t.coeffs()[i * n + flat] * Complex64::new(0.0, kj);
            }
        }
    }
    out
}
