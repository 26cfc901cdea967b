//! Model coefficients and the epsilon coupling rule.

use crate::error::{Error, Result};

/// Coupling-free coefficients of the model. The three `*_tilde` values set
/// the strength of the velocity forcing before scaling by epsilon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaseCoefficients {
    pub mu1_tilde: f64,
    pub gamma1_tilde: f64,
    pub lambda1_tilde: f64,
    pub mu2: f64,
    pub gamma2: f64,
    pub lambda2: f64,
    pub alpha: f64,
    pub beta: f64,
    pub kappa: f64,
}

impl Default for BaseCoefficients {
    fn default() -> Self {
        Self {
            mu1_tilde: 1.0,
            gamma1_tilde: 1.0,
            lambda1_tilde: 1.0,
            mu2: 1.0,
            gamma2: 0.5,
            lambda2: 1.0,
            alpha: 1.0,
            beta: 0.5,
            kappa: 0.0,
        }
    }
}

impl BaseCoefficients {
    /// Checks the standing positivity assumptions.
    pub fn check(&self) -> Result<()> {
        let positive = [
            ("mu1_tilde", self.mu1_tilde),
            ("lambda1_tilde", self.lambda1_tilde),
            ("mu2", self.mu2),
            ("lambda2", self.lambda2),
            ("alpha", self.alpha),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::PositivityViolation(name));
            }
        }
        for (name, v) in [("gamma1_tilde", self.gamma1_tilde), ("gamma2", self.gamma2), ("beta", self.beta), ("kappa", self.kappa)] {
            if !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} must be finite")));
            }
        }
        Ok(())
    }
}

/// Full coefficient set with the coupled values `mu1`, `gamma1`, `lambda1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub base: BaseCoefficients,
    pub epsilon: f64,
    pub mu1: f64,
    pub gamma1: f64,
    pub lambda1: f64,
    /// Rejects `kappa != 0`, the case without existence theory.
    pub strict: bool,
}

/// Scales the base coupling coefficients by `epsilon`.
pub fn apply_coupling(base: BaseCoefficients, epsilon: f64) -> Result<ModelParams> {
    if !(epsilon >= 0.0) || !epsilon.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "epsilon must be finite and nonnegative, got {epsilon}"
        )));
    }
    Ok(ModelParams {
        base,
        epsilon,
        mu1: epsilon * base.mu1_tilde,
        gamma1: epsilon * base.gamma1_tilde,
        lambda1: epsilon * base.lambda1_tilde,
        strict: true,
    })
}

fn consistent(actual: f64, expected: f64) -> bool {
    actual == expected || (actual - expected).abs() <= 1e-14 * expected.abs().max(actual.abs())
}

/// Returns `params` unchanged when every constraint holds.
pub fn validate(params: ModelParams) -> Result<ModelParams> {
    params.base.check()?;
    if !(params.epsilon >= 0.0) || !params.epsilon.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "epsilon must be finite and nonnegative, got {}",
            params.epsilon
        )));
    }
    let b = &params.base;
    let e = params.epsilon;
    if !consistent(params.mu1, e * b.mu1_tilde)
        || !consistent(params.gamma1, e * b.gamma1_tilde)
        || !consistent(params.lambda1, e * b.lambda1_tilde)
    {
        return Err(Error::CouplingInconsistency);
    }
    if params.strict && b.kappa != 0.0 {
        return Err(Error::StrictModeKappaNonzero(b.kappa));
    }
    Ok(params)
}

impl ModelParams {
    /// Coupled parameters built from `base` and validated.
    pub fn new(base: BaseCoefficients, epsilon: f64, strict: bool) -> Result<Self> {
        let mut p = apply_coupling(base, epsilon)?;
        p.strict = strict;
        validate(p)
    }

    /// Same base coefficients with a different epsilon.
    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self> {
        let mut p = apply_coupling(self.base, epsilon)?;
        p.strict = self.strict;
        Ok(p)
    }

    pub fn mu2(&self) -> f64 {
        self.base.mu2
    }
    pub fn gamma2(&self) -> f64 {
        self.base.gamma2
    }
    pub fn lambda2(&self) -> f64 {
        self.base.lambda2
    }
    pub fn alpha(&self) -> f64 {
        self.base.alpha
    }
    pub fn beta(&self) -> f64 {
        self.base.beta
    }
    pub fn kappa(&self) -> f64 {
        self.base.kappa
    }
}

/// `max(a, 0)`.
pub fn positive_part(a: f64) -> f64 {
    a.max(0.0)
}

/// `max(-a, 0)`.
pub fn negative_part(a: f64) -> f64 {
    (-a).max(0.0)
}
