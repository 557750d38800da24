use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parameters (α, β, γ, λ, d) of `∂_t^α(u - u_0) + Ψ_β(-i∇)u = λ|u|^{γ-1}u`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    pub alpha: f64,
    pub beta: f64,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    #[serde(default)]
    pub lambda: f64,
    #[serde(rename = "d", alias = "dimension")]
    pub dimension: usize,
}

fn default_gamma() -> f64 {
    2.0
}

impl ModelParams {
    /// Validated constructor; α = 1 and β = 2 are rejected.
    pub fn new(alpha: f64, beta: f64, gamma: f64, lambda: f64, dimension: usize) -> Result<Self> {
        let p = Self { alpha, beta, gamma, lambda, dimension };
        p.validate()?;
        Ok(p)
    }

    /// Linear problem (λ = 0, γ = 2).
    pub fn linear(alpha: f64, beta: f64, dimension: usize) -> Result<Self> {
        Self::new(alpha, beta, 2.0, 0.0, dimension)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::UnsupportedParameters(format!("alpha = {} not in (0, 1)", self.alpha)));
        }
        if !(self.beta > 0.0 && self.beta < 2.0) {
            return Err(Error::UnsupportedParameters(format!("beta = {} not in (0, 2)", self.beta)));
        }
        if !(self.gamma > 1.0) || !self.gamma.is_finite() {
            return Err(Error::UnsupportedParameters(format!("gamma = {} must exceed 1", self.gamma)));
        }
        if !self.lambda.is_finite() {
            return Err(Error::UnsupportedParameters(format!("lambda = {} is not finite", self.lambda)));
        }
        if !(1..=3).contains(&self.dimension) {
            return Err(Error::UnsupportedDimension(self.dimension));
        }
        Ok(())
    }

    pub fn d(&self) -> f64 {
        self.dimension as f64
    }

    /// κ = d/β if d > β, else 1.
    pub fn kappa(&self) -> f64 {
        if self.d() > self.beta {
            self.d() / self.beta
        } else {
            1.0
        }
    }

    /// κ₁ = d/(d-β) if d > β, else ∞: Z(t) ∈ L_p iff 1 ≤ p < κ₁.
    pub fn kappa1(&self) -> f64 {
        if self.d() > self.beta {
            self.d() / (self.d() - self.beta)
        } else {
            f64::INFINITY
        }
    }

    /// κ₂ = d/(d-2β) if d > 2β, else ∞: Y(t) ∈ L_p iff 1 ≤ p < κ₂.
    pub fn kappa2(&self) -> f64 {
        if self.d() > 2.0 * self.beta {
            self.d() / (self.d() - 2.0 * self.beta)
        } else {
            f64::INFINITY
        }
    }

    /// Self-similar exponent α/β: Z(t, x) depends on x through t^{-α/β} x.
    pub fn spatial_exponent(&self) -> f64 {
        self.alpha / self.beta
    }
}
