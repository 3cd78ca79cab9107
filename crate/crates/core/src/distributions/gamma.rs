use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_positive, Error, Result};
use crate::numerics::special::gamma_ln_pdf;

/// Gamma law in shape/rate form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaParamsShapeRate {
    pub alpha: f64,
    pub beta: f64,
}

/// Gamma law in mean/variance form: shape μ²/ν, rate μ/ν.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaParamsMeanVar {
    pub mu: f64,
    pub nu: f64,
}

impl GammaParamsShapeRate {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        ensure_positive("alpha", alpha)?;
        ensure_positive("beta", beta)?;
        Ok(Self { alpha, beta })
    }

    pub fn pdf(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        if x == 0.0 {
            return match self.alpha {
                a if a < 1.0 => f64::INFINITY,
                a if a == 1.0 => self.beta,
                _ => 0.0,
            };
        }
        gamma_ln_pdf(x, self.alpha, 1.0 / self.beta).exp()
    }

    /// `(1 - it/β)^{-α}`.
    pub fn cf(&self, t: f64) -> Complex64 {
        (-self.alpha * Complex64::new(1.0, -t / self.beta).ln()).exp()
    }

    /// `(1 - t/β)^{-α}` for `t < β`.
    pub fn mgf(&self, t: f64) -> Result<f64> {
        if t >= self.beta {
            return Err(Error::MgfDomain {
                arg: t,
                lower: f64::NEG_INFINITY,
                upper: self.beta,
            });
        }
        Ok((-self.alpha * (-t / self.beta).ln_1p()).exp())
    }

    pub fn mean(&self) -> f64 {
        self.alpha / self.beta
    }

    pub fn variance(&self) -> f64 {
        self.alpha / (self.beta * self.beta)
    }
}

impl GammaParamsMeanVar {
    pub fn new(mu: f64, nu: f64) -> Result<Self> {
        ensure_positive("mu", mu)?;
        ensure_positive("nu", nu)?;
        Ok(Self { mu, nu })
    }

    pub fn pdf(&self, x: f64) -> f64 {
        GammaParamsShapeRate::from(*self).pdf(x)
    }

    /// `(1 / (1 - iνt/μ))^{μ²/ν}`.
    pub fn cf(&self, t: f64) -> Complex64 {
        let base = Complex64::new(1.0, -self.nu * t / self.mu);
        (-(self.mu * self.mu / self.nu) * base.ln()).exp()
    }

    /// Defined for `t < μ/ν`.
    pub fn mgf(&self, t: f64) -> Result<f64> {
        let upper = self.mu / self.nu;
        if t >= upper {
            return Err(Error::MgfDomain {
                arg: t,
                lower: f64::NEG_INFINITY,
                upper,
            });
        }
        Ok((-(self.mu * self.mu / self.nu) * (-self.nu * t / self.mu).ln_1p()).exp())
    }
}

impl From<GammaParamsMeanVar> for GammaParamsShapeRate {
    fn from(p: GammaParamsMeanVar) -> Self {
        Self {
            alpha: p.mu * p.mu / p.nu,
            beta: p.mu / p.nu,
        }
    }
}

impl From<GammaParamsShapeRate> for GammaParamsMeanVar {
    fn from(p: GammaParamsShapeRate) -> Self {
        Self {
            mu: p.alpha / p.beta,
            nu: p.alpha / (p.beta * p.beta),
        }
    }
}
