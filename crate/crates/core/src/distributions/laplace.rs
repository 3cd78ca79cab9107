use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, ensure_positive, Result};

/// Classical (symmetric) Laplace law CL(theta, s).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LaplaceParams {
    pub theta: f64,
    pub s: f64,
}

impl LaplaceParams {
    pub fn new(theta: f64, s: f64) -> Result<Self> {
        ensure_finite("theta", theta)?;
        ensure_positive("s", s)?;
        Ok(Self { theta, s })
    }

    pub fn standard() -> Self {
        Self { theta: 0.0, s: 1.0 }
    }
}

pub fn laplace_pdf(p: &LaplaceParams, x: f64) -> f64 {
    (-(x - p.theta).abs() / p.s).exp() / (2.0 * p.s)
}

pub fn laplace_cdf(p: &LaplaceParams, x: f64) -> f64 {
    let z = (x - p.theta) / p.s;
    if z < 0.0 {
        0.5 * z.exp()
    } else {
        1.0 - 0.5 * (-z).exp()
    }
}

/// `e^{itθ} / (1 + s²t²)`.
pub fn laplace_cf(p: &LaplaceParams, t: f64) -> Complex64 {
    Complex64::from_polar(1.0 / (1.0 + p.s * p.s * t * t), t * p.theta)
}

/// n-th central moment: zero for odd n, `sⁿ n!` for even n.
pub fn laplace_central_moment(p: &LaplaceParams, n: u32) -> f64 {
    if n % 2 == 1 {
        return 0.0;
    }
    let factorial: f64 = (1..=n).map(f64::from).product();
    p.s.powi(n as i32) * factorial
}

/// Kurtosis m4 / m2², equal to 6 for every scale.
pub fn laplace_kurtosis(p: &LaplaceParams) -> f64 {
    let m2 = laplace_central_moment(p, 2);
    laplace_central_moment(p, 4) / (m2 * m2)
}
