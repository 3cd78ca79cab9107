//! Symmetric and general Variance-Gamma laws.
//!
//! A VG variate is the normal mean-variance mixture `X = c + θV + σ√V·Z` with
//! `V ~ Gamma(α, β)` (shape/rate) and `Z ~ N(0,1)`. There is no elementary density, so the
//! density and CDF are one-dimensional integrals over the mixing variable `v`:
//!
//! ```text
//! f(x) = ∫ φ((x - c - θv) / (σ√v)) / (σ√v) · g(v) dv
//! F(x) = ∫ Φ((x - c - θv) / (σ√v)) · g(v) dv
//! ```
//!
//! Both are evaluated by [`VgDensity`], which seeds the adaptive quadrature with
//! breakpoints at the bulk of the mixing law so that sharply concentrated mixing
//! densities (shape in the millions) are resolved.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, ensure_positive, Result};
use crate::numerics::quadrature::{integrate_semi_infinite_with_breaks, QuadratureSpec, SemiInfiniteNodes};
use crate::numerics::special::{norm_cdf, GammaLogDensity};

/// Symmetric VG law: location θ plus `σ√V·Z`, `V ~ Gamma(α, β)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvgParams {
    pub theta: f64,
    pub sigma: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl SvgParams {
    pub fn new(theta: f64, sigma: f64, alpha: f64, beta: f64) -> Result<Self> {
        ensure_finite("theta", theta)?;
        ensure_positive("sigma", sigma)?;
        ensure_positive("alpha", alpha)?;
        ensure_positive("beta", beta)?;
        Ok(Self {
            theta,
            sigma,
            alpha,
            beta,
        })
    }
}

/// General VG law `c + θV + σ√V·Z`, `V ~ Gamma(α, β)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VgParams {
    pub c: f64,
    pub theta: f64,
    pub sigma: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl VgParams {
    pub fn new(c: f64, theta: f64, sigma: f64, alpha: f64, beta: f64) -> Result<Self> {
        ensure_finite("c", c)?;
        ensure_finite("theta", theta)?;
        ensure_positive("sigma", sigma)?;
        ensure_positive("alpha", alpha)?;
        ensure_positive("beta", beta)?;
        Ok(Self {
            c,
            theta,
            sigma,
            alpha,
            beta,
        })
    }

    pub fn mean(&self) -> f64 {
        self.c + self.theta * self.alpha / self.beta
    }

    pub fn variance(&self) -> f64 {
        let ev = self.alpha / self.beta;
        let var_v = self.alpha / (self.beta * self.beta);
        self.sigma * self.sigma * ev + self.theta * self.theta * var_v
    }
}

impl From<SvgParams> for VgParams {
    fn from(p: SvgParams) -> Self {
        Self {
            c: p.theta,
            theta: 0.0,
            sigma: p.sigma,
            alpha: p.alpha,
            beta: p.beta,
        }
    }
}

/// `e^{itθ} (1 + t²σ²/(2β))^{-α}`.
pub fn svg_cf(p: &SvgParams, t: f64) -> Complex64 {
    let base = (t * t * p.sigma * p.sigma / (2.0 * p.beta)).ln_1p();
    Complex64::from_polar((-p.alpha * base).exp(), t * p.theta)
}

/// `e^{itc} (1 - iθt/β + t²σ²/(2β))^{-α}`.
///
/// The base has real part ≥ 1, so the principal logarithm never crosses its branch cut.
pub fn vg_cf(p: &VgParams, t: f64) -> Complex64 {
    let base = Complex64::new(
        1.0 + t * t * p.sigma * p.sigma / (2.0 * p.beta),
        -p.theta * t / p.beta,
    );
    let phase = Complex64::new(0.0, t * p.c).exp();
    phase * (-p.alpha * base.ln()).exp()
}

/// Reusable evaluator for the VG density, CDF and survival function of one parameter set.
///
/// Everything that depends only on the mixing variable is tabulated once at the first-pass
/// quadrature nodes, so repeated evaluations (likelihoods over many observations, strike
/// grids) cost little more than one exponential per node. When the first pass does not meet
/// the tolerance the full adaptive routine is used.
#[derive(Debug, Clone)]
pub struct VgDensity {
    params: VgParams,
    mixing: GammaLogDensity,
    breaks: Vec<f64>,
    spec: QuadratureSpec,
    nodes: SemiInfiniteNodes,
    /// `ln g(v) - ½ ln(2πσ²v)` at each node.
    ln_base: Vec<f64>,
    /// `g(v)` at each node.
    weight: Vec<f64>,
}

impl VgDensity {
    pub fn new(params: VgParams, spec: QuadratureSpec) -> Self {
        let shape = params.alpha;
        let scale = 1.0 / params.beta;
        let mixing = GammaLogDensity::new(shape, scale);
        let breaks = mixing_breaks(shape, scale);
        let nodes = SemiInfiniteNodes::new(0.0, &breaks);
        let s2 = params.sigma * params.sigma;
        let ln_g: Vec<f64> = nodes.nodes().iter().map(|&v| mixing.eval(v)).collect();
        let ln_base = nodes
            .nodes()
            .iter()
            .zip(&ln_g)
            .map(|(&v, &lg)| lg - 0.5 * (2.0 * std::f64::consts::PI * s2 * v).ln())
            .collect();
        let weight = ln_g.iter().map(|&lg| lg.exp()).collect();
        Self {
            params,
            mixing,
            breaks,
            spec,
            nodes,
            ln_base,
            weight,
        }
    }

    pub fn params(&self) -> &VgParams {
        &self.params
    }

    fn mixture<K: Fn(f64) -> f64>(&self, kernel: K) -> Result<f64> {
        let values: Vec<f64> = self
            .nodes
            .nodes()
            .iter()
            .zip(&self.weight)
            .map(|(&v, &w)| if w == 0.0 { 0.0 } else { kernel(v) * w })
            .collect();
        if let Some(value) = self.nodes.first_pass(&values, &self.spec) {
            return Ok(value);
        }
        integrate_semi_infinite_with_breaks(
            |v| {
                let w = self.mixing.eval(v);
                if w == f64::NEG_INFINITY {
                    0.0
                } else {
                    kernel(v) * w.exp()
                }
            },
            0.0,
            &self.breaks,
            &self.spec,
        )
    }

    pub fn pdf(&self, x: f64) -> Result<f64> {
        let VgParams { c, theta, sigma, .. } = self.params;
        let d = x - c;
        let s2 = sigma * sigma;
        let values: Vec<f64> = self
            .nodes
            .nodes()
            .iter()
            .zip(&self.ln_base)
            .map(|(&v, &base)| {
                let r = d - theta * v;
                let ln_total = base - r * r / (2.0 * s2 * v);
                if ln_total.is_finite() {
                    ln_total.exp()
                } else {
                    0.0
                }
            })
            .collect();
        if let Some(value) = self.nodes.first_pass(&values, &self.spec) {
            return Ok(value.max(0.0));
        }
        let value = integrate_semi_infinite_with_breaks(
            |v| {
                let r = d - theta * v;
                let ln_kernel = -r * r / (2.0 * s2 * v) - 0.5 * (2.0 * std::f64::consts::PI * s2 * v).ln();
                let ln_total = ln_kernel + self.mixing.eval(v);
                if ln_total.is_finite() {
                    ln_total.exp()
                } else {
                    0.0
                }
            },
            0.0,
            &self.breaks,
            &self.spec,
        )?;
        Ok(value.max(0.0))
    }

    pub fn ln_pdf(&self, x: f64) -> Result<f64> {
        Ok(self.pdf(x)?.ln())
    }

    pub fn cdf(&self, x: f64) -> Result<f64> {
        let VgParams { c, theta, sigma, .. } = self.params;
        let d = x - c;
        Ok(self
            .mixture(|v| norm_cdf((d - theta * v) / (sigma * v.sqrt())))?
            .clamp(0.0, 1.0))
    }

    /// `1 - F(x)`, integrated directly so that it keeps relative accuracy in the upper tail.
    pub fn sf(&self, x: f64) -> Result<f64> {
        let VgParams { c, theta, sigma, .. } = self.params;
        let d = x - c;
        Ok(self
            .mixture(|v| norm_cdf(-(d - theta * v) / (sigma * v.sqrt())))?
            .clamp(0.0, 1.0))
    }
}

/// Initial partition for integrals against a Gamma(shape, scale) mixing density: points at
/// the mean and at 1, 2, 4 and 8 standard deviations on each side, 16 above, and at halvings
/// of the mean down to a sixteenth for the lower tail (positive points only).
fn mixing_breaks(shape: f64, scale: f64) -> Vec<f64> {
    let mean = shape * scale;
    let sd = shape.sqrt() * scale;
    [-8.0, -4.0, -2.0, -1.0, 0.0, 1.0, 2.0, 4.0, 8.0, 16.0]
        .iter()
        .map(|k| mean + k * sd)
        .chain([0.5, 0.25, 0.125, 0.0625].iter().map(|f| f * mean))
        .filter(|&v| v > 0.0)
        .collect()
}

pub fn vg_pdf(p: &VgParams, x: f64, spec: &QuadratureSpec) -> Result<f64> {
    VgDensity::new(*p, *spec).pdf(x)
}

pub fn vg_cdf(p: &VgParams, x: f64, spec: &QuadratureSpec) -> Result<f64> {
    VgDensity::new(*p, *spec).cdf(x)
}

pub fn vg_sf(p: &VgParams, x: f64, spec: &QuadratureSpec) -> Result<f64> {
    VgDensity::new(*p, *spec).sf(x)
}
