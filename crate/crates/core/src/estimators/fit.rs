use std::f64::consts::PI;

use rayon::prelude::*;

use super::laplace::laplace_fit_mle;
use super::{FitResult, Model, ModelParams, VgReturnParams};
use crate::distributions::{laplace_pdf, LaplaceParams, VgDensity};
use crate::error::{ensure_positive, Error, Result};
use crate::numerics::stats::{central_moment, mean};
use crate::numerics::{nelder_mead, QuadratureSpec, SimplexOptions};
use crate::processes::vg_marginal_params;

pub const MIN_FIT_OBSERVATIONS: usize = 20;

/// `Σ log N(xᵢ; θ, σ²)`.
pub fn gaussian_loglik(sample: &[f64], theta: f64, sigma: f64) -> Result<f64> {
    ensure_positive("sigma", sigma)?;
    let ss: f64 = sample.iter().map(|x| (x - theta) * (x - theta)).sum();
    let n = sample.len() as f64;
    Ok(-0.5 * n * (2.0 * PI * sigma * sigma).ln() - ss / (2.0 * sigma * sigma))
}

pub fn laplace_loglik(sample: &[f64], p: &LaplaceParams) -> f64 {
    sample.iter().map(|&x| laplace_pdf(p, x).ln()).sum()
}

/// Log-likelihood of returns over periods of length `dt` under the VG process `p`. With
/// `ν = 0` this is the Gaussian log-likelihood with mean θ·dt and variance σ²·dt.
pub fn vg_loglik(sample: &[f64], p: &VgReturnParams, dt: f64) -> Result<f64> {
    vg_loglik_with(sample, p, dt, &QuadratureSpec::default())
}

pub(crate) fn vg_loglik_with(sample: &[f64], p: &VgReturnParams, dt: f64, spec: &QuadratureSpec) -> Result<f64> {
    ensure_positive("dt", dt)?;
    if p.nu == 0.0 {
        return gaussian_loglik(sample, p.theta * dt, p.sigma * dt.sqrt());
    }
    let density = VgDensity::new(vg_marginal_params(p, dt)?, *spec);
    // Collected before summing so the total does not depend on thread scheduling.
    let terms: Vec<f64> = sample
        .par_iter()
        .map(|&x| density.ln_pdf(x))
        .collect::<Result<_>>()?;
    Ok(terms.iter().sum())
}

/// Tuning for [`fit_vg_returns`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VgFitOptions {
    pub simplex: SimplexOptions,
    pub quadrature: QuadratureSpec,
    /// Lower search bound for ν, as a multiple of `dt`.
    pub nu_floor: f64,
}

impl Default for VgFitOptions {
    fn default() -> Self {
        Self {
            simplex: SimplexOptions::default(),
            quadrature: QuadratureSpec::default(),
            nu_floor: 1e-7,
        }
    }
}

fn check_returns(sample: &[f64], dt: f64) -> Result<()> {
    ensure_positive("dt", dt)?;
    if sample.len() < MIN_FIT_OBSERVATIONS {
        return Err(Error::InsufficientData {
            needed: MIN_FIT_OBSERVATIONS,
            got: sample.len(),
        });
    }
    if let Some(x) = sample.iter().find(|x| !x.is_finite()) {
        return Err(Error::InvalidParameter(format!("sample contains non-finite value {x}")));
    }
    Ok(())
}

/// Closed-form Gaussian MLE `(θ, σ)` per unit time.
fn gaussian_mle(sample: &[f64], dt: f64) -> Result<(f64, f64)> {
    let m = mean(sample);
    let var = central_moment(sample, 2);
    if var <= 0.0 {
        return Err(Error::DegenerateSample("returns have zero variance".into()));
    }
    Ok((m / dt, (var / dt).sqrt()))
}

/// Maximum-likelihood fit of the chosen model to returns over periods of length `dt`.
pub fn fit_returns(sample: &[f64], model: Model, dt: f64) -> Result<FitResult> {
    match model {
        Model::Gaussian => {
            check_returns(sample, dt)?;
            let (theta, sigma) = gaussian_mle(sample, dt)?;
            Ok(FitResult {
                model,
                params: ModelParams::Gaussian { theta, sigma },
                log_likelihood: gaussian_loglik(sample, theta * dt, sigma * dt.sqrt())?,
                n_obs: sample.len(),
                converged: true,
                iterations: 0,
            })
        }
        Model::Laplace => {
            check_returns(sample, dt)?;
            let p = laplace_fit_mle(sample)?;
            Ok(FitResult {
                model,
                params: p.into(),
                log_likelihood: laplace_loglik(sample, &p),
                n_obs: sample.len(),
                converged: true,
                iterations: 0,
            })
        }
        Model::Vg => fit_vg_returns(sample, dt, &VgFitOptions::default()),
        Model::BlackScholes => Err(Error::InvalidParameter(
            "Black-Scholes is fitted to option quotes, not returns".into(),
        )),
    }
}

/// VG maximum likelihood by simplex search over `(θ, log σ, log ν)`, started from the
/// Gaussian MLE with ν matched to the sample excess kurtosis.
///
/// The Gaussian MLE with ν at its lower bound is always evaluated as a candidate, so the
/// reported log-likelihood never falls below the Gaussian fit's by more than the quadrature
/// error.
pub fn fit_vg_returns(sample: &[f64], dt: f64, opts: &VgFitOptions) -> Result<FitResult> {
    check_returns(sample, dt)?;
    let (theta0, sigma0) = gaussian_mle(sample, dt)?;
    let nu_min = opts.nu_floor * dt;
    let m2 = central_moment(sample, 2);
    let excess = central_moment(sample, 4) / (m2 * m2) - 3.0;
    let nu0 = (excess / 3.0 * dt).max(1e-4).max(2.0 * nu_min);

    let mut first_error = None;
    let mut objective = |x: &[f64]| -> f64 {
        let nu = x[2].exp();
        if nu < nu_min {
            return f64::INFINITY;
        }
        let p = VgReturnParams {
            theta: x[0],
            sigma: x[1].exp(),
            nu,
        };
        match vg_loglik_with(sample, &p, dt, &opts.quadrature) {
            Ok(ll) => -ll,
            Err(e) => {
                first_error.get_or_insert(e);
                f64::INFINITY
            }
        }
    };

    let n = sample.len() as f64;
    let x0 = [theta0, sigma0.ln(), nu0.ln()];
    let step = [5.0 * sigma0 / (n * dt).sqrt(), 0.1, 0.7];
    let mut result = nelder_mead(&mut objective, &x0, &step, &opts.simplex);
    let mut iterations = result.iterations;
    // A restart from the reported optimum guards against a collapsed simplex.
    let restart_step = [step[0] * 0.2, 0.02, 0.2];
    let restarted = nelder_mead(&mut objective, &result.x, &restart_step, &opts.simplex);
    iterations += restarted.iterations;
    if restarted.value <= result.value {
        result = restarted;
    }

    let boundary = [theta0, sigma0.ln(), nu_min.ln()];
    let boundary_value = objective(&boundary);
    let (x, value) = if boundary_value < result.value {
        (boundary.to_vec(), boundary_value)
    } else {
        (result.x.clone(), result.value)
    };

    if !value.is_finite() {
        return Err(first_error.unwrap_or_else(|| {
            Error::OptimizationFailed("VG log-likelihood is not finite anywhere on the search path".into())
        }));
    }
    Ok(FitResult {
        model: Model::Vg,
        params: ModelParams::Vg {
            theta: x[0],
            sigma: x[1].exp(),
            nu: x[2].exp(),
        },
        log_likelihood: -value,
        n_obs: sample.len(),
        converged: result.converged,
        iterations,
    })
}
