//! Laplace estimators and their efficiency study, Gaussian and VG likelihood fits to return
//! samples, and the likelihood-ratio test between nested fits.

mod fit;
mod laplace;
mod lrt;

use serde::{Deserialize, Serialize};

use crate::distributions::LaplaceParams;
use crate::processes::VgProcessParams;

pub use fit::{fit_returns, gaussian_loglik, laplace_loglik, vg_loglik, VgFitOptions, fit_vg_returns};
pub use laplace::{laplace_fit_mle, laplace_fit_moments, run_efficiency_experiment, EfficiencyReport};
pub use lrt::{likelihood_ratio_test, lrt_from_logliks, LikelihoodRatio};

/// VG return parameters: drift θ per unit time, volatility σ per √time, clock variance rate
/// ν. `ν = 0` is the Gaussian sub-model.
pub type VgReturnParams = VgProcessParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    Gaussian,
    Laplace,
    Vg,
    BlackScholes,
}

impl Model {
    pub fn name(&self) -> &'static str {
        match self {
            Model::Gaussian => "gaussian",
            Model::Laplace => "laplace",
            Model::Vg => "vg",
            Model::BlackScholes => "bs",
        }
    }

    /// Number of free parameters.
    pub fn dimension(&self) -> usize {
        match self {
            Model::Gaussian | Model::Laplace => 2,
            Model::Vg => 3,
            Model::BlackScholes => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelParams {
    Gaussian { theta: f64, sigma: f64 },
    Laplace { theta: f64, s: f64 },
    Vg { theta: f64, sigma: f64, nu: f64 },
    BlackScholes { sigma: f64 },
}

impl ModelParams {
    pub fn model(&self) -> Model {
        match self {
            ModelParams::Gaussian { .. } => Model::Gaussian,
            ModelParams::Laplace { .. } => Model::Laplace,
            ModelParams::Vg { .. } => Model::Vg,
            ModelParams::BlackScholes { .. } => Model::BlackScholes,
        }
    }

    pub fn theta(&self) -> Option<f64> {
        match *self {
            ModelParams::Gaussian { theta, .. } | ModelParams::Laplace { theta, .. } | ModelParams::Vg { theta, .. } => {
                Some(theta)
            }
            ModelParams::BlackScholes { .. } => None,
        }
    }

    pub fn sigma(&self) -> Option<f64> {
        match *self {
            ModelParams::Gaussian { sigma, .. } | ModelParams::Vg { sigma, .. } | ModelParams::BlackScholes { sigma } => {
                Some(sigma)
            }
            ModelParams::Laplace { .. } => None,
        }
    }

    /// ν for VG fits, 0 for the Gaussian and Black-Scholes sub-models.
    pub fn nu(&self) -> Option<f64> {
        match *self {
            ModelParams::Vg { nu, .. } => Some(nu),
            ModelParams::Gaussian { .. } | ModelParams::BlackScholes { .. } => Some(0.0),
            ModelParams::Laplace { .. } => None,
        }
    }

    pub fn as_vg(&self) -> Option<VgProcessParams> {
        match *self {
            ModelParams::Vg { theta, sigma, nu } => Some(VgProcessParams { theta, sigma, nu }),
            ModelParams::Gaussian { theta, sigma } => Some(VgProcessParams { theta, sigma, nu: 0.0 }),
            _ => None,
        }
    }
}

impl From<LaplaceParams> for ModelParams {
    fn from(p: LaplaceParams) -> Self {
        ModelParams::Laplace { theta: p.theta, s: p.s }
    }
}

impl From<VgProcessParams> for ModelParams {
    fn from(p: VgProcessParams) -> Self {
        ModelParams::Vg {
            theta: p.theta,
            sigma: p.sigma,
            nu: p.nu,
        }
    }
}

/// Outcome of a likelihood fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub model: Model,
    pub params: ModelParams,
    pub log_likelihood: f64,
    pub n_obs: usize,
    pub converged: bool,
    pub iterations: usize,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fit_result_json_round_trip() {
        for params in [
            ModelParams::Gaussian { theta: 5.925507e-4, sigma: 0.01141282 },
            ModelParams::Vg { theta: -0.001323872, sigma: 0.01201207, nu: 0.02942378 },
            ModelParams::BlackScholes { sigma: 0.1 + 0.2 },
        ] {
            let fit = FitResult {
                model: Model::Vg,
                params,
                log_likelihood: 1012.215,
                n_obs: 252,
                converged: true,
                iterations: 317,
            };
            let text = serde_json::to_string(&fit).unwrap();
            assert_eq!(serde_json::from_str::<FitResult>(&text).unwrap(), fit);
        }
        let json = serde_json::to_value(ModelParams::Vg { theta: 0.0, sigma: 1.0, nu: 0.5 }).unwrap();
        assert_eq!(json["kind"], "vg");
    }
}
