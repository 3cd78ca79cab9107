use serde::{Deserialize, Serialize};

use super::{FitResult, Model};
use crate::error::{Error, Result};
use crate::numerics::special::chi2_sf;

/// Wilks statistic `2(logL_alt - logL_null)` and its χ²_df upper-tail p-value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LikelihoodRatio {
    pub statistic: f64,
    pub p_value: f64,
    pub df: u32,
}

impl LikelihoodRatio {
    pub fn rejects_at(&self, level: f64) -> bool {
        self.p_value < level
    }
}

/// Negative statistics smaller in magnitude than this (relative to the alternative's
/// log-likelihood) are treated as optimizer noise and clamped to zero.
const NESTING_TOL: f64 = 1e-6;

pub fn lrt_from_logliks(null_loglik: f64, alt_loglik: f64, df: u32) -> Result<LikelihoodRatio> {
    if df == 0 {
        return Err(Error::InvalidParameter("df must be at least 1".into()));
    }
    if !null_loglik.is_finite() || !alt_loglik.is_finite() {
        return Err(Error::InvalidParameter("log-likelihoods must be finite".into()));
    }
    let raw = 2.0 * (alt_loglik - null_loglik);
    if raw < -NESTING_TOL * alt_loglik.abs().max(1.0) {
        return Err(Error::InvalidNesting(format!(
            "alternative log-likelihood {alt_loglik} is below the null's {null_loglik}"
        )));
    }
    let statistic = raw.max(0.0);
    Ok(LikelihoodRatio {
        statistic,
        p_value: chi2_sf(statistic, df as f64),
        df,
    })
}

fn nests(null: Model, alt: Model) -> bool {
    null == alt || matches!((null, alt), (Model::Gaussian, Model::Vg) | (Model::BlackScholes, Model::Vg))
}

pub fn likelihood_ratio_test(fit_null: &FitResult, fit_alt: &FitResult, df: u32) -> Result<LikelihoodRatio> {
    if !nests(fit_null.model, fit_alt.model) {
        return Err(Error::InvalidNesting(format!(
            "{} is not a sub-model of {}",
            fit_null.model.name(),
            fit_alt.model.name()
        )));
    }
    if fit_null.n_obs != fit_alt.n_obs {
        return Err(Error::InvalidNesting(format!(
            "fits use different samples ({} vs {} observations)",
            fit_null.n_obs, fit_alt.n_obs
        )));
    }
    lrt_from_logliks(fit_null.log_likelihood, fit_alt.log_likelihood, df)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::ModelParams;

    fn fit(model: Model, ll: f64) -> FitResult {
        let params = match model {
            Model::Gaussian => ModelParams::Gaussian { theta: 0.0, sigma: 1.0 },
            _ => ModelParams::Vg {
                theta: 0.0,
                sigma: 1.0,
                nu: 0.1,
            },
        };
        FitResult {
            model,
            params,
            log_likelihood: ll,
            n_obs: 100,
            converged: true,
            iterations: 1,
        }
    }

    #[test]
    fn reported_statistic() {
        let r = likelihood_ratio_test(&fit(Model::Gaussian, 1004.44275), &fit(Model::Vg, 1012.215), 1).unwrap();
        assert!((r.statistic - 15.5445).abs() < 1e-9);
        assert_eq!(format!("{:.4}", r.statistic), "15.5445");
        assert!(r.p_value < 1e-4);
    }

    #[test]
    fn identical_fits() {
        let r = lrt_from_logliks(10.0, 10.0, 1).unwrap();
        assert_eq!((r.statistic, r.p_value), (0.0, 1.0));
    }

    #[test]
    fn rejects_reversed_nesting() {
        assert!(matches!(lrt_from_logliks(12.0, 10.0, 1), Err(Error::InvalidNesting(_))));
        assert!(matches!(
            likelihood_ratio_test(&fit(Model::Vg, 1.0), &fit(Model::Gaussian, 2.0), 1),
            Err(Error::InvalidNesting(_))
        ));
        assert!(lrt_from_logliks(1.0, 2.0, 0).is_err());
    }

    #[test]
    fn tiny_negative_noise_is_clamped() {
        let r = lrt_from_logliks(1000.0, 1000.0 - 1e-7, 1).unwrap();
        assert_eq!(r.statistic, 0.0);
    }
}
