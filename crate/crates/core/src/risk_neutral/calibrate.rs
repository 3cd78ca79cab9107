//! Least-squares calibration of Black-Scholes and risk-neutral VG to call quotes.

use serde::{Deserialize, Serialize};

use super::{price_call_black_scholes, OptionQuote, VgCallPricer};
use crate::error::{Error, Result};
use crate::estimators::{FitResult, Model, ModelParams};
use crate::numerics::{nelder_mead, QuadratureSpec, SimplexOptions, SimplexResult};
use crate::processes::VgProcessParams;

pub const MIN_QUOTES: usize = 5;

/// Mean squared error floor used when converting a (near) zero residual sum into a
/// log-likelihood, so exact fits stay finite.
const MIN_MSE: f64 = 1e-20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RiskNeutralModel {
    BlackScholes,
    Vg,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationResult {
    pub fit: FitResult,
    /// Sum of squared price errors.
    pub sse: f64,
    pub rmse: f64,
}

/// Gaussian-error log-likelihood with the error variance profiled out.
fn profile_loglik(sse: f64, n: usize) -> f64 {
    let n = n as f64;
    let mse = (sse / n).max(MIN_MSE);
    -0.5 * n * ((2.0 * std::f64::consts::PI * mse).ln() + 1.0)
}

fn simplex_options() -> SimplexOptions {
    SimplexOptions {
        ftol: 1e-10,
        xtol: 1e-9,
        max_iterations: 2000,
    }
}

/// Pricing tolerance during calibration. The VG drift is weakly identified from a single
/// maturity (prices move by ~1e-11 over a 10% change in θ), so quadrature noise has to stay
/// below that.
fn calibration_spec() -> QuadratureSpec {
    QuadratureSpec {
        abs_tol: 1e-15,
        rel_tol: 1e-13,
        max_subdivisions: 4000,
    }
}

/// The simplex minimises `ln SSE`, which keeps resolving improvements when the residuals are
/// tiny; the minimiser is the same as for SSE itself.
fn log_objective(sse: f64) -> f64 {
    sse.max(f64::MIN_POSITIVE).ln()
}

fn bs_sse(quotes: &[OptionQuote], sigma: f64) -> f64 {
    quotes
        .iter()
        .map(|q| match price_call_black_scholes(&q.market(), q.strike, sigma) {
            Ok(price) => (price - q.mid_price).powi(2),
            Err(_) => f64::INFINITY,
        })
        .sum()
}

/// Sum of squared VG pricing errors; one pricer per distinct (maturity, spot, rate).
fn vg_sse(quotes: &[OptionQuote], p: &VgProcessParams, spec: &QuadratureSpec) -> f64 {
    let mut sse = 0.0;
    let mut start = 0;
    while start < quotes.len() {
        let q0 = quotes[start];
        let end = start
            + quotes[start..]
                .iter()
                .take_while(|q| q.maturity == q0.maturity && q.spot == q0.spot && q.rate == q0.rate)
                .count();
        let Ok(pricer) = VgCallPricer::new(p, &q0.market(), spec) else {
            return f64::INFINITY;
        };
        for q in &quotes[start..end] {
            match pricer.price(q.strike) {
                Ok(price) => sse += (price - q.mid_price).powi(2),
                Err(_) => return f64::INFINITY,
            }
        }
        start = end;
    }
    sse
}

fn sorted_quotes(quotes: &[OptionQuote]) -> Result<Vec<OptionQuote>> {
    if quotes.len() < MIN_QUOTES {
        return Err(Error::InsufficientQuotes {
            needed: MIN_QUOTES,
            got: quotes.len(),
        });
    }
    for q in quotes {
        q.validate()?;
    }
    let mut sorted = quotes.to_vec();
    sorted.sort_by(|a, b| {
        (a.maturity, a.spot, a.rate, a.strike)
            .partial_cmp(&(b.maturity, b.spot, b.rate, b.strike))
            .expect("validated quotes are finite")
    });
    Ok(sorted)
}

fn fit_black_scholes(quotes: &[OptionQuote]) -> (f64, SimplexResult) {
    let objective = |x: &[f64]| log_objective(bs_sse(quotes, x[0].exp()));
    let mut best = nelder_mead(objective, &[0.2f64.ln()], &[0.5], &simplex_options());
    let polish = nelder_mead(objective, &best.x, &[0.01], &simplex_options());
    let iterations = best.iterations + polish.iterations;
    if polish.value <= best.value {
        best = polish;
    }
    best.iterations = iterations;
    best.value = best.value.exp();
    (best.x[0].exp(), best)
}

/// Calibrates a risk-neutral model to call quotes by least squares on prices.
///
/// The Esscher-transformed law depends on θ only through θ², so VG fits report the
/// non-positive representative of θ.
pub fn calibrate_quotes(quotes: &[OptionQuote], model: RiskNeutralModel) -> Result<CalibrationResult> {
    let quotes = sorted_quotes(quotes)?;
    let n = quotes.len();
    let (sigma_bs, bs) = fit_black_scholes(&quotes);
    let (params, sse, converged, iterations) = match model {
        RiskNeutralModel::BlackScholes => (ModelParams::BlackScholes { sigma: sigma_bs }, bs.value, bs.converged, bs.iterations),
        RiskNeutralModel::Vg => {
            let spec = calibration_spec();
            let objective = |x: &[f64]| {
                let p = VgProcessParams {
                    theta: x[0],
                    sigma: x[1].exp(),
                    nu: x[2].exp(),
                };
                log_objective(vg_sse(&quotes, &p, &spec))
            };
            let mut best: Option<SimplexResult> = None;
            let mut iterations = 0;
            for theta0 in [-0.3, -0.1, -0.02] {
                for nu0 in [0.05, 0.3] {
                    let x0 = [theta0, sigma_bs.ln(), f64::ln(nu0)];
                    let r = nelder_mead(objective, &x0, &[0.05, 0.1, 0.5], &simplex_options());
                    iterations += r.iterations;
                    if best.as_ref().map_or(true, |b| r.value < b.value) {
                        best = Some(r);
                    }
                }
            }
            let mut best = best.expect("at least one start");
            let polish = nelder_mead(objective, &best.x, &[0.01, 0.02, 0.1], &simplex_options());
            iterations += polish.iterations;
            if polish.value <= best.value {
                best = polish;
            }
            best.value = best.value.exp();
            // ν = 0 is Black-Scholes; keep it if no VG point improves on it.
            if bs.value < best.value {
                (
                    ModelParams::Vg {
                        theta: 0.0,
                        sigma: sigma_bs,
                        nu: 0.0,
                    },
                    bs.value,
                    bs.converged,
                    iterations,
                )
            } else if !best.value.is_finite() {
                return Err(Error::OptimizationFailed("no admissible VG parameters found".into()));
            } else {
                (
                    ModelParams::Vg {
                        theta: -best.x[0].abs(),
                        sigma: best.x[1].exp(),
                        nu: best.x[2].exp(),
                    },
                    best.value,
                    best.converged,
                    iterations,
                )
            }
        }
    };
    if !sse.is_finite() {
        return Err(Error::OptimizationFailed("calibration objective is not finite".into()));
    }
    Ok(CalibrationResult {
        fit: FitResult {
            model: match model {
                RiskNeutralModel::BlackScholes => Model::BlackScholes,
                RiskNeutralModel::Vg => Model::Vg,
            },
            params,
            log_likelihood: profile_loglik(sse, n),
            n_obs: n,
            converged,
            iterations,
        },
        sse,
        rmse: (sse / n as f64).sqrt(),
    })
}

pub fn fit_risk_neutral(quotes: &[OptionQuote], model: RiskNeutralModel) -> Result<FitResult> {
    Ok(calibrate_quotes(quotes, model)?.fit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::risk_neutral::{price_call_vg, MarketParams};

    fn quotes_from<F: Fn(f64) -> f64>(price: F, maturity: f64) -> Vec<OptionQuote> {
        (0..15)
            .map(|i| {
                let strike = 80.0 + 3.0 * i as f64;
                OptionQuote {
                    strike,
                    maturity,
                    mid_price: price(strike),
                    spot: 100.0,
                    rate: 0.03,
                }
            })
            .collect()
    }

    #[test]
    fn too_few_quotes() {
        let q = quotes_from(|k| (100.0 - k).max(0.0) + 1.0, 0.5);
        assert!(matches!(
            fit_risk_neutral(&q[..4], RiskNeutralModel::BlackScholes),
            Err(Error::InsufficientQuotes { needed: 5, got: 4 })
        ));
    }

    #[test]
    fn black_scholes_round_trip() {
        let m = MarketParams::new(0.03, 100.0, 0.5).unwrap();
        let q = quotes_from(|k| price_call_black_scholes(&m, k, 0.18).unwrap(), 0.5);
        let fit = fit_risk_neutral(&q, RiskNeutralModel::BlackScholes).unwrap();
        match fit.params {
            ModelParams::BlackScholes { sigma } => assert!((sigma - 0.18).abs() < 1e-4, "{sigma}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    /// `(θ̃ν̃, σ²ν̃)`: with ν these fix the tilted law.
    fn tilted_invariants(p: &VgProcessParams, m: &MarketParams) -> (f64, f64) {
        let sol = crate::risk_neutral::solve_h_star(p, m).unwrap();
        (sol.theta_tilde * sol.nu_tilde, p.sigma * p.sigma * sol.nu_tilde)
    }

    #[test]
    fn prices_only_see_tilted_invariants() {
        let truth = VgProcessParams::new(-0.1, 0.2, 0.05).unwrap();
        let m = MarketParams::new(0.03, 100.0, 0.5).unwrap();
        let (a, b) = tilted_invariants(&truth, &m);
        // θ = 0 point with the same invariants: ν̃ = ν(1 + a²/2b).
        let nu_tilde = truth.nu * (1.0 + a * a / (2.0 * b));
        let twin = VgProcessParams::new(0.0, (b / nu_tilde).sqrt(), truth.nu).unwrap();
        let spec = QuadratureSpec::default();
        for k in [80.0, 95.0, 100.0, 110.0, 122.0] {
            let p1 = price_call_vg(&truth, &m, k, &spec).unwrap();
            let p2 = price_call_vg(&twin, &m, k, &spec).unwrap();
            assert!((p1 - p2).abs() < 1e-11, "{k}: {p1} {p2}");
        }
    }

    #[test]
    fn vg_round_trip_and_nesting() {
        let truth = VgProcessParams::new(-0.1, 0.2, 0.05).unwrap();
        let m = MarketParams::new(0.03, 100.0, 0.5).unwrap();
        let spec = QuadratureSpec::default();
        let q = quotes_from(|k| price_call_vg(&truth, &m, k, &spec).unwrap(), 0.5);
        let vg = calibrate_quotes(&q, RiskNeutralModel::Vg).unwrap();
        let bs = calibrate_quotes(&q, RiskNeutralModel::BlackScholes).unwrap();
        assert!(vg.sse <= bs.sse);
        assert!(vg.sse < 1e-20, "{}", vg.sse);
        let p = vg.fit.params.as_vg().unwrap();
        assert!(((p.nu - truth.nu) / truth.nu).abs() < 0.05, "{p:?}");
        let (a0, b0) = tilted_invariants(&truth, &m);
        let (a1, b1) = tilted_invariants(&p, &m);
        assert!(((a1 - a0) / a0).abs() < 1e-4 && ((b1 - b0) / b0).abs() < 1e-4, "{p:?}");
    }
}
