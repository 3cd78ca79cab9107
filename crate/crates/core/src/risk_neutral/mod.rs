//! Esscher-transform risk-neutral measure for the VG model: the admissible tilt interval,
//! the martingale tilt h*, the tilted law, the ω compensator and European call prices, with
//! Black-Scholes as the ν = 0 case.

mod calibrate;

use serde::{Deserialize, Serialize};

use crate::distributions::{VgDensity, VgParams};
use crate::error::{ensure_finite, ensure_positive, Error, Result};
use crate::numerics::special::norm_cdf;
use crate::numerics::{find_root_bracketed, QuadratureSpec, DEFAULT_ROOT_TOL};
use crate::processes::VgProcessParams;

pub use calibrate::{calibrate_quotes, fit_risk_neutral, CalibrationResult, RiskNeutralModel};

/// Flat market: continuously compounded rate `r`, spot `s0`, maturity `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarketParams {
    pub r: f64,
    pub s0: f64,
    pub t: f64,
}

impl MarketParams {
    pub fn new(r: f64, s0: f64, t: f64) -> Result<Self> {
        ensure_finite("r", r)?;
        ensure_positive("s0", s0)?;
        ensure_positive("t", t)?;
        Ok(Self { r, s0, t })
    }
}

/// The martingale tilt and the transformed law it induces.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiskNeutralSolution {
    pub h_star: f64,
    pub h1: f64,
    pub h2: f64,
    pub theta_tilde: f64,
    pub nu_tilde: f64,
    pub martingale_residual: f64,
}

/// A European call quote.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptionQuote {
    pub strike: f64,
    /// Time to expiry in years.
    pub maturity: f64,
    pub mid_price: f64,
    pub spot: f64,
    pub rate: f64,
}

impl OptionQuote {
    pub fn validate(&self) -> Result<()> {
        ensure_positive("strike", self.strike)?;
        ensure_positive("maturity", self.maturity)?;
        ensure_positive("mid_price", self.mid_price)?;
        ensure_positive("spot", self.spot)?;
        ensure_finite("rate", self.rate)?;
        if self.mid_price >= self.spot {
            return Err(Error::InvalidParameter(format!(
                "call price {} must be below spot {}",
                self.mid_price, self.spot
            )));
        }
        Ok(())
    }

    pub fn market(&self) -> MarketParams {
        MarketParams {
            r: self.rate,
            s0: self.spot,
            t: self.maturity,
        }
    }
}

/// Roots `h1 < 0 < h2` of `1 - νθh - νσ²h²/2`.
pub fn admissible_interval(p: &VgProcessParams) -> Result<(f64, f64)> {
    if p.nu == 0.0 {
        return Err(Error::InvalidParameter(
            "nu = 0: the mgf exists on the whole real line".into(),
        ));
    }
    let a = 0.5 * p.nu * p.sigma * p.sigma;
    let b = p.nu * p.theta;
    // Cancellation-free pair: q/a and -1/q, whose product is -1/a.
    let q = -0.5 * (b + b.signum() * (b * b + 4.0 * a).sqrt());
    let q = if b == 0.0 { -(a.sqrt()) } else { q };
    let (r1, r2) = (q / a, -1.0 / q);
    Ok(if r1 < r2 { (r1, r2) } else { (r2, r1) })
}

fn mgf_domain_error(h: f64, h1: f64, h2: f64) -> Error {
    Error::MgfDomain {
        arg: h,
        lower: h1,
        upper: h2,
    }
}

/// `ln(1 - νθh - νσ²h²/2)` evaluated through its factorization `(νσ²/2)(h - h1)(h2 - h)`.
fn ln_quadratic(p: &VgProcessParams, h: f64, h1: f64, h2: f64) -> f64 {
    (0.5 * p.nu * p.sigma * p.sigma).ln() + (h - h1).ln() + (h2 - h).ln()
}

/// `ln M(h, t)`.
fn ln_mgf(p: &VgProcessParams, h: f64, t: f64) -> Result<f64> {
    if p.nu == 0.0 {
        return Ok(t * (p.theta * h + 0.5 * p.sigma * p.sigma * h * h));
    }
    let (h1, h2) = admissible_interval(p)?;
    if !(h > h1 && h < h2) {
        return Err(mgf_domain_error(h, h1, h2));
    }
    Ok(-(t / p.nu) * ln_quadratic(p, h, h1, h2))
}

/// `M(h, t) = E[e^{hX_t}] = (1 - νθh - νσ²h²/2)^{-t/ν}` on `(h1, h2)`.
pub fn vg_mgf(p: &VgProcessParams, h: f64, t: f64) -> Result<f64> {
    Ok(ln_mgf(p, h, t)?.exp())
}

/// Tilted drift `θ + hσ²` and clock variance rate `ν / (1 - νθh - νσ²h²/2)`.
pub fn esscher_transform_params(p: &VgProcessParams, h: f64) -> Result<(f64, f64)> {
    let theta_tilde = p.theta + h * p.sigma * p.sigma;
    if p.nu == 0.0 {
        return Ok((theta_tilde, 0.0));
    }
    let (h1, h2) = admissible_interval(p)?;
    if !(h > h1 && h < h2) {
        return Err(mgf_domain_error(h, h1, h2));
    }
    Ok((theta_tilde, p.nu / ln_quadratic(p, h, h1, h2).exp()))
}

/// Solves `e^{rt} = M(h+1, t) / M(h, t)` for the Esscher tilt.
///
/// For ν > 0 the equation reduces to `e^{rν} = D(h) / D(h+1)` with `D` the mgf quadratic,
/// which is strictly increasing in `h` on `(h1, h2 - 1)` and is solved there by bracketing.
pub fn solve_h_star(p: &VgProcessParams, m: &MarketParams) -> Result<RiskNeutralSolution> {
    let s2 = p.sigma * p.sigma;
    if p.nu == 0.0 {
        let h_star = (m.r - p.theta) / s2 - 0.5;
        let log_ratio = ln_mgf(p, h_star + 1.0, m.t)? - ln_mgf(p, h_star, m.t)?;
        return Ok(RiskNeutralSolution {
            h_star,
            h1: f64::NEG_INFINITY,
            h2: f64::INFINITY,
            theta_tilde: p.theta + h_star * s2,
            nu_tilde: 0.0,
            martingale_residual: (log_ratio - m.r * m.t).exp_m1().abs(),
        });
    }
    let (h1, h2) = admissible_interval(p)?;
    let hi = h2 - 1.0;
    if hi <= h1 {
        return Err(Error::NoSolution(format!(
            "admissible interval ({h1}, {h2}) is narrower than 1"
        )));
    }
    let target = m.r * p.nu;
    // ln D(h) - ln D(h+1) written through the roots so it stays accurate when |h1|, |h2| are large.
    let reduced = |h: f64| -(1.0 / (h - h1)).ln_1p() - (-1.0 / (h2 - h)).ln_1p();
    let h_star = find_root_bracketed(|h| reduced(h) - target, h1, hi, DEFAULT_ROOT_TOL).map_err(|e| match e {
        Error::InvalidBracket { .. } => Error::NoSolution(format!("no martingale tilt in ({h1}, {hi})")),
        other => other,
    })?;
    if !(h_star > h1 && h_star < hi) {
        return Err(Error::NoSolution(format!("tilt {h_star} outside ({h1}, {hi})")));
    }
    let (theta_tilde, nu_tilde) = esscher_transform_params(p, h_star)?;
    let martingale_residual = ((m.t / p.nu) * reduced(h_star) - m.r * m.t).exp_m1().abs();
    Ok(RiskNeutralSolution {
        h_star,
        h1,
        h2,
        theta_tilde,
        nu_tilde,
        martingale_residual,
    })
}

/// Law of `X_t` under the Esscher measure with tilt `h`.
#[derive(Debug, Clone)]
pub enum TiltedLaw {
    Gaussian { mean: f64, sd: f64 },
    Vg(VgDensity),
}

impl TiltedLaw {
    /// Tilted subordinator: shape `t/ν`, scale `ν̃`; conditional law `N(θ̃g, σ²g)`.
    pub fn new(p: &VgProcessParams, t: f64, h: f64, spec: &QuadratureSpec) -> Result<Self> {
        ensure_positive("t", t)?;
        let (theta_tilde, nu_tilde) = esscher_transform_params(p, h)?;
        if p.nu == 0.0 {
            return Ok(TiltedLaw::Gaussian {
                mean: theta_tilde * t,
                sd: p.sigma * t.sqrt(),
            });
        }
        let params = VgParams::new(0.0, theta_tilde, p.sigma, t / p.nu, 1.0 / nu_tilde)?;
        Ok(TiltedLaw::Vg(VgDensity::new(params, *spec)))
    }

    pub fn cdf(&self, x: f64) -> Result<f64> {
        match self {
            TiltedLaw::Gaussian { mean, sd } => Ok(norm_cdf((x - mean) / sd)),
            TiltedLaw::Vg(d) => d.cdf(x),
        }
    }

    pub fn sf(&self, x: f64) -> Result<f64> {
        match self {
            TiltedLaw::Gaussian { mean, sd } => Ok(norm_cdf((mean - x) / sd)),
            TiltedLaw::Vg(d) => d.sf(x),
        }
    }
}

/// `F̂(x, t, h)`, the CDF of `X_t` under the Esscher measure with tilt `h`.
pub fn esscher_cdf(p: &VgProcessParams, x: f64, t: f64, h: f64, spec: &QuadratureSpec) -> Result<f64> {
    TiltedLaw::new(p, t, h, spec)?.cdf(x)
}

/// Compensator per unit time, `(1/ν) ln(1 - νθ - νσ²/2)`, so that `E[e^{X_t + ωt}] = 1`.
pub fn omega_drift(p: &VgProcessParams) -> Result<f64> {
    let k = p.theta + 0.5 * p.sigma * p.sigma;
    if p.nu == 0.0 {
        return Ok(-k);
    }
    if p.nu * k >= 1.0 {
        return Err(Error::InvalidParameter(format!(
            "1 - nu*theta - nu*sigma^2/2 = {} must be positive",
            1.0 - p.nu * k
        )));
    }
    Ok((-p.nu * k).ln_1p() / p.nu)
}

/// Call pricer for one maturity: solves the tilt once and prices any number of strikes.
#[derive(Debug, Clone)]
pub struct VgCallPricer {
    market: MarketParams,
    solution: RiskNeutralSolution,
    at_h: TiltedLaw,
    at_h_plus_one: TiltedLaw,
}

impl VgCallPricer {
    pub fn new(p: &VgProcessParams, m: &MarketParams, spec: &QuadratureSpec) -> Result<Self> {
        let solution = solve_h_star(p, m)?;
        if p.nu > 0.0 && solution.h_star + 1.0 >= solution.h2 {
            return Err(mgf_domain_error(solution.h_star + 1.0, solution.h1, solution.h2));
        }
        Ok(Self {
            market: *m,
            solution,
            at_h: TiltedLaw::new(p, m.t, solution.h_star, spec)?,
            at_h_plus_one: TiltedLaw::new(p, m.t, solution.h_star + 1.0, spec)?,
        })
    }

    pub fn solution(&self) -> &RiskNeutralSolution {
        &self.solution
    }

    /// `S0 [1 - F̂(ln(K/S0), h*+1)] - K e^{-rt} [1 - F̂(ln(K/S0), h*)]`, clipped to the
    /// no-arbitrage bounds.
    pub fn price(&self, strike: f64) -> Result<f64> {
        ensure_positive("strike", strike)?;
        let MarketParams { r, s0, t } = self.market;
        let k = (strike / s0).ln();
        let discounted = strike * (-r * t).exp();
        let price = s0 * self.at_h_plus_one.sf(k)? - discounted * self.at_h.sf(k)?;
        Ok(price.clamp((s0 - discounted).max(0.0), s0))
    }
}

pub fn price_call_vg(p: &VgProcessParams, m: &MarketParams, strike: f64, spec: &QuadratureSpec) -> Result<f64> {
    VgCallPricer::new(p, m, spec)?.price(strike)
}

pub fn price_call_black_scholes(m: &MarketParams, strike: f64, sigma: f64) -> Result<f64> {
    ensure_positive("strike", strike)?;
    ensure_positive("sigma", sigma)?;
    let MarketParams { r, s0, t } = *m;
    let vol = sigma * t.sqrt();
    let d1 = ((s0 / strike).ln() + (r + 0.5 * sigma * sigma) * t) / vol;
    let d2 = d1 - vol;
    let discounted = strike * (-r * t).exp();
    let price = s0 * norm_cdf(d1) - discounted * norm_cdf(d2);
    Ok(price.clamp((s0 - discounted).max(0.0), s0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn vg(theta: f64, sigma: f64, nu: f64) -> VgProcessParams {
        VgProcessParams::new(theta, sigma, nu).unwrap()
    }

    #[test]
    fn mgf_values() {
        let p = vg(0.0, 0.2, 0.1);
        assert_eq!(vg_mgf(&p, 0.0, 3.0).unwrap(), 1.0);
        assert_abs_diff_eq!(vg_mgf(&p, 1.0, 1.0).unwrap(), 0.998f64.powf(-10.0), epsilon = 1e-13);
        let (_, h2) = admissible_interval(&p).unwrap();
        assert!(vg_mgf(&p, h2 - 1e-9, 1.0).unwrap() > 1e6);
        assert!(matches!(vg_mgf(&p, h2, 1.0), Err(Error::MgfDomain { .. })));
    }

    #[test]
    fn interval_values() {
        let (h1, h2) = admissible_interval(&vg(0.0, 1.0, 2.0)).unwrap();
        assert_abs_diff_eq!(h1, -1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(h2, 1.0, epsilon = 1e-15);
        let (h1, h2) = admissible_interval(&vg(0.0, 0.2, 0.1)).unwrap();
        assert_abs_diff_eq!(h2, 500f64.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(h1, -(500f64.sqrt()), epsilon = 1e-12);
        let p = vg(-0.3, 0.15, 0.4);
        let (h1, h2) = admissible_interval(&p).unwrap();
        let quad = |h: f64| 1.0 - p.nu * p.theta * h - 0.5 * p.nu * p.sigma * p.sigma * h * h;
        assert!(quad(h1).abs() < 1e-12 && quad(h2).abs() < 1e-12);
        let disc = (p.theta * p.theta / p.sigma.powi(4) + 2.0 / (p.nu * p.sigma * p.sigma)).sqrt();
        assert_abs_diff_eq!(h1, -p.theta / (p.sigma * p.sigma) - disc, epsilon = 1e-10);
        assert!(admissible_interval(&vg(0.1, 0.2, 0.0)).is_err());
    }

    #[test]
    fn degenerate_tilt_closed_form() {
        let m = MarketParams::new(0.05, 100.0, 1.0).unwrap();
        let s = solve_h_star(&vg(0.1, 0.2, 0.0), &m).unwrap();
        assert_abs_diff_eq!(s.h_star, -1.75, epsilon = 1e-14);
        let s = solve_h_star(&vg(0.1, 0.2, 1e-8), &m).unwrap();
        assert_abs_diff_eq!(s.h_star, -1.75, epsilon = 1e-4);
        assert!(s.martingale_residual < 1e-10);
    }

    #[test]
    fn tilt_solves_martingale_equation() {
        let p = vg(-0.1, 0.2, 0.1);
        let m = MarketParams::new(0.05, 100.0, 1.0).unwrap();
        let s = solve_h_star(&p, &m).unwrap();
        assert!(s.h1 < s.h_star && s.h_star < s.h2 - 1.0);
        let direct = (-m.r * m.t).exp() * vg_mgf(&p, s.h_star + 1.0, m.t).unwrap() / vg_mgf(&p, s.h_star, m.t).unwrap();
        assert!((direct - 1.0).abs() < 1e-10);
        assert!(s.martingale_residual < 1e-10);
    }

    #[test]
    fn no_solution_for_narrow_interval() {
        // h2 - h1 = 2 sqrt(2/(νσ²)) < 1 when νσ² > 8.
        let p = vg(0.0, 3.0, 1.0);
        let m = MarketParams::new(0.05, 100.0, 1.0).unwrap();
        assert!(matches!(solve_h_star(&p, &m), Err(Error::NoSolution(_))));
    }

    #[test]
    fn transform_values() {
        let p = vg(0.1, 0.2, 0.1);
        assert_eq!(esscher_transform_params(&p, 0.0).unwrap(), (0.1, 0.1));
        let (th, nu) = esscher_transform_params(&p, 1.0).unwrap();
        assert_abs_diff_eq!(th, 0.14, epsilon = 1e-15);
        assert_abs_diff_eq!(nu, 0.1 / 0.988, epsilon = 1e-15);
        assert!(esscher_transform_params(&p, 1e3).is_err());
    }

    #[test]
    fn transformed_mgf_identity() {
        let p = vg(0.1, 0.2, 0.1);
        let (h, t) = (1.0, 0.7);
        let (th, nt) = esscher_transform_params(&p, h).unwrap();
        for i in -5..=5 {
            let z = 0.1 * i as f64;
            let lhs = (1.0 - nt * th * z - 0.5 * nt * p.sigma * p.sigma * z * z).powf(-t / p.nu);
            let rhs = vg_mgf(&p, h + z, t).unwrap() / vg_mgf(&p, h, t).unwrap();
            assert!((lhs - rhs).abs() < 1e-12, "{lhs} {rhs}");
        }
    }

    #[test]
    fn omega_values() {
        assert_abs_diff_eq!(omega_drift(&vg(0.0, 0.2, 0.0)).unwrap(), -0.02, epsilon = 1e-16);
        assert_abs_diff_eq!(omega_drift(&vg(0.0, 0.2, 1e-10)).unwrap(), -0.02, epsilon = 1e-10);
        assert_abs_diff_eq!(omega_drift(&vg(0.1, 0.2, 0.1)).unwrap(), 10.0 * 0.988f64.ln(), epsilon = 1e-14);
        let p = vg(0.1, 0.2, 0.1);
        let w = omega_drift(&p).unwrap();
        for t in [0.5, 1.0, 2.0] {
            assert!((vg_mgf(&p, 1.0, t).unwrap() * (w * t).exp() - 1.0).abs() < 1e-12);
        }
        assert!(omega_drift(&vg(5.0, 0.2, 1.0)).is_err());
    }

    #[test]
    fn identity_tilt_is_physical_law() {
        use crate::distributions::vg_cdf;
        use crate::processes::vg_marginal_params;
        let p = vg(-0.1, 0.2, 0.1);
        let spec = QuadratureSpec::default();
        let phys = vg_marginal_params(&p, 0.5).unwrap();
        for x in [-0.6, -0.1, 0.0, 0.2, 0.5] {
            let a = esscher_cdf(&p, x, 0.5, 0.0, &spec).unwrap();
            let b = vg_cdf(&phys, x, &spec).unwrap();
            assert!((a - b).abs() < 1e-9);
        }
        assert!(esscher_cdf(&p, 50.0, 0.5, 0.0, &spec).unwrap() > 1.0 - 1e-12);
    }

    #[test]
    fn black_scholes_values() {
        let m = MarketParams::new(0.05, 100.0, 1.0).unwrap();
        assert_abs_diff_eq!(price_call_black_scholes(&m, 100.0, 0.2).unwrap(), 10.450_583_572_185_565, epsilon = 1e-9);
        let m0 = MarketParams::new(0.0, 100.0, 1.0).unwrap();
        assert!(price_call_black_scholes(&m0, 100.0, 1e-12).unwrap() < 1e-9);
        let m1 = MarketParams::new(0.0, 100.0, 0.01).unwrap();
        assert_abs_diff_eq!(price_call_black_scholes(&m1, 50.0, 0.01).unwrap(), 50.0, epsilon = 1e-9);
    }

    #[test]
    fn gaussian_esscher_reproduces_black_scholes() {
        let m = MarketParams::new(0.05, 100.0, 1.0).unwrap();
        let spec = QuadratureSpec::default();
        for theta in [-0.2, 0.0, 0.3] {
            let p = vg(theta, 0.2, 0.0);
            for k in [70.0, 100.0, 130.0] {
                let a = price_call_vg(&p, &m, k, &spec).unwrap();
                let b = price_call_black_scholes(&m, k, 0.2).unwrap();
                assert!((a - b).abs() < 1e-9, "{a} {b}");
            }
        }
    }

    #[test]
    fn vg_price_limits() {
        let spec = QuadratureSpec::default();
        let p = vg(-0.1, 0.2, 0.1);
        let m = MarketParams::new(0.05, 100.0, 0.25).unwrap();
        let tiny = price_call_vg(&p, &m, 1e-12 * m.s0, &spec).unwrap();
        assert!((tiny - m.s0).abs() < 1e-8 * m.s0);
        let near_bs = price_call_vg(&vg(0.1, 0.2, 1e-8), &MarketParams::new(0.05, 100.0, 1.0).unwrap(), 100.0, &spec).unwrap();
        assert!((near_bs - 10.4506).abs() < 1e-3);
    }

    #[test]
    fn price_is_monotone_and_convex_in_strike() {
        let spec = QuadratureSpec::default();
        let p = vg(-0.14, 0.12, 0.17);
        let m = MarketParams::new(0.03, 100.0, 0.5).unwrap();
        let pricer = VgCallPricer::new(&p, &m, &spec).unwrap();
        let prices: Vec<f64> = (0..30).map(|i| pricer.price(60.0 + 3.0 * i as f64).unwrap()).collect();
        for w in prices.windows(3) {
            assert!(w[1] <= w[0] + 1e-10);
            assert!(w[0] - 2.0 * w[1] + w[2] >= -1e-8);
        }
    }
}
