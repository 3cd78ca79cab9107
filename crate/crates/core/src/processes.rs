//! Brownian motion, the Gamma subordinator and the VG process: exact path simulation on a
//! time grid, marginal laws, characteristic functions and central moments.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::distributions::VgParams;
use crate::error::{ensure_finite, ensure_positive, Error, Result};
use crate::numerics::RngStream;

/// Brownian motion with drift: `b_t = θt + σW_t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BrownianParams {
    pub theta: f64,
    pub sigma: f64,
}

impl BrownianParams {
    pub fn new(theta: f64, sigma: f64) -> Result<Self> {
        ensure_finite("theta", theta)?;
        ensure_positive("sigma", sigma)?;
        Ok(Self { theta, sigma })
    }
}

/// Gamma subordinator with mean rate μ and variance rate ν. `ν = 0` is the deterministic
/// clock `μt`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubordinatorParams {
    pub mu: f64,
    pub nu: f64,
}

impl SubordinatorParams {
    pub fn new(mu: f64, nu: f64) -> Result<Self> {
        ensure_positive("mu", mu)?;
        ensure_non_negative("nu", nu)?;
        Ok(Self { mu, nu })
    }
}

/// VG process `θγ_t + σW_{γ_t}` driven by a unit-mean-rate Gamma clock with variance rate ν.
/// `ν = 0` is Brownian motion with drift θ and volatility σ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VgProcessParams {
    pub theta: f64,
    pub sigma: f64,
    pub nu: f64,
}

impl VgProcessParams {
    pub fn new(theta: f64, sigma: f64, nu: f64) -> Result<Self> {
        ensure_finite("theta", theta)?;
        ensure_positive("sigma", sigma)?;
        ensure_non_negative("nu", nu)?;
        Ok(Self { theta, sigma, nu })
    }

    pub fn is_gaussian(&self) -> bool {
        self.nu == 0.0
    }
}

fn ensure_non_negative(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be finite and non-negative, got {v}")))
    }
}

/// Realized process values on a time grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathGrid {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl PathGrid {
    pub fn new(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        validate_grid(&times)?;
        if times.len() != values.len() {
            return Err(Error::InvalidGrid(format!(
                "{} times but {} values",
                times.len(),
                values.len()
            )));
        }
        Ok(Self { times, values })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn terminal(&self) -> f64 {
        *self.values.last().expect("grids are non-empty")
    }

    /// Value of the path at time `t` by linear interpolation between grid points (constant
    /// beyond the last point).
    pub fn value_at(&self, t: f64) -> f64 {
        let i = self.times.partition_point(|&s| s <= t);
        if i == 0 {
            return self.values[0];
        }
        if i == self.times.len() {
            return self.terminal();
        }
        let (t0, t1) = (self.times[i - 1], self.times[i]);
        let (v0, v1) = (self.values[i - 1], self.values[i]);
        if t1 == t0 {
            v1
        } else {
            v0 + (v1 - v0) * (t - t0) / (t1 - t0)
        }
    }
}

/// `steps + 1` equally spaced points on `[0, t_max]`.
pub fn uniform_grid(t_max: f64, steps: usize) -> Result<Vec<f64>> {
    ensure_positive("t_max", t_max)?;
    if steps == 0 {
        return Err(Error::InvalidGrid("steps must be at least 1".into()));
    }
    let mut times: Vec<f64> = (0..=steps).map(|i| t_max * i as f64 / steps as f64).collect();
    times[steps] = t_max;
    Ok(times)
}

fn validate_grid(times: &[f64]) -> Result<()> {
    match times.first() {
        None => return Err(Error::InvalidGrid("empty time grid".into())),
        Some(&t0) if t0 != 0.0 => {
            return Err(Error::InvalidGrid(format!("grid must start at 0, starts at {t0}")))
        }
        _ => {}
    }
    for (i, w) in times.windows(2).enumerate() {
        if !w[1].is_finite() || w[1] < w[0] {
            return Err(Error::InvalidGrid(format!(
                "times must be finite and nondecreasing (index {})",
                i + 1
            )));
        }
    }
    Ok(())
}

fn simulate_increments<F: FnMut(f64, &mut RngStream) -> f64>(
    times: &[f64],
    rng: &mut RngStream,
    mut step: F,
) -> Result<PathGrid> {
    validate_grid(times)?;
    let mut values = Vec::with_capacity(times.len());
    let mut x = 0.0;
    values.push(x);
    for w in times.windows(2) {
        let dt = w[1] - w[0];
        if dt > 0.0 {
            x += step(dt, rng);
        }
        values.push(x);
    }
    Ok(PathGrid {
        times: times.to_vec(),
        values,
    })
}

pub fn simulate_brownian(p: &BrownianParams, times: &[f64], rng: &mut RngStream) -> Result<PathGrid> {
    simulate_increments(times, rng, |dt, rng| {
        p.theta * dt + p.sigma * dt.sqrt() * rng.standard_normal()
    })
}

/// Gamma increment with mean μΔt and variance νΔt.
#[inline]
fn subordinator_increment(p: &SubordinatorParams, dt: f64, rng: &mut RngStream) -> f64 {
    if p.nu == 0.0 {
        return p.mu * dt;
    }
    let scale = p.nu / p.mu;
    let shape = p.mu * p.mu * dt / p.nu;
    scale * rng.standard_gamma(shape)
}

pub fn simulate_subordinator(p: &SubordinatorParams, times: &[f64], rng: &mut RngStream) -> Result<PathGrid> {
    simulate_increments(times, rng, |dt, rng| subordinator_increment(p, dt, rng))
}

/// One exact VG increment over a step of length `dt > 0`.
#[inline]
pub fn sample_vg_increment(p: &VgProcessParams, dt: f64, rng: &mut RngStream) -> f64 {
    let g = if p.nu == 0.0 {
        dt
    } else {
        p.nu * rng.standard_gamma(dt / p.nu)
    };
    p.theta * g + p.sigma * g.sqrt() * rng.standard_normal()
}

/// `n` independent draws of `X_t`.
pub fn sample_vg_marginal(p: &VgProcessParams, t: f64, rng: &mut RngStream, n: usize) -> Result<Vec<f64>> {
    ensure_positive("t", t)?;
    Ok((0..n).map(|_| sample_vg_increment(p, t, rng)).collect())
}

pub fn simulate_vg(p: &VgProcessParams, times: &[f64], rng: &mut RngStream) -> Result<PathGrid> {
    simulate_increments(times, rng, |dt, rng| sample_vg_increment(p, dt, rng))
}

/// Law of `X_t`: `c = 0`, mixing shape `t/ν`, rate `1/ν`.
pub fn vg_marginal_params(p: &VgProcessParams, t: f64) -> Result<VgParams> {
    ensure_positive("t", t)?;
    if p.nu == 0.0 {
        return Err(Error::InvalidParameter(
            "nu = 0: the marginal is Gaussian, not a VG mixture".into(),
        ));
    }
    VgParams::new(0.0, p.theta, p.sigma, t / p.nu, 1.0 / p.nu)
}

/// `E[e^{iuX_t}] = (1 - iθνu + σ²νu²/2)^{-t/ν}`; the Brownian cf when `ν = 0`.
pub fn vg_process_cf(p: &VgProcessParams, u: f64, t: f64) -> Complex64 {
    if p.nu == 0.0 {
        return Complex64::new(-0.5 * p.sigma * p.sigma * u * u * t, p.theta * u * t).exp();
    }
    // Real part of the base is at least 1, so the principal log is branch-safe.
    let base = Complex64::new(1.0 + 0.5 * p.sigma * p.sigma * p.nu * u * u, -p.theta * p.nu * u);
    (-(t / p.nu) * base.ln()).exp()
}

/// Mean and second to fourth central moments of `X_t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CentralMoments {
    pub mean: f64,
    pub m2: f64,
    pub m3: f64,
    pub m4: f64,
}

impl CentralMoments {
    pub fn kurtosis(&self) -> f64 {
        self.m4 / (self.m2 * self.m2)
    }

    pub fn skewness(&self) -> f64 {
        self.m3 / self.m2.powf(1.5)
    }
}

pub fn vg_central_moments(p: &VgProcessParams, t: f64) -> CentralMoments {
    let VgProcessParams { theta, sigma, nu } = *p;
    let (s2, th2) = (sigma * sigma, theta * theta);
    CentralMoments {
        mean: theta * t,
        m2: (th2 * nu + s2) * t,
        m3: (2.0 * th2 * theta * nu * nu + 3.0 * s2 * theta * nu) * t,
        m4: (3.0 * s2 * s2 * nu + 12.0 * s2 * th2 * nu * nu + 6.0 * th2 * th2 * nu.powi(3)) * t
            + (3.0 * s2 * s2 + 6.0 * s2 * th2 * nu + 3.0 * th2 * th2 * nu * nu) * t * t,
    }
}
