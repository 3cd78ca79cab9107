use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::LaplaceParams;
use crate::error::{Error, Result};
use crate::numerics::stats::{median_in_place, population_variance};
use crate::numerics::RngStream;

fn check_sample(sample: &[f64]) -> Result<()> {
    if sample.len() < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            got: sample.len(),
        });
    }
    if let Some(x) = sample.iter().find(|x| !x.is_finite()) {
        return Err(Error::InvalidParameter(format!("sample contains non-finite value {x}")));
    }
    Ok(())
}

fn degenerate(s: f64) -> Result<()> {
    if s > 0.0 {
        Ok(())
    } else {
        Err(Error::DegenerateSample("all observations are equal, scale estimate is zero".into()))
    }
}

/// Median / mean-absolute-deviation pair.
pub fn laplace_fit_mle(sample: &[f64]) -> Result<LaplaceParams> {
    check_sample(sample)?;
    let mut buf = sample.to_vec();
    let (theta, s) = median_mad(&mut buf);
    degenerate(s)?;
    Ok(LaplaceParams { theta, s })
}

/// Sample mean and `sqrt(Σ(x - mean)² / 2n)`.
pub fn laplace_fit_moments(sample: &[f64]) -> Result<LaplaceParams> {
    check_sample(sample)?;
    let (theta, s) = mean_scaled_sd(sample);
    degenerate(s)?;
    Ok(LaplaceParams { theta, s })
}

fn median_mad(buf: &mut [f64]) -> (f64, f64) {
    let theta = median_in_place(buf);
    let mad = buf.iter().map(|x| (x - theta).abs()).sum::<f64>() / buf.len() as f64;
    (theta, mad)
}

fn mean_scaled_sd(sample: &[f64]) -> (f64, f64) {
    let theta = sample.iter().sum::<f64>() / sample.len() as f64;
    let ss: f64 = sample.iter().map(|x| (x - theta) * (x - theta)).sum();
    (theta, (ss / (2.0 * sample.len() as f64)).sqrt())
}

/// Monte Carlo variances of the four Laplace estimators at one sample size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyReport {
    pub n: usize,
    pub var_median: f64,
    pub var_mean: f64,
    pub var_mad: f64,
    pub var_scaled_sd: f64,
    pub replications: usize,
}

impl EfficiencyReport {
    pub fn mean_over_median(&self) -> f64 {
        self.var_mean / self.var_median
    }

    pub fn scaled_sd_over_mad(&self) -> f64 {
        self.var_scaled_sd / self.var_mad
    }
}

pub const MIN_REPLICATIONS: usize = 1000;

/// For each `n`, draws `replications` fresh CL samples and records the variance of the
/// median, mean, MAD and scaled-SD estimators across replications.
///
/// Replication `j` at the `i`-th sample size uses substream `(i << 32) | j` of `rng`, so the
/// result does not depend on how the work is scheduled.
pub fn run_efficiency_experiment(
    true_params: &LaplaceParams,
    n_values: &[usize],
    replications: usize,
    rng: &RngStream,
) -> Result<Vec<EfficiencyReport>> {
    if replications < MIN_REPLICATIONS {
        return Err(Error::InvalidParameter(format!(
            "replications must be at least {MIN_REPLICATIONS}, got {replications}"
        )));
    }
    if let Some(&n) = n_values.iter().find(|&&n| n < 2) {
        return Err(Error::InvalidParameter(format!("sample size must be at least 2, got {n}")));
    }
    let LaplaceParams { theta, s } = *true_params;
    Ok(n_values
        .iter()
        .enumerate()
        .map(|(i, &n)| {
            let estimates: Vec<[f64; 4]> = (0..replications)
                .into_par_iter()
                .map_init(
                    || Vec::with_capacity(n),
                    |buf, j| {
                        let mut stream = rng.substream(((i as u64) << 32) | j as u64);
                        buf.clear();
                        buf.extend((0..n).map(|_| stream.laplace(theta, s)));
                        let (mean, scaled_sd) = mean_scaled_sd(buf);
                        let (median, mad) = median_mad(buf);
                        [median, mean, mad, scaled_sd]
                    },
                )
                .collect();
            let var = |k: usize| {
                let col: Vec<f64> = estimates.iter().map(|e| e[k]).collect();
                population_variance(&col)
            };
            EfficiencyReport {
                n,
                var_median: var(0),
                var_mean: var(1),
                var_mad: var(2),
                var_scaled_sd: var(3),
                replications,
            }
        })
        .collect())
}
