//! Summary statistics and goodness-of-fit tests on samples.

pub fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Unbiased sample variance (divisor n - 1).
pub fn variance(x: &[f64]) -> f64 {
    let m = mean(x);
    x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (x.len() as f64 - 1.0)
}

/// Population variance (divisor n).
pub fn population_variance(x: &[f64]) -> f64 {
    central_moment(x, 2)
}

/// k-th sample central moment with divisor n.
pub fn central_moment(x: &[f64], k: i32) -> f64 {
    let m = mean(x);
    x.iter().map(|v| (v - m).powi(k)).sum::<f64>() / x.len() as f64
}

/// Kurtosis m4 / m2^2 (not excess).
pub fn kurtosis(x: &[f64]) -> f64 {
    let m2 = central_moment(x, 2);
    central_moment(x, 4) / (m2 * m2)
}

/// Sample median; for even lengths the midpoint of the two central order statistics.
pub fn median(x: &[f64]) -> f64 {
    let mut v = x.to_vec();
    median_in_place(&mut v)
}

/// Median that reorders `buf` instead of allocating.
pub fn median_in_place(buf: &mut [f64]) -> f64 {
    let n = buf.len();
    assert!(n > 0, "median of empty sample");
    let mid = n / 2;
    let (left, upper, _) = buf.select_nth_unstable_by(mid, f64::total_cmp);
    let upper = *upper;
    if n % 2 == 1 {
        upper
    } else {
        let lower = left.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        0.5 * (lower + upper)
    }
}

/// Kolmogorov distribution tail `P(K > lambda)`.
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * lambda * lambda).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-18 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Outcome of a Kolmogorov-Smirnov test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
}

/// One-sample KS test of `sample` against the continuous CDF `cdf`.
pub fn ks_one_sample<F: Fn(f64) -> f64>(sample: &[f64], cdf: F) -> KsResult {
    let mut x = sample.to_vec();
    x.sort_by(f64::total_cmp);
    let n = x.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &xi) in x.iter().enumerate() {
        let f = cdf(xi);
        d = d.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n);
    }
    let sn = n.sqrt();
    KsResult {
        statistic: d,
        p_value: kolmogorov_sf((sn + 0.12 + 0.11 / sn) * d),
    }
}

/// Two-sample KS test.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> KsResult {
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    x.sort_by(f64::total_cmp);
    y.sort_by(f64::total_cmp);
    let (n, m) = (x.len(), y.len());
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < n && j < m {
        let v = x[i].min(y[j]);
        while i < n && x[i] <= v {
            i += 1;
        }
        while j < m && y[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    let ne = (n as f64 * m as f64 / (n + m) as f64).sqrt();
    KsResult {
        statistic: d,
        p_value: kolmogorov_sf((ne + 0.12 + 0.11 / ne) * d),
    }
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
}

impl Estimate {
    pub fn from_sample(x: &[f64]) -> Self {
        Self {
            value: mean(x),
            std_error: (variance(x) / x.len() as f64).sqrt(),
        }
    }

    /// Whether `target` lies within `k` standard errors.
    pub fn covers(&self, target: f64, k: f64) -> bool {
        (self.value - target).abs() <= k * self.std_error
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn median_odd_and_even() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[5.0, 9.0, 5.0, 5.0]), 5.0);
        assert_eq!(median(&[4.0, 1.0, 3.0, 2.0]), 2.5);
    }

    #[test]
    fn kolmogorov_reference_points() {
        // Critical value of the asymptotic distribution at level 0.05 is 1.3581.
        assert!((kolmogorov_sf(1.358_1) - 0.05).abs() < 1e-4);
        assert!((kolmogorov_sf(1.627_6) - 0.01).abs() < 1e-4);
    }

    #[test]
    fn ks_detects_shift() {
        let a: Vec<f64> = (0..2000).map(|i| i as f64 / 2000.0).collect();
        let b: Vec<f64> = a.iter().map(|v| v + 0.2).collect();
        assert!(ks_two_sample(&a, &b).p_value < 1e-6);
        assert!(ks_two_sample(&a, &a).p_value > 0.99);
        let uniform = ks_one_sample(&a, |x| x.clamp(0.0, 1.0));
        assert!(uniform.p_value > 0.99);
    }

    #[test]
    fn moments() {
        let x = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(mean(&x), 2.5);
        assert!((variance(&x) - 5.0 / 3.0).abs() < 1e-15);
        assert!((population_variance(&x) - 1.25).abs() < 1e-15);
        assert_eq!(central_moment(&x, 3), 0.0);
    }
}
