//! Adaptive Gauss-Kronrod (G10/K21) quadrature on finite and semi-infinite intervals.
//!
//! Semi-infinite integrals are mapped onto `(0, 1)` with `x = lower + (u / (1 - u))^2`
//! and then subdivided adaptively. Only interior Kronrod nodes are ever evaluated,
//! so integrable singularities at the endpoints are never sampled.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

/// Tolerances and subdivision budget for adaptive quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-8,
            max_subdivisions: 2000,
        }
    }
}

impl QuadratureSpec {
    pub fn new(abs_tol: f64, rel_tol: f64, max_subdivisions: usize) -> Result<Self> {
        let spec = Self {
            abs_tol,
            rel_tol,
            max_subdivisions,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.abs_tol.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "abs_tol must be > 0, got {}",
                self.abs_tol
            )));
        }
        if !(self.rel_tol > 0.0 && self.rel_tol.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "rel_tol must be > 0, got {}",
                self.rel_tol
            )));
        }
        if self.max_subdivisions < 1 {
            return Err(Error::InvalidParameter(
                "max_subdivisions must be >= 1".to_string(),
            ));
        }
        Ok(())
    }

    fn tolerance(&self, result: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * result.abs())
    }
}

// Kronrod abscissae; odd indices are the embedded 10-point Gauss nodes.
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_808_525_577_917,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}

impl Eq for Segment {}

impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gauss_kronrod_21<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let f_center = f(center);
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let x = half * XGK[j];
        fv1[j] = f(center - x);
        fv2[j] = f(center + x);
    }
    kronrod_segment(a, b, f_center, &fv1, &fv2)
}

/// Estimate and QUADPACK-style error for one segment from the integrand at its 21 nodes.
fn kronrod_segment(a: f64, b: f64, f_center: f64, fv1: &[f64; 10], fv2: &[f64; 10]) -> Segment {
    let half = 0.5 * (b - a);
    let mut res_kronrod = f_center * WGK[10];
    let mut res_gauss = 0.0;
    let mut res_abs = res_kronrod.abs();
    for j in 0..10 {
        let (f1, f2) = (fv1[j], fv2[j]);
        res_kronrod += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_gauss += WG[j / 2] * (f1 + f2);
        }
    }

    let mean = 0.5 * res_kronrod;
    let mut res_asc = WGK[10] * (f_center - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }

    let value = res_kronrod * half;
    let res_abs = res_abs * half.abs();
    let res_asc = res_asc * half.abs();
    let mut error = ((res_kronrod - res_gauss) * half).abs();
    if res_asc != 0.0 && error != 0.0 {
        error = res_asc * (200.0 * error / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * res_abs);
    }
    if !value.is_finite() {
        error = f64::INFINITY;
    }

    Segment { a, b, value, error }
}

/// Globally adaptive subdivision starting from the partition given by `points`
/// (sorted, at least two entries).
fn adaptive<F: Fn(f64) -> f64>(f: &F, points: &[f64], spec: &QuadratureSpec) -> Result<f64> {
    spec.validate()?;
    let mut heap = BinaryHeap::with_capacity(points.len() + 2 * spec.max_subdivisions);
    let mut frozen_value = 0.0;
    let mut frozen_error = 0.0;
    let mut total_value = 0.0;
    let mut total_error = 0.0;

    for w in points.windows(2) {
        if w[1] > w[0] {
            let seg = gauss_kronrod_21(f, w[0], w[1]);
            total_value += seg.value;
            total_error += seg.error;
            heap.push(seg);
        }
    }

    let mut subdivisions = heap.len();
    loop {
        if total_error <= spec.tolerance(total_value) {
            return Ok(total_value);
        }
        let Some(worst) = heap.pop() else {
            break;
        };
        if subdivisions >= spec.max_subdivisions {
            heap.push(worst);
            break;
        }
        let mid = 0.5 * (worst.a + worst.b);
        // Segments that can no longer be split in floating point keep their estimate.
        if !(mid > worst.a && mid < worst.b) || (worst.b - worst.a) <= 4.0 * f64::EPSILON * mid.abs()
        {
            frozen_value += worst.value;
            frozen_error += worst.error;
            total_value = frozen_value + heap.iter().map(|s| s.value).sum::<f64>();
            total_error = frozen_error + heap.iter().map(|s| s.error).sum::<f64>();
            continue;
        }
        let left = gauss_kronrod_21(f, worst.a, mid);
        let right = gauss_kronrod_21(f, mid, worst.b);
        total_value += left.value + right.value - worst.value;
        total_error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        subdivisions += 1;

        // Re-sum periodically to stop drift from incremental updates.
        if subdivisions % 64 == 0 {
            total_value = frozen_value + heap.iter().map(|s| s.value).sum::<f64>();
            total_error = frozen_error + heap.iter().map(|s| s.error).sum::<f64>();
        }
    }

    total_value = frozen_value + heap.iter().map(|s| s.value).sum::<f64>();
    total_error = frozen_error + heap.iter().map(|s| s.error).sum::<f64>();
    if total_error <= spec.tolerance(total_value) {
        Ok(total_value)
    } else {
        Err(Error::NonConvergence {
            estimate: total_value,
            error: total_error,
            subdivisions,
        })
    }
}

/// Integrates `f` over the finite interval `[a, b]`.
pub fn integrate_finite<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<f64> {
    integrate_finite_with_breaks(f, a, b, &[], spec)
}

/// Integrates `f` over `[a, b]`, using `breaks` (any order, out-of-range points ignored)
/// as the initial partition.
pub fn integrate_finite_with_breaks<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    spec: &QuadratureSpec,
) -> Result<f64> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "finite interval expected, got [{a}, {b}]"
        )));
    }
    if a == b {
        return Ok(0.0);
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let points = partition(lo, hi, breaks.iter().copied());
    Ok(sign * adaptive(&f, &points, spec)?)
}

/// Integrates `f` over `(lower, +inf)`.
pub fn integrate_semi_infinite<F: Fn(f64) -> f64>(f: F, lower: f64, spec: &QuadratureSpec) -> Result<f64> {
    integrate_semi_infinite_with_breaks(f, lower, &[], spec)
}

/// Integrates `f` over `(lower, +inf)`, seeding the adaptive partition with the
/// points in `breaks` (given in the original variable).
pub fn integrate_semi_infinite_with_breaks<F: Fn(f64) -> f64>(
    f: F,
    lower: f64,
    breaks: &[f64],
    spec: &QuadratureSpec,
) -> Result<f64> {
    if !lower.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "lower limit must be finite, got {lower}"
        )));
    }
    let transformed = |u: f64| {
        let (x, jac) = semi_infinite_map(lower, u);
        let fx = f(x);
        if fx == 0.0 {
            0.0
        } else {
            fx * jac
        }
    };
    let points = semi_infinite_partition(lower, breaks);
    adaptive(&transformed, &points, spec)
}

/// `x = lower + (u / (1 - u))²` and its Jacobian.
#[inline]
fn semi_infinite_map(lower: f64, u: f64) -> (f64, f64) {
    let ratio = u / (1.0 - u);
    let jac = 2.0 * u / ((1.0 - u) * (1.0 - u) * (1.0 - u));
    (lower + ratio * ratio, jac)
}

fn semi_infinite_partition(lower: f64, breaks: &[f64]) -> Vec<f64> {
    let mapped = breaks.iter().filter(|&&x| x > lower).map(|&x| {
        let r = (x - lower).sqrt();
        r / (1.0 + r)
    });
    partition(0.0, 1.0, mapped)
}

/// The first-pass node set of [`integrate_semi_infinite_with_breaks`] for a fixed
/// `(lower, breaks)`, for integrating many integrands that share expensive node-only factors.
///
/// [`SemiInfiniteNodes::first_pass`] takes the integrand sampled at [`SemiInfiniteNodes::nodes`]
/// and returns the estimate only when it already meets the tolerance, in which case it equals
/// what the adaptive routine returns; otherwise the caller falls back to the adaptive routine.
#[derive(Debug, Clone)]
pub struct SemiInfiniteNodes {
    points: Vec<f64>,
    nodes: Vec<f64>,
    jacobians: Vec<f64>,
}

const NODES_PER_SEGMENT: usize = 21;

impl SemiInfiniteNodes {
    pub fn new(lower: f64, breaks: &[f64]) -> Self {
        let points: Vec<f64> = semi_infinite_partition(lower, breaks)
            .windows(2)
            .filter(|w| w[1] > w[0])
            .flat_map(|w| [w[0], w[1]])
            .collect();
        let mut nodes = Vec::with_capacity(points.len() / 2 * NODES_PER_SEGMENT);
        let mut jacobians = Vec::with_capacity(nodes.capacity());
        for seg in points.chunks(2) {
            let center = 0.5 * (seg[0] + seg[1]);
            let half = 0.5 * (seg[1] - seg[0]);
            let mut push = |u: f64| {
                let (x, jac) = semi_infinite_map(lower, u);
                nodes.push(x);
                jacobians.push(jac);
            };
            push(center);
            for &xk in &XGK[..10] {
                push(center - half * xk);
                push(center + half * xk);
            }
        }
        Self {
            points,
            nodes,
            jacobians,
        }
    }

    /// Abscissae in the original variable.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// `values[j]` is the integrand at `nodes()[j]`.
    pub fn first_pass(&self, values: &[f64], spec: &QuadratureSpec) -> Option<f64> {
        debug_assert_eq!(values.len(), self.nodes.len());
        spec.validate().ok()?;
        let mut total_value = 0.0;
        let mut total_error = 0.0;
        let scaled = |j: usize| {
            let v = values[j];
            if v == 0.0 {
                0.0
            } else {
                v * self.jacobians[j]
            }
        };
        for (k, seg) in self.points.chunks(2).enumerate() {
            let base = k * NODES_PER_SEGMENT;
            let mut fv1 = [0.0; 10];
            let mut fv2 = [0.0; 10];
            for j in 0..10 {
                fv1[j] = scaled(base + 1 + 2 * j);
                fv2[j] = scaled(base + 2 + 2 * j);
            }
            let s = kronrod_segment(seg[0], seg[1], scaled(base), &fv1, &fv2);
            total_value += s.value;
            total_error += s.error;
        }
        (total_error <= spec.tolerance(total_value)).then_some(total_value)
    }
}

fn partition(lo: f64, hi: f64, breaks: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut points: Vec<f64> = std::iter::once(lo)
        .chain(breaks.filter(|x| x.is_finite() && *x > lo && *x < hi))
        .chain(std::iter::once(hi))
        .collect();
    points.sort_by(f64::total_cmp);
    points.dedup();
    points
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn shared_nodes_reproduce_adaptive_first_pass() {
        let breaks = [0.5, 1.0, 2.0, 4.0];
        let spec = QuadratureSpec::default();
        let nodes = SemiInfiniteNodes::new(0.0, &breaks);
        for k in [1.0, 2.5, 6.0] {
            let f = |x: f64| x.powf(k - 1.0) * (-x).exp();
            let values: Vec<f64> = nodes.nodes().iter().map(|&x| f(x)).collect();
            let full = integrate_semi_infinite_with_breaks(f, 0.0, &breaks, &spec).unwrap();
            if let Some(fast) = nodes.first_pass(&values, &spec) {
                assert_eq!(fast, full);
            }
        }
        // A strong endpoint singularity needs refinement, so the first pass declines.
        let f = |x: f64| x.powf(-0.9) * (-x).exp();
        let values: Vec<f64> = nodes.nodes().iter().map(|&x| f(x)).collect();
        assert!(nodes.first_pass(&values, &spec).is_none());
    }

    #[test]
    fn exponential_integral() {
        let v = integrate_semi_infinite(|x| (-x).exp(), 0.0, &QuadratureSpec::default()).unwrap();
        assert_abs_diff_eq!(v, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn gamma_two_integral() {
        let v = integrate_semi_infinite(|x| x * (-x).exp(), 0.0, &QuadratureSpec::default()).unwrap();
        assert_abs_diff_eq!(v, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn gamma_density_normalizes() {
        // Gamma(shape 2.5, rate 1.3) written out independently of the distributions module.
        let (a, b) = (2.5_f64, 1.3_f64);
        let norm = b.powf(a) / statrs::function::gamma::gamma(a);
        let v = integrate_semi_infinite(
            |x| norm * x.powf(a - 1.0) * (-b * x).exp(),
            0.0,
            &QuadratureSpec::default(),
        )
        .unwrap();
        assert_abs_diff_eq!(v, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn endpoint_singularity_is_never_sampled() {
        // 1/sqrt(x) on (0, 1) integrates to 2; evaluating at 0 would give inf.
        let spec = QuadratureSpec::default();
        let v = integrate_finite(
            |x| {
                assert!(x > 0.0 && x < 1.0);
                1.0 / x.sqrt()
            },
            0.0,
            1.0,
            &spec,
        )
        .unwrap();
        assert_abs_diff_eq!(v, 2.0, epsilon = 1e-8);
    }

    #[test]
    fn shifted_lower_limit() {
        let v = integrate_semi_infinite(|x| (-x).exp(), 2.0, &QuadratureSpec::default()).unwrap();
        assert_abs_diff_eq!(v, (-2.0_f64).exp(), epsilon = 1e-10);
    }

    #[test]
    fn narrow_peak_found_with_breaks() {
        let centre = 50.0;
        let width = 1e-4;
        let f = |x: f64| {
            let z = (x - centre) / width;
            (-0.5 * z * z).exp() / (width * (2.0 * std::f64::consts::PI).sqrt())
        };
        let v = integrate_semi_infinite_with_breaks(
            f,
            0.0,
            &[centre - 10.0 * width, centre, centre + 10.0 * width],
            &QuadratureSpec::default(),
        )
        .unwrap();
        assert_abs_diff_eq!(v, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn budget_exhaustion_reports_non_convergence() {
        let spec = QuadratureSpec::new(1e-14, 1e-14, 3).unwrap();
        let err = integrate_finite(|x| x.powf(-0.95), 0.0, 1.0, &spec).unwrap_err();
        assert!(matches!(err, Error::NonConvergence { .. }));
    }

    #[test]
    fn reversed_limits_flip_sign() {
        let spec = QuadratureSpec::default();
        let v = integrate_finite(|x| x * x, 1.0, 0.0, &spec).unwrap();
        assert_abs_diff_eq!(v, -1.0 / 3.0, epsilon = 1e-14);
    }

    #[test]
    fn invalid_spec_rejected() {
        assert!(QuadratureSpec::new(0.0, 1e-8, 10).is_err());
        assert!(QuadratureSpec::new(1e-10, -1.0, 10).is_err());
        assert!(QuadratureSpec::new(1e-10, 1e-8, 0).is_err());
    }
}
