//! Bracketed root finding (Brent's method with a bisection fallback).

use crate::error::{Error, Result};

/// Default tolerance on the root location.
pub const DEFAULT_ROOT_TOL: f64 = 1e-12;

const MAX_ITERATIONS: usize = 500;

/// Evaluates `g` at an endpoint, stepping towards `toward` while the value is not finite.
/// Endpoints where `g` has a pole or a log singularity are thus treated as limits from inside.
fn eval_endpoint<G: Fn(f64) -> f64>(g: &G, x: f64, toward: f64) -> (f64, f64) {
    let mut fx = g(x);
    if fx.is_finite() {
        return (x, fx);
    }
    let width = toward - x;
    let mut step = f64::EPSILON * x.abs().max(width.abs());
    for _ in 0..60 {
        let xi = x + step.copysign(width);
        fx = g(xi);
        if fx.is_finite() {
            return (xi, fx);
        }
        step *= 4.0;
        if step >= 0.5 * width.abs() {
            break;
        }
    }
    (x, fx)
}

/// Finds a root of `g` inside `[lo, hi]`.
///
/// `g(lo)` and `g(hi)` must have opposite signs (a zero at either end is accepted). Non-finite
/// endpoint values are replaced by the nearest finite value from inside the bracket.
/// Iteration stops once the bracket is narrower than `tol` (plus a few ulps of the root).
pub fn find_root_bracketed<G: Fn(f64) -> f64>(g: G, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    if !(lo.is_finite() && hi.is_finite()) || lo >= hi {
        return Err(Error::InvalidParameter(format!(
            "bracket must satisfy lo < hi, got [{lo}, {hi}]"
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tol must be > 0, got {tol}")));
    }

    let (mut a, mut fa) = eval_endpoint(&g, lo, hi);
    let (mut b, mut fb) = eval_endpoint(&g, hi, lo);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if !(fa.is_finite() && fb.is_finite()) || fa.signum() == fb.signum() {
        return Err(Error::InvalidBracket {
            lo,
            hi,
            f_lo: fa,
            f_hi: fb,
        });
    }

    let mut c = b;
    let mut fc = fb;
    let mut d = b - a;
    let mut e = d;

    for _ in 0..MAX_ITERATIONS {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * tol;
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            // Inverse quadratic (or secant) step.
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        if d.abs() > tol1 {
            b += d;
        } else {
            b += tol1.copysign(xm);
        }
        fb = g(b);
        if !fb.is_finite() {
            // Interpolation landed on a singular point; bisect instead.
            b = a + xm;
            fb = g(b);
        }
    }
    Err(Error::RootNonConvergence {
        iterations: MAX_ITERATIONS,
        last: b,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn linear_root() {
        let x = find_root_bracketed(|x| x - 2.0, 0.0, 5.0, 1e-12).unwrap();
        assert_abs_diff_eq!(x, 2.0, epsilon = 1e-12);
    }

    #[test]
    fn sqrt_two() {
        let x = find_root_bracketed(|x| x * x - 2.0, 0.0, 2.0, 1e-12).unwrap();
        assert_abs_diff_eq!(x, std::f64::consts::SQRT_2, epsilon = 1e-10);
    }

    #[test]
    fn half_pi() {
        let x = find_root_bracketed(f64::cos, 1.0, 2.0, 1e-12).unwrap();
        assert_abs_diff_eq!(x, std::f64::consts::FRAC_PI_2, epsilon = 1e-10);
    }

    #[test]
    fn same_sign_is_invalid_bracket() {
        let err = find_root_bracketed(|x| x * x + 1.0, -1.0, 1.0, 1e-12).unwrap_err();
        assert!(matches!(err, Error::InvalidBracket { .. }));
    }

    #[test]
    fn log_singularity_at_endpoint() {
        // ln(x) + 1 is -inf at 0; the bracket end is treated as a limit from inside.
        let x = find_root_bracketed(|x: f64| x.ln() + 1.0, 0.0, 3.0, 1e-14).unwrap();
        assert_abs_diff_eq!(x, (-1.0_f64).exp(), epsilon = 1e-13);
        assert!(x > 0.0 && x < 3.0);
    }

    #[test]
    fn pole_at_upper_end() {
        // 1/(1-x) - 2 has a pole at 1 and a root at 0.5; values past the pole are NaN here.
        let g = |x: f64| if x >= 1.0 { f64::NAN } else { 1.0 / (1.0 - x) - 2.0 };
        let x = find_root_bracketed(g, 0.0, 1.0, 1e-13).unwrap();
        assert_abs_diff_eq!(x, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn flat_then_steep_stays_convergent() {
        let g = |x: f64| (x - 0.3).powi(7);
        let x = find_root_bracketed(g, -1.0, 2.0, 1e-12).unwrap();
        assert_abs_diff_eq!(x, 0.3, epsilon = 1e-6);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn bracket_choice_does_not_move_root(root in -5.0f64..5.0, l1 in 0.1f64..4.0, h1 in 0.1f64..4.0,
                                                 l2 in 0.1f64..4.0, h2 in 0.1f64..4.0) {
                let g = |x: f64| (x - root) * (1.0 + 0.5 * (x - root).powi(2)) + 0.1 * (x - root).sin();
                let x1 = find_root_bracketed(g, root - l1, root + h1, 1e-12).unwrap();
                let x2 = find_root_bracketed(g, root - l2, root + h2, 1e-12).unwrap();
                prop_assert!((x1 - x2).abs() <= 2e-12);
                prop_assert!((x1 - root).abs() <= 1e-12);
            }
        }
    }
}
