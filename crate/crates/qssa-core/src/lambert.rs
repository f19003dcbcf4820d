//! Principal branch of the Lambert W function on `[0, inf)`.
//!
//! `W(x)` is defined as the inverse of `w -> w * exp(w)`. On the
//! nonnegative half-line the branch is single-valued, smooth and
//! nonnegative, which is the only region the slow-manifold closed forms
//! ever evaluate it on; the secondary real branch and complex arguments
//! are out of scope.
//!
//! Evaluation strategy: a piecewise initial guess (Taylor series near 0,
//! the two-term log asymptote for large arguments) refined by Halley
//! iteration. Arguments so large that `exp` would overflow in the
//! residual are handled in log space through [`lambert_w0_exp`], which
//! solves `w + ln w = u` instead of `w * exp(w) = exp(u)`.

use thiserror::Error;

/// Argument outside `[0, inf)` or not finite.
#[derive(Debug, Clone, Copy, PartialEq, Error)]
#[error("lambert W domain error: argument {x} is not a finite nonnegative number")]
pub struct DomainError {
    pub x: f64,
}

const MAX_HALLEY_ITERS: usize = 8;

/// Lambert W, principal branch, for `x >= 0`.
///
/// The result `w` satisfies `w * exp(w) = x` with relative residual at
/// ulp scale; `lambert_w0(0) == 0` exactly.
pub fn lambert_w0(x: f64) -> Result<f64, DomainError> {
    if !x.is_finite() || x < 0.0 {
        return Err(DomainError { x });
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    Ok(halley_direct(x, initial_guess(x)))
}

/// `W(exp(u))` without forming `exp(u)`, valid for any finite `u`.
///
/// For `u` beyond roughly `7e2` the argument `exp(u)` overflows f64, so
/// the defining equation is solved in log form, `w + ln w = u`. For
/// small and negative `u` this falls back to the direct evaluation
/// (where `exp(u)` underflowing to zero correctly yields `W = 0`).
pub fn lambert_w0_exp(u: f64) -> f64 {
    if u == f64::NEG_INFINITY {
        return 0.0;
    }
    debug_assert!(u.is_finite() || u == f64::NEG_INFINITY);
    if u < 700.0 {
        // exp(u) is exactly representable (or cleanly underflows to 0).
        return lambert_w0(u.exp()).unwrap_or(0.0);
    }
    // Solve g(w) = w + ln w - u = 0. g' = 1 + 1/w, g'' = -1/w^2.
    let mut w = u - u.ln();
    for _ in 0..MAX_HALLEY_ITERS {
        let g = w + w.ln() - u;
        if g == 0.0 {
            break;
        }
        let gp = 1.0 + 1.0 / w;
        let gpp = -1.0 / (w * w);
        let step = 2.0 * g * gp / (2.0 * gp * gp - g * gpp);
        let w_next = w - step;
        if !w_next.is_finite() || w_next <= 0.0 {
            break;
        }
        let converged = (w_next - w).abs() <= 2.0 * f64::EPSILON * w_next.abs();
        w = w_next;
        if converged {
            break;
        }
    }
    w
}

fn initial_guess(x: f64) -> f64 {
    if x < 0.35 {
        // W(x) = x - x^2 + 3/2 x^3 - ... ; truncation is plenty for a
        // Halley starting point on this range.
        x * (1.0 - x + 1.5 * x * x).max(0.25)
    } else if x <= std::f64::consts::E {
        // Bridge region; W is between ~0.26 and 1.
        0.5 + 0.5 * (x / std::f64::consts::E)
    } else {
        // Two-term asymptote W ~ ln x - ln ln x, plus the first correction.
        let l1 = x.ln();
        let l2 = l1.ln();
        l1 - l2 + l2 / l1
    }
}

fn halley_direct(x: f64, w0: f64) -> f64 {
    let mut w = w0;
    for _ in 0..MAX_HALLEY_ITERS {
        let ew = w.exp();
        let f = w * ew - x;
        if f == 0.0 {
            break;
        }
        // Halley step for f(w) = w e^w - x.
        let denom = ew * (w + 1.0) - (w + 2.0) * f / (2.0 * w + 2.0);
        let w_next = w - f / denom;
        if !w_next.is_finite() {
            break;
        }
        let converged = (w_next - w).abs() <= 2.0 * f64::EPSILON * (1.0 + w_next.abs());
        w = w_next;
        if converged {
            break;
        }
    }
    w.max(0.0)
}
