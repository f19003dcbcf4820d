//! Steady-state analysis of the reduced substrate/complex system:
//! Jacobian, eigenvalues at the origin, and the Bendixson-Dulac
//! divergence certificate that excludes periodic orbits.

use crate::kinetics::RateConstants;
use crate::ode::ReducedState;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum StabilityError {
    #[error(
        "Dulac criterion applies on the open interior: require s > 0 and c > 0, got ({s}, {c})"
    )]
    DomainError { s: f64, c: f64 },
}

/// Real eigenvalue pair at the origin, `lambda_minus <= lambda_plus`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EigenPair {
    pub lambda_plus: f64,
    pub lambda_minus: f64,
}

/// Jacobian of the reduced vector field at `(s, c)`, rows in (S, C)
/// order.
pub fn jacobian(x: &ReducedState, rates: &RateConstants, a2: f64) -> [[f64; 2]; 2] {
    let k1 = rates.k1();
    [
        [k1 * (x.c - a2), k1 * x.s + rates.k_minus1()],
        [k1 * (a2 - x.c), -k1 * x.s - (rates.k_minus1() + rates.k2())],
    ]
}

/// Eigenvalues of the Jacobian at the origin.
///
/// The discriminant is evaluated in its rearranged sum-of-nonnegatives
/// form `(k1 a2 + (k_minus1 - k2))^2 + 4 k_minus1 k2`, so both roots are
/// real for every admissible parameter set. `lambda_minus` comes from
/// the direct formula; `lambda_plus` is recovered from the product
/// `lambda_plus * lambda_minus = k1 k2 a2`, which avoids the
/// cancellation the direct formula suffers when `k1 a2` is small
/// against `k_minus1 + k2`.
pub fn eigenvalues_at_origin(rates: &RateConstants, a2: f64) -> EigenPair {
    let k1a2 = rates.k1() * a2;
    let sum = k1a2 + rates.k_minus1() + rates.k2();
    let disc = {
        let d = k1a2 + (rates.k_minus1() - rates.k2());
        d * d + 4.0 * rates.k_minus1() * rates.k2()
    };
    let lambda_minus = 0.5 * (-sum - disc.sqrt());
    let det = rates.k1() * rates.k2() * a2;
    let lambda_plus = det / lambda_minus;
    EigenPair {
        lambda_plus,
        lambda_minus,
    }
}

/// Divergence of the vector field rescaled by `g(s, c) = 1/(s c)`:
/// `-k_minus1 / s^2 - k1 a2 / c^2`, strictly negative on the interior.
pub fn dulac_divergence(
    x: &ReducedState,
    rates: &RateConstants,
    a2: f64,
) -> Result<f64, StabilityError> {
    if !(x.s > 0.0 && x.c > 0.0) {
        return Err(StabilityError::DomainError { s: x.s, c: x.c });
    }
    Ok(-rates.k_minus1() / (x.s * x.s) - rates.k1() * a2 / (x.c * x.c))
}
