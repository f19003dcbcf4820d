//! Closed-form inner, outer, uniform and blended approximations of the
//! reduced dynamics, for both quasi-steady-state regimes and both
//! dependent-variable choices (free substrate `S`, total substrate
//! `T = S + C`), plus the reaction-rate laws of the two regimes.
//!
//! Matching construction: the uniform approximation is
//! `inner + outer - L` pointwise, where `L` is the common limit of the
//! inner solution at large layer time and the outer solution at zero
//! (the overlap sits at an intermediate scale between the fast/slow
//! pair, e.g. their geometric mean; it never enters the numerics since
//! the matching constants are known in closed form). Every curve is an
//! immutable value capturing its constants at construction; evaluation
//! is a pure function of `t`.
//!
//! Standard-regime slow manifolds are expressed through the Lambert W
//! function. The W argument is kept in log form, so large saturation
//! never overflows, and at large `t` the argument underflows cleanly to
//! zero, where the curves return exactly zero.

use crate::kinetics::{DerivedConstants, InitialState, RateConstants};
use crate::lambert::lambert_w0_exp;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum BlendError {
    #[error("blending requires two uniform-layer curves")]
    LayerMismatch,
    #[error("blending requires curves built from the same rates and initial data")]
    ConstantsMismatch,
}

/// Which quasi-steady-state reduction produced a curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveRegime {
    Standard,
    Reverse,
}

/// Which dependent variable the first component tracks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Approach {
    FreeSubstrate,
    TotalSubstrate,
}

/// Asymptotic layer of a curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Layer {
    Inner,
    Outer,
    Uniform,
}

/// Boundary-layer coefficient of the standard-regime total-substrate
/// uniform complex curve.
///
/// The published closed form carries `T0 - a2 T0 / (k_m + T0)` in front
/// of the decaying layer exponential, which does not reduce to the
/// inner solution's coefficient `C0 - a2 T0 / (k_m + T0)` unless
/// `C0 = T0`. [`AsPrinted`] reproduces the published expression;
/// [`InnerConsistent`] uses the coefficient the matching construction
/// produces. Both are kept so they can be compared against the oracle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TotalLayerVariant {
    #[default]
    AsPrinted,
    InnerConsistent,
}

/// Constants captured by a curve at construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
struct CurveConstants {
    k1: f64,
    k2: f64,
    k_m: f64,
    a1: f64,
    a2: f64,
    /// Initial value of the tracked substrate variable (`s0` or `t0`).
    x0: f64,
    c0: f64,
    /// Coefficient of the boundary-layer exponential in the uniform
    /// complex component.
    layer_coeff: f64,
}

/// One closed-form approximation curve, evaluable at any `t >= 0` as a
/// `(substrate-variable, complex)` pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ApproxCurve {
    regime: CurveRegime,
    approach: Approach,
    layer: Layer,
    consts: CurveConstants,
}

/// Common evaluation interface of plain and blended curves.
pub trait Evaluate {
    /// Value at time `t >= 0` as `(substrate-variable, complex)`.
    fn eval(&self, t: f64) -> (f64, f64);

    fn eval_grid(&self, ts: &[f64]) -> Vec<(f64, f64)> {
        ts.iter().map(|&t| self.eval(t)).collect()
    }
}

impl ApproxCurve {
    pub fn regime(&self) -> CurveRegime {
        self.regime
    }

    pub fn approach(&self) -> Approach {
        self.approach
    }

    pub fn layer(&self) -> Layer {
        self.layer
    }

    /// The matching constant `ell` (initial substrate variable over the
    /// substrate total).
    pub fn ell(&self) -> f64 {
        match (self.regime, self.approach) {
            (CurveRegime::Reverse, Approach::FreeSubstrate) => {
                (self.consts.x0 + self.consts.c0) / self.consts.a1
            }
            _ => self.consts.x0 / self.consts.a1,
        }
    }

    /// The common matching limit `L` subtracted in the uniform form.
    pub fn matching_limit(&self) -> (f64, f64) {
        let c = &self.consts;
        match (self.regime, self.approach) {
            (CurveRegime::Standard, _) => (c.x0, c.a2 * c.x0 / (c.k_m + c.x0)),
            (CurveRegime::Reverse, Approach::FreeSubstrate) => (0.0, c.x0 + c.c0),
            (CurveRegime::Reverse, Approach::TotalSubstrate) => (c.x0, c.x0),
        }
    }

    /// Slow-manifold value of the scaled substrate variable via the
    /// Lambert W closed form, `W` of the log-space argument
    /// `ln(x0/k_m) + (x0 - k2 a2 t)/k_m`.
    fn outer_w(&self, t: f64) -> f64 {
        let c = &self.consts;
        if c.x0 == 0.0 {
            return 0.0;
        }
        let u = (c.x0 / c.k_m).ln() + (c.x0 - c.k2 * c.a2 * t) / c.k_m;
        lambert_w0_exp(u)
    }
}

impl Evaluate for ApproxCurve {
    fn eval(&self, t: f64) -> (f64, f64) {
        let c = &self.consts;
        match self.regime {
            CurveRegime::Standard => {
                let plateau = c.a2 * c.x0 / (c.k_m + c.x0);
                let layer = (-c.k1 * (c.k_m + c.x0) * t).exp();
                match self.layer {
                    Layer::Inner => (c.x0, plateau + (c.c0 - plateau) * layer),
                    Layer::Outer => {
                        let w = self.outer_w(t);
                        (c.k_m * w, c.a2 * w / (1.0 + w))
                    }
                    Layer::Uniform => {
                        let w = self.outer_w(t);
                        (c.k_m * w, c.a2 * w / (1.0 + w) + c.layer_coeff * layer)
                    }
                }
            }
            CurveRegime::Reverse => {
                let fast = (-c.k1 * c.a2 * t).exp();
                let slow = (-c.k2 * t).exp();
                match (self.approach, self.layer) {
                    (Approach::FreeSubstrate, Layer::Inner) => {
                        (c.x0 * fast, c.c0 + c.x0 * (1.0 - fast))
                    }
                    (Approach::FreeSubstrate, Layer::Outer) => (0.0, (c.x0 + c.c0) * slow),
                    (Approach::FreeSubstrate, Layer::Uniform) => {
                        (c.x0 * fast, c.c0 * slow + c.x0 * (slow - fast))
                    }
                    (Approach::TotalSubstrate, Layer::Inner) => (c.x0, c.x0 + (c.c0 - c.x0) * fast),
                    (Approach::TotalSubstrate, Layer::Outer) => (c.x0 * slow, c.x0 * slow),
                    (Approach::TotalSubstrate, Layer::Uniform) => {
                        (c.x0 * slow, c.x0 * slow + (c.c0 - c.x0) * fast)
                    }
                }
            }
        }
    }
}

/// The inner/outer/uniform triple of one regime and approach.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ApproxFamily {
    pub inner: ApproxCurve,
    pub outer: ApproxCurve,
    pub uniform: ApproxCurve,
}

impl ApproxFamily {
    fn build(
        regime: CurveRegime,
        approach: Approach,
        rates: &RateConstants,
        dc: &DerivedConstants,
        init: &InitialState,
        variant: TotalLayerVariant,
    ) -> Self {
        debug_assert!(dc.a1 > 0.0 && dc.a2 > 0.0, "regime constants undefined");
        let x0 = match approach {
            Approach::FreeSubstrate => init.s0(),
            Approach::TotalSubstrate => init.s0() + init.c0(),
        };
        let plateau = dc.a2 * x0 / (dc.k_m + x0);
        let layer_coeff = match (regime, approach, variant) {
            (CurveRegime::Standard, Approach::TotalSubstrate, TotalLayerVariant::AsPrinted) => {
                x0 - plateau
            }
            (CurveRegime::Standard, _, _) => init.c0() - plateau,
            (CurveRegime::Reverse, _, _) => 0.0,
        };
        let consts = CurveConstants {
            k1: rates.k1(),
            k2: rates.k2(),
            k_m: dc.k_m,
            a1: dc.a1,
            a2: dc.a2,
            x0,
            c0: init.c0(),
            layer_coeff,
        };
        let mk = |layer| ApproxCurve {
            regime,
            approach,
            layer,
            consts,
        };
        Self {
            inner: mk(Layer::Inner),
            outer: mk(Layer::Outer),
            uniform: mk(Layer::Uniform),
        }
    }
}

/// Standard-regime approximation of `(S, C)`.
///
/// Requires `a1 > 0` and `a2 > 0` (enforced upstream by regime
/// classification).
pub fn squssa_free(
    rates: &RateConstants,
    dc: &DerivedConstants,
    init: &InitialState,
) -> ApproxFamily {
    ApproxFamily::build(
        CurveRegime::Standard,
        Approach::FreeSubstrate,
        rates,
        dc,
        init,
        TotalLayerVariant::default(),
    )
}

/// Standard-regime approximation of `(T, C)` with the published
/// boundary-layer coefficient.
pub fn squssa_total(
    rates: &RateConstants,
    dc: &DerivedConstants,
    init: &InitialState,
) -> ApproxFamily {
    squssa_total_variant(rates, dc, init, TotalLayerVariant::AsPrinted)
}

/// Standard-regime `(T, C)` approximation with an explicit choice of
/// the uniform boundary-layer coefficient (see [`TotalLayerVariant`]).
pub fn squssa_total_variant(
    rates: &RateConstants,
    dc: &DerivedConstants,
    init: &InitialState,
    variant: TotalLayerVariant,
) -> ApproxFamily {
    ApproxFamily::build(
        CurveRegime::Standard,
        Approach::TotalSubstrate,
        rates,
        dc,
        init,
        variant,
    )
}

/// Reverse-regime approximation of `(S, C)`.
pub fn rqssa_free(
    rates: &RateConstants,
    dc: &DerivedConstants,
    init: &InitialState,
) -> ApproxFamily {
    ApproxFamily::build(
        CurveRegime::Reverse,
        Approach::FreeSubstrate,
        rates,
        dc,
        init,
        TotalLayerVariant::default(),
    )
}

/// Reverse-regime approximation of `(T, C)`.
pub fn rqssa_total(
    rates: &RateConstants,
    dc: &DerivedConstants,
    init: &InitialState,
) -> ApproxFamily {
    ApproxFamily::build(
        CurveRegime::Reverse,
        Approach::TotalSubstrate,
        rates,
        dc,
        init,
        TotalLayerVariant::default(),
    )
}

/// Closed-form reaction-rate law of one regime, evaluable at any
/// free-substrate concentration; nonnegative on the feasible region.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateCurve {
    regime: CurveRegime,
    /// `k2 a2` for the saturating law, `k1 a2` for the linear one.
    scale: f64,
    /// Half-saturation constant, present only for the standard law.
    k_m: Option<f64>,
}

impl RateCurve {
    /// Hyperbolic saturation law of the standard regime,
    /// `k2 a2 s / (k_m + s)`.
    pub fn michaelis_menten(rates: &RateConstants, dc: &DerivedConstants) -> Self {
        Self {
            regime: CurveRegime::Standard,
            scale: rates.k2() * dc.a2,
            k_m: Some(dc.k_m),
        }
    }

    /// Linear law of the reverse regime's fast phase, `k1 a2 s`.
    pub fn reverse_linear(rates: &RateConstants, dc: &DerivedConstants) -> Self {
        Self {
            regime: CurveRegime::Reverse,
            scale: rates.k1() * dc.a2,
            k_m: None,
        }
    }

    pub fn regime(&self) -> CurveRegime {
        self.regime
    }

    /// Rate at free-substrate concentration `s >= 0`.
    pub fn rate(&self, s: f64) -> f64 {
        debug_assert!(s >= 0.0);
        match self.k_m {
            Some(k_m) => self.scale * s / (k_m + s),
            None => self.scale * s,
        }
    }
}

/// Standard-regime rate at `s`; see [`RateCurve::michaelis_menten`].
pub fn mm_rate(s: f64, rates: &RateConstants, dc: &DerivedConstants) -> f64 {
    RateCurve::michaelis_menten(rates, dc).rate(s)
}

/// Reverse-regime fast-phase rate at `s`; see
/// [`RateCurve::reverse_linear`].
pub fn rqssa_rate(s: f64, rates: &RateConstants, dc: &DerivedConstants) -> f64 {
    RateCurve::reverse_linear(rates, dc).rate(s)
}

/// Convex combination of the two regimes' uniform curves with weight
/// `epsilon / (1 + epsilon)` on the reverse curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BlendedCurve {
    pub weight_reverse: f64,
    standard: ApproxCurve,
    reverse: ApproxCurve,
}

/// Blend the standard and reverse uniform approximations.
///
/// Both curves must be uniform-layer and built from the same rates and
/// initial data. As `epsilon -> 0` the blend tends to the standard
/// curve, as `epsilon -> inf` to the reverse one.
pub fn blend(
    epsilon: f64,
    standard: &ApproxCurve,
    reverse: &ApproxCurve,
) -> Result<BlendedCurve, BlendError> {
    if standard.layer != Layer::Uniform || reverse.layer != Layer::Uniform {
        return Err(BlendError::LayerMismatch);
    }
    let a = &standard.consts;
    let b = &reverse.consts;
    if standard.regime != CurveRegime::Standard
        || reverse.regime != CurveRegime::Reverse
        || standard.approach != reverse.approach
        || (a.k1, a.k2, a.k_m, a.a1, a.a2, a.x0, a.c0)
            != (b.k1, b.k2, b.k_m, b.a1, b.a2, b.x0, b.c0)
    {
        return Err(BlendError::ConstantsMismatch);
    }
    let weight_reverse = if epsilon.is_infinite() {
        1.0
    } else {
        epsilon / (1.0 + epsilon)
    };
    Ok(BlendedCurve {
        weight_reverse,
        standard: *standard,
        reverse: *reverse,
    })
}

impl Evaluate for BlendedCurve {
    fn eval(&self, t: f64) -> (f64, f64) {
        let (xs, cs) = self.standard.eval(t);
        let (xr, cr) = self.reverse.eval(t);
        let w = self.weight_reverse;
        (w * xr + (1.0 - w) * xs, w * cr + (1.0 - w) * cs)
    }
}
