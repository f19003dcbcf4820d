//! Domain types and derived scalar quantities of the reaction network,
//! plus quasi-steady-state regime classification.
//!
//! The mechanism `S + E <=> C -> E + P` (forward binding `k1`, unbinding
//! `k_minus1`, catalysis `k2`) conserves two material totals,
//!
//! * `a1 = s0 + c0 + p0` (substrate material),
//! * `a2 = e0 + c0` (enzyme material),
//!
//! and everything in the asymptotic analysis is parameterized by the
//! combinations collected in [`DerivedConstants`]. The single regime
//! parameter is `epsilon = a2 / (k_m + a1)`: small epsilon is the
//! standard quasi-steady-state regime, large epsilon the reverse one.

use serde::Serialize;
use thiserror::Error;

/// Default lower threshold quantifying "epsilon much smaller than 1".
pub const DEFAULT_EPS_LO: f64 = 0.1;
/// Default upper threshold quantifying "epsilon much larger than 1".
pub const DEFAULT_EPS_HI: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum KineticsError {
    #[error("rate constant {name} = {value} must be strictly positive and finite")]
    NonPositiveRate { name: &'static str, value: f64 },
    #[error("initial concentration {name} = {value} must be nonnegative and finite")]
    NegativeConcentration { name: &'static str, value: f64 },
    #[error("regime thresholds must satisfy 0 < lo < hi, got lo = {lo}, hi = {hi}")]
    InvalidThresholds { lo: f64, hi: f64 },
    #[error("regime classification requires a1 > 0 and a2 > 0 (got a1 = {a1}, a2 = {a2})")]
    NotApplicable { a1: f64, a2: f64 },
}

/// Kinetic parameters of the mechanism; all three strictly positive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateConstants {
    k1: f64,
    k_minus1: f64,
    k2: f64,
}

impl RateConstants {
    pub fn new(k1: f64, k_minus1: f64, k2: f64) -> Result<Self, KineticsError> {
        for (name, value) in [("k1", k1), ("k_minus1", k_minus1), ("k2", k2)] {
            if !(value.is_finite() && value > 0.0) {
                return Err(KineticsError::NonPositiveRate { name, value });
            }
        }
        Ok(Self { k1, k_minus1, k2 })
    }

    /// Second-order binding rate, 1/(concentration * time).
    pub fn k1(&self) -> f64 {
        self.k1
    }

    /// First-order unbinding rate, 1/time.
    pub fn k_minus1(&self) -> f64 {
        self.k_minus1
    }

    /// First-order catalytic rate, 1/time.
    pub fn k2(&self) -> f64 {
        self.k2
    }
}

/// Nonnegative initial concentrations of the four species.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InitialState {
    s0: f64,
    e0: f64,
    c0: f64,
    p0: f64,
}

impl InitialState {
    pub fn new(s0: f64, e0: f64, c0: f64, p0: f64) -> Result<Self, KineticsError> {
        for (name, value) in [("s0", s0), ("e0", e0), ("c0", c0), ("p0", p0)] {
            if !(value.is_finite() && value >= 0.0) {
                return Err(KineticsError::NegativeConcentration { name, value });
            }
        }
        Ok(Self { s0, e0, c0, p0 })
    }

    pub fn s0(&self) -> f64 {
        self.s0
    }
    pub fn e0(&self) -> f64 {
        self.e0
    }
    pub fn c0(&self) -> f64 {
        self.c0
    }
    pub fn p0(&self) -> f64 {
        self.p0
    }
}

/// Every scalar the analysis derives from rates and initial data.
///
/// Fields that require `a2 > 0` are `Option` and `None` in the
/// zero-enzyme degenerate case, where the solution is constant and no
/// second time scale exists.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivedConstants {
    /// Dissociation constant `k_minus1 / k1` (concentration).
    pub k_dis: f64,
    /// Van Slyke-Cullen constant `k2 / k1` (concentration).
    pub k_vsc: f64,
    /// Michaelis constant `k_dis + k_vsc = (k_minus1 + k2) / k1`.
    pub k_m: f64,
    /// Conserved substrate material `s0 + c0 + p0`.
    pub a1: f64,
    /// Conserved enzyme material `e0 + c0`.
    pub a2: f64,
    /// Complex bound in the full system: `min(a1, a2, a1 a2 / k_m)`.
    pub a3: f64,
    /// Complex bound in the reduced system: `a1 a2 / (k_m + a1)` when
    /// `a2 <= k_m + a1`, else `a1`.
    pub a4: f64,
    /// Regime parameter `a2 / (k_m + a1)`.
    pub epsilon: f64,
    /// Material ratio `a1 / a2`; undefined when `a2 = 0`.
    pub eta: Option<f64>,
    /// Saturation parameter `a1 / k_m`.
    pub sigma: f64,
    /// Partition ratio `k_minus1 / k2`.
    pub rho: f64,
    /// Fast scale of the standard regime, `1 / (k1 (k_m + a1))`.
    pub t1_standard: f64,
    /// Slow scale of the standard regime, `1 / (k1 a2) = t1 / epsilon`.
    pub t2_standard: Option<f64>,
    /// Fast scale of the reverse regime, `a1 / (k1 (k_m + a1) a2)`.
    pub t1_reverse: Option<f64>,
    /// Slow scale of the reverse regime, `1 / (k1 (k_m + a1)) = t1 / eta`.
    pub t2_reverse: f64,
}

/// Compute all derived constants. Never fails: invalid rate or
/// concentration values are rejected when the input types are built.
pub fn derive_constants(rates: &RateConstants, init: &InitialState) -> DerivedConstants {
    let k1 = rates.k1;
    let k_dis = rates.k_minus1 / k1;
    let k_vsc = rates.k2 / k1;
    let k_m = (rates.k_minus1 + rates.k2) / k1;
    let a1 = init.s0 + init.c0 + init.p0;
    let a2 = init.e0 + init.c0;
    let a3 = (a1 * a2 / k_m).min(a1).min(a2);
    // Dichotomy on the reduced complex bound: the tighter expression
    // applies exactly when a2 <= k_m + a1.
    let a4 = if a2 <= k_m + a1 {
        a1 * a2 / (k_m + a1)
    } else {
        a1
    };
    let epsilon = a2 / (k_m + a1);
    let eta = if a2 > 0.0 { Some(a1 / a2) } else { None };
    let sigma = a1 / k_m;
    let rho = rates.k_minus1 / rates.k2;
    let t1_standard = 1.0 / (k1 * (k_m + a1));
    let t2_standard = if a2 > 0.0 {
        Some(1.0 / (k1 * a2))
    } else {
        None
    };
    let t1_reverse = if a2 > 0.0 {
        Some(a1 / (k1 * (k_m + a1) * a2))
    } else {
        None
    };
    let t2_reverse = 1.0 / (k1 * (k_m + a1));
    DerivedConstants {
        k_dis,
        k_vsc,
        k_m,
        a1,
        a2,
        a3,
        a4,
        epsilon,
        eta,
        sigma,
        rho,
        t1_standard,
        t2_standard,
        t1_reverse,
        t2_reverse,
    }
}

/// Which quasi-steady-state reduction applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RegimeKind {
    StandardQssa,
    ReverseQssa,
    Intermediate,
}

impl std::fmt::Display for RegimeKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RegimeKind::StandardQssa => write!(f, "standard"),
            RegimeKind::ReverseQssa => write!(f, "reverse"),
            RegimeKind::Intermediate => write!(f, "intermediate"),
        }
    }
}

/// Classification outcome together with the epsilon that produced it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Regime {
    pub kind: RegimeKind,
    pub epsilon: f64,
}

/// Classify by epsilon against the configured thresholds.
///
/// `epsilon <= eps_lo` is the standard regime, `epsilon >= eps_hi` the
/// reverse one, anything between is intermediate. Both assumptions
/// require material on both sides (`a1 > 0` and `a2 > 0`); otherwise
/// the question does not apply.
pub fn classify_regime(
    dc: &DerivedConstants,
    eps_lo: f64,
    eps_hi: f64,
) -> Result<Regime, KineticsError> {
    if !(eps_lo > 0.0 && eps_lo < eps_hi && eps_hi.is_finite()) {
        return Err(KineticsError::InvalidThresholds {
            lo: eps_lo,
            hi: eps_hi,
        });
    }
    if dc.a1 <= 0.0 || dc.a2 <= 0.0 {
        return Err(KineticsError::NotApplicable {
            a1: dc.a1,
            a2: dc.a2,
        });
    }
    let kind = if dc.epsilon <= eps_lo {
        RegimeKind::StandardQssa
    } else if dc.epsilon >= eps_hi {
        RegimeKind::ReverseQssa
    } else {
        RegimeKind::Intermediate
    };
    Ok(Regime {
        kind,
        epsilon: dc.epsilon,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    pub(crate) fn standard_preset() -> (RateConstants, InitialState) {
        (
            RateConstants::new(4e6, 25.0, 15.0).unwrap(),
            InitialState::new(1e-5, 1e-8, 0.0, 0.0).unwrap(),
        )
    }

    pub(crate) fn reverse_preset() -> (RateConstants, InitialState) {
        (
            RateConstants::new(4e6, 25.0, 15.0).unwrap(),
            InitialState::new(1e-5, 1e-2, 0.0, 0.0).unwrap(),
        )
    }

    #[test]
    fn standard_preset_constants() {
        let (rates, init) = standard_preset();
        let dc = derive_constants(&rates, &init);
        assert_relative_eq!(dc.k_m, 1e-5, max_relative = 1e-12);
        assert_relative_eq!(dc.a1, 1e-5, max_relative = 1e-12);
        assert_relative_eq!(dc.a2, 1e-8, max_relative = 1e-12);
        assert_relative_eq!(dc.epsilon, 5e-4, max_relative = 1e-12);
        assert_relative_eq!(dc.t1_standard, 1.25e-2, max_relative = 1e-12);
        assert_relative_eq!(dc.t2_standard.unwrap(), 25.0, max_relative = 1e-12);
        assert_relative_eq!(dc.sigma, 1.0, max_relative = 1e-12);
        assert_relative_eq!(dc.rho, 5.0 / 3.0, max_relative = 1e-12);
        assert_relative_eq!(dc.a4, 5e-9, max_relative = 1e-12);
    }

    #[test]
    fn reverse_preset_constants() {
        let (rates, init) = reverse_preset();
        let dc = derive_constants(&rates, &init);
        assert_relative_eq!(dc.epsilon, 500.0, max_relative = 1e-12);
        assert_relative_eq!(dc.eta.unwrap(), 1e-3, max_relative = 1e-12);
        assert_relative_eq!(dc.t1_reverse.unwrap(), 1.25e-5, max_relative = 1e-12);
        assert_relative_eq!(dc.t2_reverse, 1.25e-2, max_relative = 1e-12);
        // Reverse branch of the complex-bound dichotomy.
        assert_relative_eq!(dc.a4, dc.a1, max_relative = 1e-12);
    }

    #[test]
    fn zero_enzyme_gives_undefined_scales() {
        let rates = RateConstants::new(3.0, 2.0, 1.0).unwrap();
        let init = InitialState::new(1.0, 0.0, 0.0, 0.5).unwrap();
        let dc = derive_constants(&rates, &init);
        assert_eq!(dc.a2, 0.0);
        assert_eq!(dc.epsilon, 0.0);
        assert_eq!(dc.eta, None);
        assert_eq!(dc.t2_standard, None);
        assert_eq!(dc.t1_reverse, None);
    }

    #[test]
    fn classification_on_presets_and_between() {
        let (rates, init) = standard_preset();
        let dc = derive_constants(&rates, &init);
        let regime = classify_regime(&dc, DEFAULT_EPS_LO, DEFAULT_EPS_HI).unwrap();
        assert_eq!(regime.kind, RegimeKind::StandardQssa);

        let (rates, init) = reverse_preset();
        let dc = derive_constants(&rates, &init);
        let regime = classify_regime(&dc, DEFAULT_EPS_LO, DEFAULT_EPS_HI).unwrap();
        assert_eq!(regime.kind, RegimeKind::ReverseQssa);

        // epsilon = 1 sits between the default thresholds.
        let init = InitialState::new(1e-5, 2e-5, 0.0, 0.0).unwrap();
        let dc = derive_constants(&RateConstants::new(4e6, 25.0, 15.0).unwrap(), &init);
        assert_relative_eq!(dc.epsilon, 1.0, max_relative = 1e-12);
        let regime = classify_regime(&dc, DEFAULT_EPS_LO, DEFAULT_EPS_HI).unwrap();
        assert_eq!(regime.kind, RegimeKind::Intermediate);
    }

    #[test]
    fn classification_requires_material_on_both_sides() {
        let rates = RateConstants::new(1.0, 1.0, 1.0).unwrap();
        let no_enzyme = derive_constants(&rates, &InitialState::new(1.0, 0.0, 0.0, 0.0).unwrap());
        assert!(matches!(
            classify_regime(&no_enzyme, 0.1, 10.0),
            Err(KineticsError::NotApplicable { .. })
        ));
        let no_substrate =
            derive_constants(&rates, &InitialState::new(0.0, 1.0, 0.0, 0.0).unwrap());
        assert!(matches!(
            classify_regime(&no_substrate, 0.1, 10.0),
            Err(KineticsError::NotApplicable { .. })
        ));
        assert!(matches!(
            classify_regime(&no_enzyme, 10.0, 0.1),
            Err(KineticsError::InvalidThresholds { .. })
        ));
    }

    #[test]
    fn construction_rejects_invalid_values() {
        assert!(RateConstants::new(0.0, 1.0, 1.0).is_err());
        assert!(RateConstants::new(1.0, -2.0, 1.0).is_err());
        assert!(RateConstants::new(1.0, 1.0, f64::NAN).is_err());
        assert!(InitialState::new(-1e-30, 0.0, 0.0, 0.0).is_err());
        assert!(InitialState::new(0.0, f64::INFINITY, 0.0, 0.0).is_err());
    }

    fn rate_strategy() -> impl Strategy<Value = f64> {
        // Log-uniform over a wide but overflow-safe range.
        (-6.0..6.0f64).prop_map(|e| 10f64.powf(e))
    }

    fn conc_strategy() -> impl Strategy<Value = f64> {
        prop_oneof![Just(0.0), (-8.0..2.0f64).prop_map(|e| 10f64.powf(e))]
    }

    proptest! {
        #[test]
        fn michaelis_constant_identity(
            k1 in rate_strategy(), km1 in rate_strategy(), k2 in rate_strategy(),
            s0 in conc_strategy(), e0 in conc_strategy(),
            c0 in conc_strategy(), p0 in conc_strategy(),
        ) {
            let rates = RateConstants::new(k1, km1, k2).unwrap();
            let init = InitialState::new(s0, e0, c0, p0).unwrap();
            let dc = derive_constants(&rates, &init);
            // k_m k1 = k_minus1 + k2, exact to floating rounding.
            prop_assert!((dc.k_m * k1 - (km1 + k2)).abs() <= 1e-12 * (km1 + k2));
            // k_m = k_dis + k_vsc.
            prop_assert!((dc.k_m - (dc.k_dis + dc.k_vsc)).abs() <= 1e-12 * dc.k_m);
        }

        #[test]
        fn a4_is_the_tightest_bound(
            k1 in rate_strategy(), km1 in rate_strategy(), k2 in rate_strategy(),
            s0 in conc_strategy(), e0 in conc_strategy(),
            c0 in conc_strategy(), p0 in conc_strategy(),
        ) {
            let dc = derive_constants(
                &RateConstants::new(k1, km1, k2).unwrap(),
                &InitialState::new(s0, e0, c0, p0).unwrap(),
            );
            let slack = 1e-12 * dc.a1.max(dc.a2).max(1e-300);
            prop_assert!(dc.a4 <= dc.a1.min(dc.a2).min(dc.a3) + slack);
        }

        #[test]
        fn epsilon_eta_product(
            k1 in rate_strategy(), km1 in rate_strategy(), k2 in rate_strategy(),
            s0 in (-8.0..2.0f64).prop_map(|e| 10f64.powf(e)),
            e0 in (-8.0..2.0f64).prop_map(|e| 10f64.powf(e)),
        ) {
            let dc = derive_constants(
                &RateConstants::new(k1, km1, k2).unwrap(),
                &InitialState::new(s0, e0, 0.0, 0.0).unwrap(),
            );
            let product = dc.epsilon * dc.eta.unwrap();
            let expected = dc.a1 / (dc.k_m + dc.a1);
            prop_assert!((product - expected).abs() <= 1e-12 * expected);
            prop_assert!(product < 1.0);
        }

        #[test]
        fn time_scale_ratios(
            k1 in rate_strategy(), km1 in rate_strategy(), k2 in rate_strategy(),
            s0 in (-8.0..2.0f64).prop_map(|e| 10f64.powf(e)),
            e0 in (-8.0..2.0f64).prop_map(|e| 10f64.powf(e)),
        ) {
            let dc = derive_constants(
                &RateConstants::new(k1, km1, k2).unwrap(),
                &InitialState::new(s0, e0, 0.0, 0.0).unwrap(),
            );
            let t2s = dc.t2_standard.unwrap();
            prop_assert!((t2s - dc.t1_standard / dc.epsilon).abs() <= 1e-12 * t2s);
            let t1r = dc.t1_reverse.unwrap();
            let eta = dc.eta.unwrap();
            prop_assert!((dc.t2_reverse - t1r / eta).abs() <= 1e-12 * dc.t2_reverse);
        }

        #[test]
        fn classification_is_monotone_in_epsilon(
            e0_lo in (-9.0..1.0f64).prop_map(|e| 10f64.powf(e)),
            bump in (0.0..4.0f64).prop_map(|e| 10f64.powf(e)),
        ) {
            let rates = RateConstants::new(4e6, 25.0, 15.0).unwrap();
            let lo = derive_constants(&rates, &InitialState::new(1e-5, e0_lo, 0.0, 0.0).unwrap());
            let hi = derive_constants(
                &rates,
                &InitialState::new(1e-5, e0_lo * bump, 0.0, 0.0).unwrap(),
            );
            let rank = |kind| match kind {
                RegimeKind::StandardQssa => 0,
                RegimeKind::Intermediate => 1,
                RegimeKind::ReverseQssa => 2,
            };
            let r_lo = classify_regime(&lo, 0.1, 10.0).unwrap();
            let r_hi = classify_regime(&hi, 0.1, 10.0).unwrap();
            prop_assert!(rank(r_hi.kind) >= rank(r_lo.kind));
        }
    }
}
