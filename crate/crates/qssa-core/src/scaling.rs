//! Mechanical nondimensionalization of bounded mass-action systems.
//!
//! The procedure has three steps:
//!
//! 1. the caller identifies the bounded feasible region, i.e. a positive
//!    supremum for every dependent variable;
//! 2. each dependent variable is divided by its supremum, mapping the
//!    feasible region into the unit box (performed by
//!    [`BoundedSystem::from_mass_action`], which rewrites every
//!    monomial coefficient accordingly; the rewritten coefficients all
//!    carry dimension 1/time);
//! 3. the remaining coefficients are gathered into per-equation rate
//!    groups whose reciprocals are the candidate time scales
//!    ([`scale_system`]).
//!
//! Step 3 gathers, for each equation, the magnitudes of its negative
//! self-terms (terms containing the equation's own variable) into a
//! relaxation rate. When the slowest-relaxing equation is driven faster
//! than it relaxes, its fast fill-up is enslaved to the driving
//! equation and the pair of scales is instead generated from the
//! interaction-to-drive ratio of that equation (the slow-manifold
//! refinement); driver equations whose relaxation rate coincides with
//! the drive are absorbed rather than reported twice. Candidates are
//! deduplicated with relative tolerance [`GROUP_DEDUP_REL_TOL`] and
//! reported in ascending order; when several distinct groups appear,
//! all candidates are reported rather than a single chosen scale.

use crate::kinetics::{DerivedConstants, Regime, RegimeKind};
use serde::Serialize;
use thiserror::Error;

/// Relative tolerance for deduplicating coefficient groups.
pub const GROUP_DEDUP_REL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScalingError {
    #[error(
        "variable {name} has degenerate bound {bound}; every supremum must be positive and finite"
    )]
    DegenerateBound { name: String, bound: f64 },
    #[error("term exponent vector has length {got}, expected {expected}")]
    ArityMismatch { got: usize, expected: usize },
    #[error("coefficient {value} is not finite")]
    NonFiniteCoefficient { value: f64 },
    #[error("no equation has a decaying self-term; the system has no relaxation time scale")]
    NoRelaxation,
    #[error("operation requires a classified standard or reverse regime")]
    NotApplicable,
}

/// One monomial term: `coeff * prod(u_j ^ exponents[j])`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Term {
    pub coeff: f64,
    pub exponents: Vec<u32>,
}

impl Term {
    pub fn new(coeff: f64, exponents: Vec<u32>) -> Self {
        Self { coeff, exponents }
    }

    fn degree(&self) -> u32 {
        self.exponents.iter().sum()
    }
}

/// A polynomial ODE system together with the bounds of its feasible
/// region, stored with coefficients already rewritten over the scaled
/// (unit-box) variables.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundedSystem {
    variables: Vec<String>,
    bounds: Vec<f64>,
    equations: Vec<Vec<Term>>,
}

impl BoundedSystem {
    /// Build from the physical mass-action form: `equations[i]` lists
    /// the terms of `d x_i / dt` with coefficients in physical units.
    /// Substituting `x_j = bounds[j] * u_j` rewrites term
    /// `c * prod(x_j^e_j)` of equation `i` into
    /// `c * prod(bounds_j^e_j) / bounds_i * prod(u_j^e_j)`.
    pub fn from_mass_action(
        variables: &[&str],
        bounds: &[f64],
        equations: Vec<Vec<Term>>,
    ) -> Result<Self, ScalingError> {
        assert_eq!(variables.len(), bounds.len());
        assert_eq!(variables.len(), equations.len());
        for (name, &bound) in variables.iter().zip(bounds) {
            if !(bound.is_finite() && bound > 0.0) {
                return Err(ScalingError::DegenerateBound {
                    name: (*name).to_owned(),
                    bound,
                });
            }
        }
        let n = variables.len();
        let mut scaled = Vec::with_capacity(n);
        for (i, eq) in equations.into_iter().enumerate() {
            let mut terms = Vec::with_capacity(eq.len());
            for term in eq {
                if term.exponents.len() != n {
                    return Err(ScalingError::ArityMismatch {
                        got: term.exponents.len(),
                        expected: n,
                    });
                }
                if !term.coeff.is_finite() {
                    return Err(ScalingError::NonFiniteCoefficient { value: term.coeff });
                }
                let mut factor = 1.0;
                for (b, &e) in bounds.iter().zip(&term.exponents) {
                    factor *= b.powi(e as i32);
                }
                terms.push(Term {
                    coeff: term.coeff * factor / bounds[i],
                    exponents: term.exponents,
                });
            }
            scaled.push(terms);
        }
        Ok(Self {
            variables: variables.iter().map(|s| (*s).to_owned()).collect(),
            bounds: bounds.to_vec(),
            equations: scaled,
        })
    }

    pub fn variables(&self) -> &[String] {
        &self.variables
    }

    pub fn bounds(&self) -> &[f64] {
        &self.bounds
    }

    /// Coefficient table over the scaled variables; coefficients have
    /// dimension 1/time.
    pub fn equations(&self) -> &[Vec<Term>] {
        &self.equations
    }

    /// Evaluate the scaled right-hand side at a point of the unit box.
    pub fn rhs(&self, u: &[f64]) -> Vec<f64> {
        self.equations
            .iter()
            .map(|eq| {
                eq.iter()
                    .map(|term| {
                        let mut v = term.coeff;
                        for (&x, &e) in u.iter().zip(&term.exponents) {
                            v *= x.powi(e as i32);
                        }
                        v
                    })
                    .sum()
            })
            .collect()
    }
}

/// One candidate time scale and the dimensionless groups left after
/// multiplying every coefficient by it (deduplicated, unit groups
/// dropped, ascending).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimeScaleChoice {
    pub time_scale: f64,
    pub groups: Vec<f64>,
}

/// Outcome of the scaling procedure.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingReport {
    pub variables: Vec<String>,
    /// Supremum used as the scale of each dependent variable.
    pub variable_scales: Vec<f64>,
    /// Candidate time scales, ascending.
    pub time_scales: Vec<f64>,
    /// Per-candidate remaining dimensionless groups.
    pub choices: Vec<TimeScaleChoice>,
    /// Ratios between consecutive candidates (`time_scales[i+1] /
    /// time_scales[i]`); the separation parameters of the problem.
    pub separation_ratios: Vec<f64>,
}

fn approx_same(a: f64, b: f64) -> bool {
    (a - b).abs() <= GROUP_DEDUP_REL_TOL * a.abs().max(b.abs())
}

fn dedup_sorted(mut values: Vec<f64>) -> Vec<f64> {
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut out: Vec<f64> = Vec::with_capacity(values.len());
    for v in values {
        if !out.last().is_some_and(|&last| approx_same(last, v)) {
            out.push(v);
        }
    }
    out
}

/// Gather the coefficient groups of a scaled system into candidate time
/// scales and the dimensionless groups each choice leaves behind.
pub fn scale_system(sys: &BoundedSystem) -> Result<ScalingReport, ScalingError> {
    for (name, &bound) in sys.variables.iter().zip(&sys.bounds) {
        if !(bound.is_finite() && bound > 0.0) {
            return Err(ScalingError::DegenerateBound {
                name: name.clone(),
                bound,
            });
        }
    }

    struct Gather {
        /// Sum of |coeff| over negative self-terms.
        relax: f64,
        /// Part of `relax` coming from interaction (degree >= 2) terms.
        relax_interaction: f64,
        /// Sum of |coeff| over terms free of the equation's variable.
        drive: f64,
    }

    let gathers: Vec<Gather> = sys
        .equations
        .iter()
        .enumerate()
        .map(|(i, eq)| {
            let mut g = Gather {
                relax: 0.0,
                relax_interaction: 0.0,
                drive: 0.0,
            };
            for term in eq {
                if term.exponents[i] > 0 {
                    if term.coeff < 0.0 {
                        g.relax += term.coeff.abs();
                        if term.degree() >= 2 {
                            g.relax_interaction += term.coeff.abs();
                        }
                    }
                } else {
                    g.drive += term.coeff.abs();
                }
            }
            g
        })
        .collect();

    let relaxing: Vec<(usize, f64)> = gathers
        .iter()
        .enumerate()
        .filter(|(_, g)| g.relax > 0.0)
        .map(|(i, g)| (i, g.relax))
        .collect();
    if relaxing.is_empty() {
        return Err(ScalingError::NoRelaxation);
    }

    let &(slow_idx, slow_rate) = relaxing
        .iter()
        .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
        .unwrap();
    let slow = &gathers[slow_idx];

    let mut rates: Vec<f64> = Vec::new();
    if slow.drive > slow_rate * (1.0 + GROUP_DEDUP_REL_TOL) && slow.relax_interaction > 0.0 {
        // Drive-dominated: the slowest equation fills up on a scale set
        // by its drive, and its own relaxation emerges divided by the
        // interaction-to-drive separation ratio.
        let separation = slow.relax_interaction / slow.drive;
        rates.push(slow_rate);
        rates.push(slow_rate / separation);
        for &(i, r) in &relaxing {
            if i != slow_idx && !approx_same(r, slow.drive) {
                rates.push(r);
            }
        }
    } else {
        rates.extend(relaxing.iter().map(|&(_, r)| r));
    }

    let rates = dedup_sorted(rates);
    let time_scales: Vec<f64> = rates.iter().rev().map(|r| 1.0 / r).collect();

    let choices = time_scales
        .iter()
        .map(|&ts| {
            let all: Vec<f64> = sys
                .equations
                .iter()
                .flatten()
                .map(|term| term.coeff.abs() * ts)
                .collect();
            let groups = dedup_sorted(all)
                .into_iter()
                .filter(|&g| !approx_same(g, 1.0))
                .collect();
            TimeScaleChoice {
                time_scale: ts,
                groups,
            }
        })
        .collect();

    let separation_ratios = time_scales.windows(2).map(|w| w[1] / w[0]).collect();

    Ok(ScalingReport {
        variables: sys.variables.clone(),
        variable_scales: sys.bounds.clone(),
        time_scales,
        choices,
        separation_ratios,
    })
}

/// The reduced substrate/complex system as a [`BoundedSystem`], with
/// bounds `(a1, a4)` from the feasible region.
pub fn sc_bounded_system(
    rates: &crate::kinetics::RateConstants,
    dc: &DerivedConstants,
) -> Result<BoundedSystem, ScalingError> {
    let k1 = rates.k1();
    BoundedSystem::from_mass_action(
        &["S", "C"],
        &[dc.a1, dc.a4],
        vec![
            vec![
                Term::new(-k1 * dc.a2, vec![1, 0]),
                Term::new(k1, vec![1, 1]),
                Term::new(rates.k_minus1(), vec![0, 1]),
            ],
            vec![
                Term::new(k1 * dc.a2, vec![1, 0]),
                Term::new(-k1, vec![1, 1]),
                Term::new(-(rates.k_minus1() + rates.k2()), vec![0, 1]),
            ],
        ],
    )
}

/// The classical susceptible/infected/removed epidemic system with all
/// variables bounded by the initial population `n0`.
pub fn sir_bounded_system(beta: f64, gamma: f64, n0: f64) -> Result<BoundedSystem, ScalingError> {
    BoundedSystem::from_mass_action(
        &["S", "I", "R"],
        &[n0, n0, n0],
        vec![
            vec![Term::new(-beta, vec![1, 1, 0])],
            vec![
                Term::new(-gamma, vec![0, 1, 0]),
                Term::new(beta, vec![1, 1, 0]),
            ],
            vec![Term::new(gamma, vec![0, 1, 0])],
        ],
    )
}

/// Which member of the regime's fast/slow pair normalizes time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TimeScaleId {
    T1,
    T2,
}

/// Closed-form scaled substrate/complex system for a classified regime
/// and chosen time scale.
///
/// Coefficients are listed against the monomials `(S, S*C, C)` with
/// their signs, for each of the two equations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScaledScSystem {
    pub time_scale: f64,
    pub substrate_eq: [f64; 3],
    pub complex_eq: [f64; 3],
}

/// Exact coefficient sets of the scaled substrate/complex system.
///
/// In the standard regime the fast choice leaves the substrate equation
/// premultiplied by `epsilon`; the slow choice moves `1/epsilon` onto
/// the complex equation. In the reverse regime the separation parameter
/// is `eta` instead. The intermediate regime has no asymptotic scaling
/// and is rejected.
pub fn scaled_sc_coefficients(
    dc: &DerivedConstants,
    regime: &Regime,
    choice: TimeScaleId,
) -> Result<ScaledScSystem, ScalingError> {
    let f_sat = dc.sigma / (1.0 + dc.sigma);
    let f_unbind = dc.rho / ((1.0 + dc.rho) * (1.0 + dc.sigma));
    let f_lin = 1.0 / (1.0 + dc.sigma);
    let eps = dc.epsilon;
    match (regime.kind, choice) {
        (RegimeKind::StandardQssa, TimeScaleId::T1) => Ok(ScaledScSystem {
            time_scale: dc.t1_standard,
            substrate_eq: [-eps, eps * f_sat, eps * f_unbind],
            complex_eq: [1.0, -f_sat, -f_lin],
        }),
        (RegimeKind::StandardQssa, TimeScaleId::T2) => Ok(ScaledScSystem {
            time_scale: dc.t2_standard.ok_or(ScalingError::NotApplicable)?,
            substrate_eq: [-1.0, f_sat, f_unbind],
            complex_eq: [1.0 / eps, -f_sat / eps, -f_lin / eps],
        }),
        (RegimeKind::ReverseQssa, TimeScaleId::T1) => {
            let eta = dc.eta.ok_or(ScalingError::NotApplicable)?;
            Ok(ScaledScSystem {
                time_scale: dc.t1_reverse.ok_or(ScalingError::NotApplicable)?,
                substrate_eq: [-f_sat, eta * f_sat, eta * f_unbind],
                complex_eq: [f_sat, -eta * f_sat, -eta * f_lin],
            })
        }
        (RegimeKind::ReverseQssa, TimeScaleId::T2) => {
            let eta = dc.eta.ok_or(ScalingError::NotApplicable)?;
            Ok(ScaledScSystem {
                time_scale: dc.t2_reverse,
                substrate_eq: [-f_sat / eta, f_sat, f_unbind],
                complex_eq: [f_sat / eta, -f_sat, -f_lin],
            })
        }
        (RegimeKind::Intermediate, _) => Err(ScalingError::NotApplicable),
    }
}
