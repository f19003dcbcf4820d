//! Mass-action right-hand sides, the adaptive integrator driver and
//! conservation/feasibility monitors.
//!
//! This module is the ground-truth oracle: trajectories produced here at
//! tight tolerances anchor every closed-form comparison. The full system
//! evolves `(S, E, C, P)`; the reduced system uses the two conservation
//! laws to evolve only `(S, C)` with `E = a2 - C` eliminated.
//!
//! The enzyme-material law is built into the right-hand side: the `E`
//! derivative is the exact negation of the `C` derivative, so `E + C`
//! drifts only through final-summation rounding, never through the
//! vector field.

pub mod dopri5;

use crate::kinetics::{DerivedConstants, InitialState, RateConstants};
use serde::Serialize;
use thiserror::Error;

/// Default oracle relative tolerance.
pub const DEFAULT_REL_TOL: f64 = 1e-10;
/// Default absolute tolerance as a fraction of the substrate total.
pub const DEFAULT_ABS_TOL_FRACTION: f64 = 1e-14;
/// Minimum number of samples when the integrator chooses output times.
pub const MIN_SAMPLES: usize = 400;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum OdeError {
    #[error("invalid integration input: {reason}")]
    BadInput { reason: &'static str },
    #[error("step size underflow at t = {t_reached} (system too stiff for the explicit method)")]
    Stiffness { t_reached: f64 },
    #[error("step budget {max_steps} exhausted at t = {t_reached}")]
    StepLimit { t_reached: f64, max_steps: usize },
    #[error(
        "state component {component} = {value} at t = {t} violates nonnegativity beyond abs_tol"
    )]
    InvariantViolation {
        t: f64,
        component: &'static str,
        value: f64,
    },
}

/// Concentrations of the four species of the full system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FullState {
    pub s: f64,
    pub e: f64,
    pub c: f64,
    pub p: f64,
}

/// Concentrations of the reduced substrate/complex system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReducedState {
    pub s: f64,
    pub c: f64,
}

/// Right-hand side of the full system.
///
/// The products are formed once and reused so that `dE = -dC` holds
/// bitwise and `dS + dC + dP` vanishes to a rounding error of the
/// individual terms.
pub fn secp_rhs(x: &FullState, k: &RateConstants) -> FullState {
    let bind = k.k1() * x.s * x.e;
    let unbind = k.k_minus1() * x.c;
    let catal = k.k2() * x.c;
    let dc = (bind - unbind) - catal;
    FullState {
        s: unbind - bind,
        e: -dc,
        c: dc,
        p: catal,
    }
}

/// Right-hand side of the reduced system, with `a2` the conserved
/// enzyme material.
pub fn sc_rhs(x: &ReducedState, k: &RateConstants, a2: f64) -> ReducedState {
    let drive = k.k1() * a2 * x.s;
    let bind_back = k.k1() * x.s * x.c;
    let unbind = k.k_minus1() * x.c;
    let catal = k.k2() * x.c;
    ReducedState {
        s: -drive + bind_back + unbind,
        c: ((drive - bind_back) - unbind) - catal,
    }
}

/// Integrator statistics recorded with every trajectory.
#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct IntegratorStats {
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    /// Largest relative conservation residual over the samples; `None`
    /// for reduced-system runs, where the totals are not constants.
    pub max_conservation_residual: Option<f64>,
}

/// Time-stamped samples of one integration run.
#[derive(Debug, Clone, Serialize)]
pub struct Trajectory<S> {
    pub times: Vec<f64>,
    pub states: Vec<S>,
    pub stats: IntegratorStats,
}

impl<S> Trajectory<S> {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> Option<(f64, &S)> {
        self.times.last().map(|t| (*t, self.states.last().unwrap()))
    }
}

/// Integration controls. `abs_tol = None` selects the default
/// `1e-14 * a1` (floored at the smallest positive normal number so the
/// zero-material case stays well defined).
#[derive(Debug, Clone, Copy)]
pub struct IntegrateOptions {
    pub rel_tol: f64,
    pub abs_tol: Option<f64>,
    pub max_steps: usize,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        Self {
            rel_tol: DEFAULT_REL_TOL,
            abs_tol: None,
            max_steps: 20_000_000,
        }
    }
}

fn resolved_abs_tol(opts: &IntegrateOptions, a1: f64) -> f64 {
    opts.abs_tol
        .unwrap_or(DEFAULT_ABS_TOL_FRACTION * a1)
        .max(f64::MIN_POSITIVE)
}

/// Boundary-layer-resolving initial step: one hundredth of the fastest
/// characteristic scale (or of `t_end` when no scale is defined).
fn initial_step(dc: &DerivedConstants, t_end: f64) -> f64 {
    let mut h = t_end;
    h = h.min(dc.t1_standard);
    if let Some(t1r) = dc.t1_reverse {
        h = h.min(t1r);
    }
    h / 100.0
}

fn solver_options(
    rates: &RateConstants,
    init: &InitialState,
    t_end: f64,
    opts: &IntegrateOptions,
    a1: f64,
) -> Result<dopri5::Options, OdeError> {
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(OdeError::BadInput {
            reason: "t_end must be positive and finite",
        });
    }
    if !(opts.rel_tol > 0.0) || opts.abs_tol.map_or(false, |a| a <= 0.0) {
        return Err(OdeError::BadInput {
            reason: "tolerances must be positive",
        });
    }
    let dc = crate::kinetics::derive_constants(rates, init);
    Ok(dopri5::Options {
        rel_tol: opts.rel_tol,
        abs_tol: resolved_abs_tol(opts, a1),
        initial_step: initial_step(&dc, t_end),
        // Caps the accepted-step spacing so free-running output stays
        // dense (at least MIN_SAMPLES samples across the run).
        max_step: t_end / MIN_SAMPLES as f64,
        max_steps: opts.max_steps,
    })
}

fn map_solver_err(e: dopri5::SolverError) -> OdeError {
    match e {
        dopri5::SolverError::StepSizeUnderflow { t } => OdeError::Stiffness { t_reached: t },
        dopri5::SolverError::StepLimit { t, max_steps } => OdeError::StepLimit {
            t_reached: t,
            max_steps,
        },
    }
}

/// Clamp a tiny negative roundoff excursion to zero; anything at or
/// beyond `abs_tol` in magnitude is a genuine invariant violation.
fn clamp_component(
    value: f64,
    abs_tol: f64,
    t: f64,
    component: &'static str,
) -> Result<f64, OdeError> {
    if value >= 0.0 {
        Ok(value)
    } else if -value < abs_tol {
        Ok(0.0)
    } else {
        Err(OdeError::InvariantViolation {
            t,
            component,
            value,
        })
    }
}

/// Integrate the full four-species system from `t = 0` to `t_end`.
///
/// With `grid = Some(ts)` the trajectory is sampled exactly at `0` and
/// the given strictly increasing times; with `None`, at every accepted
/// step.
pub fn integrate_full(
    rates: &RateConstants,
    init: &InitialState,
    t_end: f64,
    opts: &IntegrateOptions,
    grid: Option<&[f64]>,
) -> Result<Trajectory<FullState>, OdeError> {
    let a1 = init.s0() + init.c0() + init.p0();
    let a2 = init.e0() + init.c0();
    let sopts = solver_options(rates, init, t_end, opts, a1)?;
    validate_grid(grid, t_end)?;

    let k = *rates;
    let mut times = Vec::new();
    let mut raw: Vec<[f64; 4]> = Vec::new();
    let y0 = [init.s0(), init.e0(), init.c0(), init.p0()];
    let stats = dopri5::solve(
        |_t, y: &[f64; 4]| {
            let d = secp_rhs(
                &FullState {
                    s: y[0],
                    e: y[1],
                    c: y[2],
                    p: y[3],
                },
                &k,
            );
            [d.s, d.e, d.c, d.p]
        },
        y0,
        t_end,
        &sopts,
        grid,
        |t, y| {
            times.push(t);
            raw.push(*y);
        },
    )
    .map_err(map_solver_err)?;

    let mut states = Vec::with_capacity(raw.len());
    for (&t, y) in times.iter().zip(&raw) {
        states.push(FullState {
            s: clamp_component(y[0], sopts.abs_tol, t, "S")?,
            e: clamp_component(y[1], sopts.abs_tol, t, "E")?,
            c: clamp_component(y[2], sopts.abs_tol, t, "C")?,
            p: clamp_component(y[3], sopts.abs_tol, t, "P")?,
        });
    }

    let mut max_resid = 0.0_f64;
    for st in &states {
        let r1 = (st.s + st.c + st.p - a1).abs() / a1.max(f64::MIN_POSITIVE);
        let r2 = (st.e + st.c - a2).abs() / a2.max(f64::MIN_POSITIVE);
        max_resid = max_resid.max(r1).max(r2);
    }

    Ok(Trajectory {
        times,
        states,
        stats: IntegratorStats {
            accepted_steps: stats.accepted,
            rejected_steps: stats.rejected,
            max_conservation_residual: Some(max_resid),
        },
    })
}

/// Integrate the reduced substrate/complex system.
pub fn integrate_reduced(
    rates: &RateConstants,
    init: &InitialState,
    t_end: f64,
    opts: &IntegrateOptions,
    grid: Option<&[f64]>,
) -> Result<Trajectory<ReducedState>, OdeError> {
    let a1 = init.s0() + init.c0() + init.p0();
    let a2 = init.e0() + init.c0();
    let sopts = solver_options(rates, init, t_end, opts, a1)?;
    validate_grid(grid, t_end)?;

    let k = *rates;
    let mut times = Vec::new();
    let mut raw: Vec<[f64; 2]> = Vec::new();
    let stats = dopri5::solve(
        |_t, y: &[f64; 2]| {
            let d = sc_rhs(&ReducedState { s: y[0], c: y[1] }, &k, a2);
            [d.s, d.c]
        },
        [init.s0(), init.c0()],
        t_end,
        &sopts,
        grid,
        |t, y| {
            times.push(t);
            raw.push(*y);
        },
    )
    .map_err(map_solver_err)?;

    let mut states = Vec::with_capacity(raw.len());
    for (&t, y) in times.iter().zip(&raw) {
        states.push(ReducedState {
            s: clamp_component(y[0], sopts.abs_tol, t, "S")?,
            c: clamp_component(y[1], sopts.abs_tol, t, "C")?,
        });
    }

    Ok(Trajectory {
        times,
        states,
        stats: IntegratorStats {
            accepted_steps: stats.accepted,
            rejected_steps: stats.rejected,
            max_conservation_residual: None,
        },
    })
}

fn validate_grid(grid: Option<&[f64]>, t_end: f64) -> Result<(), OdeError> {
    if let Some(ts) = grid {
        let mut prev = 0.0;
        for &t in ts {
            if !(t > prev && t <= t_end) {
                return Err(OdeError::BadInput {
                    reason: "grid times must be strictly increasing within (0, t_end]",
                });
            }
            prev = t;
        }
    }
    Ok(())
}

/// Per-sample relative residuals of the two conservation laws.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResidualSample {
    pub t: f64,
    /// `|S + C + P - a1| / max(a1, floor)`
    pub substrate_material: f64,
    /// `|E + C - a2| / max(a2, floor)`
    pub enzyme_material: f64,
}

/// Conservation residual series for a full-system trajectory.
pub fn conservation_residuals(
    traj: &Trajectory<FullState>,
    dc: &DerivedConstants,
) -> Vec<ResidualSample> {
    let a1_floor = dc.a1.max(f64::MIN_POSITIVE);
    let a2_floor = dc.a2.max(f64::MIN_POSITIVE);
    traj.times
        .iter()
        .zip(&traj.states)
        .map(|(&t, st)| ResidualSample {
            t,
            substrate_material: (st.s + st.c + st.p - dc.a1).abs() / a1_floor,
            enzyme_material: (st.e + st.c - dc.a2).abs() / a2_floor,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinetics::derive_constants;
    use approx::assert_relative_eq;

    fn standard() -> (RateConstants, InitialState) {
        (
            RateConstants::new(4e6, 25.0, 15.0).unwrap(),
            InitialState::new(1e-5, 1e-8, 0.0, 0.0).unwrap(),
        )
    }

    fn reverse() -> (RateConstants, InitialState) {
        (
            RateConstants::new(4e6, 25.0, 15.0).unwrap(),
            InitialState::new(1e-5, 1e-2, 0.0, 0.0).unwrap(),
        )
    }

    #[test]
    fn secp_rhs_zero_enzyme_is_stationary() {
        let k = RateConstants::new(2.0, 1.0, 3.0).unwrap();
        let d = secp_rhs(
            &FullState {
                s: 0.7,
                e: 0.0,
                c: 0.0,
                p: 0.2,
            },
            &k,
        );
        assert_eq!((d.s, d.e, d.c, d.p), (0.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn secp_rhs_conservation_identities() {
        let k = RateConstants::new(3.7, 0.9, 2.3).unwrap();
        let x = FullState {
            s: 0.31,
            e: 0.17,
            c: 0.05,
            p: 0.46,
        };
        let d = secp_rhs(&x, &k);
        // Enzyme material: exact by construction.
        assert_eq!(d.e + d.c, 0.0);
        // Substrate material: zero up to the rounding of the summands.
        let scale = (k.k1() * x.s * x.e).abs() + (k.k_minus1() * x.c).abs() + (k.k2() * x.c).abs();
        assert!((d.s + d.c + d.p).abs() <= 4.0 * f64::EPSILON * scale);
    }

    #[test]
    fn secp_rhs_hand_evaluation() {
        let k = RateConstants::new(2.0, 1.0, 3.0).unwrap();
        let d = secp_rhs(
            &FullState {
                s: 1.0,
                e: 1.0,
                c: 1.0,
                p: 0.0,
            },
            &k,
        );
        assert_eq!((d.s, d.e, d.c, d.p), (-1.0, 2.0, -2.0, 3.0));
    }

    #[test]
    fn sc_rhs_origin_is_steady() {
        let k = RateConstants::new(1.0, 1.0, 1.0).unwrap();
        let d = sc_rhs(&ReducedState { s: 0.0, c: 0.0 }, &k, 2.0);
        assert_eq!((d.s, d.c), (0.0, 0.0));
    }

    #[test]
    fn sc_rhs_hand_evaluation() {
        let k = RateConstants::new(1.0, 1.0, 1.0).unwrap();
        let d = sc_rhs(&ReducedState { s: 1.0, c: 1.0 }, &k, 2.0);
        assert_eq!(d.s, 0.0);
        assert_eq!(d.c, -1.0);
    }

    #[test]
    fn sc_rhs_matches_reduction_of_full_rhs() {
        let k = RateConstants::new(4e6, 25.0, 15.0).unwrap();
        let a2 = 3e-6;
        for (s, c) in [(1e-5, 0.0), (7e-6, 2e-6), (1e-9, 2.9e-6)] {
            let red = sc_rhs(&ReducedState { s, c }, &k, a2);
            let full = secp_rhs(
                &FullState {
                    s,
                    e: a2 - c,
                    c,
                    p: 0.0,
                },
                &k,
            );
            let scale = k.k1() * a2 * s + k.k_minus1() * c + k.k2() * c;
            assert!((red.s - full.s).abs() <= 1e-12 * scale);
            assert!((red.c - full.c).abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn standard_preset_monotone_substrate_and_product() {
        let (rates, init) = standard();
        let dc = derive_constants(&rates, &init);
        let t_end = 5.0 * dc.t2_standard.unwrap();
        let traj =
            integrate_full(&rates, &init, t_end, &IntegrateOptions::default(), None).unwrap();
        assert!(traj.len() >= MIN_SAMPLES);
        for w in traj.states.windows(2) {
            assert!(w[1].s <= w[0].s * (1.0 + 1e-12));
            assert!(w[1].p >= w[0].p * (1.0 - 1e-12));
        }
        // Times strictly increasing from 0.
        assert_eq!(traj.times[0], 0.0);
        for w in traj.times.windows(2) {
            assert!(w[1] > w[0]);
        }
    }

    #[test]
    fn zero_enzyme_trajectory_is_constant() {
        let rates = RateConstants::new(4e6, 25.0, 15.0).unwrap();
        let init = InitialState::new(1e-5, 0.0, 0.0, 2e-6).unwrap();
        let traj = integrate_full(&rates, &init, 1.0, &IntegrateOptions::default(), None).unwrap();
        for st in &traj.states {
            assert_eq!(st.s, 1e-5);
            assert_eq!(st.e, 0.0);
            assert_eq!(st.c, 0.0);
            assert_eq!(st.p, 2e-6);
        }
        assert_eq!(traj.stats.max_conservation_residual, Some(0.0));
    }

    #[test]
    fn reverse_preset_conservation_is_tight() {
        let (rates, init) = reverse();
        let dc = derive_constants(&rates, &init);
        let t_end = 5.0 * dc.t2_reverse;
        let traj =
            integrate_full(&rates, &init, t_end, &IntegrateOptions::default(), None).unwrap();
        let max_sub = conservation_residuals(&traj, &dc)
            .iter()
            .map(|r| r.substrate_material)
            .fold(0.0, f64::max);
        assert!(max_sub <= 1e-9, "substrate residual {max_sub}");
    }

    #[test]
    fn standard_preset_residuals_at_tight_tolerance() {
        let (rates, init) = standard();
        let dc = derive_constants(&rates, &init);
        let t_end = 5.0 * dc.t2_standard.unwrap();
        let traj =
            integrate_full(&rates, &init, t_end, &IntegrateOptions::default(), None).unwrap();
        let residuals = conservation_residuals(&traj, &dc);
        let max = residuals
            .iter()
            .map(|r| r.substrate_material.max(r.enzyme_material))
            .fold(0.0, f64::max);
        assert!(max <= 1e-8, "conservation residual {max}");
        // The first sample is the initial state, with zero residual.
        assert_eq!(residuals[0].substrate_material, 0.0);
        assert_eq!(residuals[0].enzyme_material, 0.0);
    }

    #[test]
    fn forward_invariance_with_inflation() {
        let (rates, init) = standard();
        let dc = derive_constants(&rates, &init);
        let t_end = 5.0 * dc.t2_standard.unwrap();
        let opts = IntegrateOptions::default();
        let tol = 10.0 * DEFAULT_ABS_TOL_FRACTION * dc.a1;
        let traj = integrate_full(&rates, &init, t_end, &opts, None).unwrap();
        for st in &traj.states {
            assert!(st.s >= 0.0 && st.s <= dc.a1 + tol);
            assert!(st.e >= 0.0 && st.e <= dc.a2 + tol);
            assert!(st.c >= 0.0 && st.c <= dc.a3 + tol);
            assert!(st.p >= 0.0 && st.p <= dc.a1 + tol);
        }
        let red = integrate_reduced(&rates, &init, t_end, &opts, None).unwrap();
        for st in &red.states {
            assert!(st.s >= 0.0 && st.s <= dc.a1 + tol);
            assert!(st.c >= 0.0 && st.c <= dc.a4 + tol);
            assert!(st.s + st.c <= dc.a1 + tol);
        }
    }

    #[test]
    fn dp_rate_is_nonnegative_along_trajectories() {
        let (rates, init) = reverse();
        let dc = derive_constants(&rates, &init);
        let traj = integrate_full(
            &rates,
            &init,
            5.0 * dc.t2_reverse,
            &IntegrateOptions::default(),
            None,
        )
        .unwrap();
        for st in &traj.states {
            assert!(secp_rhs(st, &rates).p >= 0.0);
        }
    }

    #[test]
    fn grid_sampling_returns_exact_grid() {
        let (rates, init) = standard();
        let grid = [1e-4, 1e-2, 1.0, 10.0];
        let traj = integrate_full(
            &rates,
            &init,
            10.0,
            &IntegrateOptions::default(),
            Some(&grid),
        )
        .unwrap();
        assert_eq!(traj.times, vec![0.0, 1e-4, 1e-2, 1.0, 10.0]);
    }

    #[test]
    fn halving_rel_tol_keeps_conservation_residual_controlled() {
        let (rates, init) = standard();
        let dc = derive_constants(&rates, &init);
        let t_end = dc.t2_standard.unwrap();
        let run = |rel: f64| {
            let traj = integrate_full(
                &rates,
                &init,
                t_end,
                &IntegrateOptions {
                    rel_tol: rel,
                    ..Default::default()
                },
                None,
            )
            .unwrap();
            traj.stats.max_conservation_residual.unwrap()
        };
        let coarse = run(1e-8);
        let fine = run(0.5e-8);
        // Conservation drift is rounding-dominated; halving the
        // tolerance must not degrade it beyond a factor of two (a small
        // floor keeps the comparison meaningful at the noise level).
        assert!(
            fine <= 2.0 * coarse.max(1e-13),
            "fine {fine} vs coarse {coarse}"
        );
    }

    #[test]
    fn step_limit_error_names_time_reached() {
        let (rates, init) = standard();
        let res = integrate_full(
            &rates,
            &init,
            1.0,
            &IntegrateOptions {
                max_steps: 3,
                ..Default::default()
            },
            None,
        );
        match res {
            Err(OdeError::StepLimit { t_reached, .. }) => assert!(t_reached < 1.0),
            other => panic!("expected step limit, got {other:?}"),
        }
    }

    #[test]
    fn unattainable_tolerance_reports_stiffness() {
        let (rates, init) = standard();
        let res = integrate_full(
            &rates,
            &init,
            1.0,
            &IntegrateOptions {
                rel_tol: 1e-320,
                abs_tol: Some(5e-324),
                max_steps: 200_000,
            },
            None,
        );
        assert!(matches!(
            res,
            Err(OdeError::Stiffness { .. }) | Err(OdeError::StepLimit { .. })
        ));
    }

    #[test]
    fn bad_inputs_are_rejected() {
        let (rates, init) = standard();
        assert!(matches!(
            integrate_full(&rates, &init, 0.0, &IntegrateOptions::default(), None),
            Err(OdeError::BadInput { .. })
        ));
        assert!(matches!(
            integrate_full(
                &rates,
                &init,
                1.0,
                &IntegrateOptions {
                    rel_tol: -1.0,
                    ..Default::default()
                },
                None
            ),
            Err(OdeError::BadInput { .. })
        ));
        assert!(matches!(
            integrate_full(
                &rates,
                &init,
                1.0,
                &IntegrateOptions::default(),
                Some(&[0.5, 0.25])
            ),
            Err(OdeError::BadInput { .. })
        ));
    }

    #[test]
    fn full_and_reduced_agree_on_shared_grid() {
        let (rates, init) = standard();
        let dc = derive_constants(&rates, &init);
        let t_end = 5.0 * dc.t2_standard.unwrap();
        let grid: Vec<f64> = (1..=50).map(|i| t_end * i as f64 / 50.0).collect();
        let opts = IntegrateOptions::default();
        let full = integrate_full(&rates, &init, t_end, &opts, Some(&grid)).unwrap();
        let red = integrate_reduced(&rates, &init, t_end, &opts, Some(&grid)).unwrap();
        for i in 0..full.len() {
            assert_relative_eq!(
                full.states[i].s,
                red.states[i].s,
                max_relative = 1e-9,
                epsilon = 1e-9 * dc.a1
            );
            assert!((full.states[i].c - red.states[i].c).abs() <= 1e-9 * dc.a1);
        }
    }
}
