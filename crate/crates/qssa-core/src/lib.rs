//! Quasi-steady-state analysis toolkit for the single-enzyme,
//! single-substrate reaction network
//!
//! ```text
//!          k1      k2
//!   S + E <=> C  ---> E + P
//!         k-1
//! ```
//!
//! The crate provides, for the mass-action model of this mechanism:
//!
//! * [`kinetics`] - domain types, derived constants (Michaelis constant,
//!   conserved totals, the regime parameter epsilon, characteristic time
//!   scales) and regime classification;
//! * [`ode`] - right-hand sides for the full four-species system and the
//!   reduced substrate/complex system, plus an adaptive embedded
//!   Runge-Kutta 5(4) integrator used as the ground-truth oracle;
//! * [`lambert`] - the principal branch of the Lambert W function on
//!   `[0, inf)`, the special function appearing in the slow-manifold
//!   closed forms;
//! * [`scaling`] - the three-step nondimensionalization procedure
//!   (bounded region, unit-interval variable scaling, time-scale
//!   gathering) as a reusable mechanism;
//! * [`asymptotics`] - closed-form inner, outer, uniform and blended
//!   approximations for the standard and reverse quasi-steady-state
//!   regimes, in both the free-substrate and total-substrate variables;
//! * [`stability`] - Jacobian, eigenvalues at the origin and the
//!   Bendixson-Dulac divergence certificate for the reduced system.
//!
//! All quantities are carried in SI-consistent units (molar for
//! concentrations, seconds for time). Every public type is an immutable
//! value; every operation is a pure function, so everything here is safe
//! to share and send across threads.

pub mod asymptotics;
pub mod kinetics;
pub mod lambert;
pub mod ode;
pub mod scaling;
pub mod stability;
