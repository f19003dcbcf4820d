//! Scenario execution: each command resolves a configuration, runs the
//! corresponding library operations and emits machine-readable files
//! into the output directory.

use crate::config::{enzyme_constants, sample_grid, ConfigError, EnzymeSpec, ScenarioConfig};
use crate::output::{write_csv, write_json};
use qssa_core::asymptotics::{
    blend, rqssa_free, rqssa_total, squssa_free, squssa_total_variant, ApproxFamily, Evaluate,
    TotalLayerVariant,
};
use qssa_core::kinetics::{classify_regime, DerivedConstants, KineticsError, Regime, RegimeKind};
use qssa_core::ode::{integrate_full, IntegrateOptions, OdeError};
use qssa_core::scaling::{
    sc_bounded_system, scale_system, sir_bounded_system, ScalingError, ScalingReport,
};
use qssa_core::stability::{dulac_divergence, eigenvalues_at_origin};
use serde::Serialize;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Kinetics(#[from] KineticsError),
    #[error(transparent)]
    Ode(#[from] OdeError),
    #[error(transparent)]
    Scaling(#[from] ScalingError),
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("scenario classifies as {classified} but {requested} was requested (use --force to override)")]
    RegimeMismatch {
        requested: RegimeKind,
        classified: RegimeKind,
    },
    #[error("epsilon = {epsilon} is intermediate between the thresholds; pass --force with an explicit --regime to evaluate anyway")]
    IntermediateRegime { epsilon: f64 },
    #[error("--force in the intermediate regime requires an explicit --regime")]
    ForceRequiresRegime,
    #[error("this command needs an enzyme scenario (rates.* and init.* keys)")]
    NotEnzyme,
    #[error("stability analysis requires a1 > 0 and a2 > 0")]
    DegenerateStability,
}

/// Requested regime on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegimeArg {
    Standard,
    Reverse,
}

impl RegimeArg {
    fn kind(self) -> RegimeKind {
        match self {
            RegimeArg::Standard => RegimeKind::StandardQssa,
            RegimeArg::Reverse => RegimeKind::ReverseQssa,
        }
    }
}

/// Requested dependent-variable approach.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ApproachArg {
    Free,
    Total,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_owned(),
        source,
    }
}

fn integrate_options(cfg: &ScenarioConfig) -> IntegrateOptions {
    IntegrateOptions {
        rel_tol: cfg.rel_tol.unwrap_or(qssa_core::ode::DEFAULT_REL_TOL),
        abs_tol: cfg.abs_tol,
        ..Default::default()
    }
}

/// Fastest defined time scale of the system; lower anchor of the
/// logarithmic output grid, independent of any assumed regime.
fn fastest_t1(dc: &DerivedConstants) -> f64 {
    dc.t1_reverse
        .map_or(dc.t1_standard, |t| t.min(dc.t1_standard))
}

#[derive(Serialize)]
struct MetaJson {
    regime: Option<RegimeKind>,
    epsilon: f64,
    eta: Option<f64>,
    sigma: f64,
    rho: f64,
    k_dis: f64,
    k_vsc: f64,
    k_m: f64,
    a1: f64,
    a2: f64,
    a3: f64,
    a4: f64,
    /// Fast/slow pair of the (classified) regime.
    t1: f64,
    t2: Option<f64>,
    t1_standard: f64,
    t2_standard: Option<f64>,
    t1_reverse: Option<f64>,
    t2_reverse: f64,
    t_end: f64,
    eps_lo: f64,
    eps_hi: f64,
    rel_tol: f64,
    abs_tol: Option<f64>,
    accepted_steps: usize,
    rejected_steps: usize,
    max_conservation_residual: Option<f64>,
}

/// Integrate the full system and write `trajectory.csv` plus
/// `meta.json`.
pub fn cmd_simulate(cfg: &ScenarioConfig, out_dir: &Path) -> Result<(), CliError> {
    let enzyme: &EnzymeSpec = cfg.enzyme.as_ref().ok_or(CliError::NotEnzyme)?;
    let dc = enzyme_constants(enzyme);
    let regime = classify_regime(&dc, cfg.eps_lo, cfg.eps_hi).ok();
    let kind = regime.map_or(RegimeKind::StandardQssa, |r| r.kind);
    let t_end = cfg.resolve_t_end(&dc, kind)?;
    let grid = sample_grid(&cfg.grid, fastest_t1(&dc), t_end)?;
    let opts = integrate_options(cfg);
    let traj = integrate_full(&enzyme.rates, &enzyme.init, t_end, &opts, Some(&grid))?;

    let rows: Vec<Vec<f64>> = traj
        .times
        .iter()
        .zip(&traj.states)
        .map(|(&t, st)| vec![t, st.s, st.e, st.c, st.p])
        .collect();
    let csv_path = out_dir.join("trajectory.csv");
    write_csv(&csv_path, "t,S,E,C,P", &rows).map_err(io_err(&csv_path))?;

    let (t1, t2) = match kind {
        RegimeKind::ReverseQssa => (dc.t1_reverse.unwrap_or(dc.t1_standard), Some(dc.t2_reverse)),
        _ => (dc.t1_standard, dc.t2_standard),
    };
    let meta = MetaJson {
        regime: regime.map(|r| r.kind),
        epsilon: dc.epsilon,
        eta: dc.eta,
        sigma: dc.sigma,
        rho: dc.rho,
        k_dis: dc.k_dis,
        k_vsc: dc.k_vsc,
        k_m: dc.k_m,
        a1: dc.a1,
        a2: dc.a2,
        a3: dc.a3,
        a4: dc.a4,
        t1,
        t2,
        t1_standard: dc.t1_standard,
        t2_standard: dc.t2_standard,
        t1_reverse: dc.t1_reverse,
        t2_reverse: dc.t2_reverse,
        t_end,
        eps_lo: cfg.eps_lo,
        eps_hi: cfg.eps_hi,
        rel_tol: opts.rel_tol,
        abs_tol: opts.abs_tol,
        accepted_steps: traj.stats.accepted_steps,
        rejected_steps: traj.stats.rejected_steps,
        max_conservation_residual: traj.stats.max_conservation_residual,
    };
    let meta_path = out_dir.join("meta.json");
    write_json(&meta_path, &meta).map_err(io_err(&meta_path))?;
    Ok(())
}

fn effective_regime(
    classified: &Regime,
    requested: Option<RegimeArg>,
    force: bool,
) -> Result<RegimeArg, CliError> {
    match requested {
        Some(arg) => {
            if arg.kind() == classified.kind || force {
                Ok(arg)
            } else {
                Err(CliError::RegimeMismatch {
                    requested: arg.kind(),
                    classified: classified.kind,
                })
            }
        }
        None => match classified.kind {
            RegimeKind::StandardQssa => Ok(RegimeArg::Standard),
            RegimeKind::ReverseQssa => Ok(RegimeArg::Reverse),
            RegimeKind::Intermediate => {
                if force {
                    Err(CliError::ForceRequiresRegime)
                } else {
                    Err(CliError::IntermediateRegime {
                        epsilon: classified.epsilon,
                    })
                }
            }
        },
    }
}

fn family_for(
    regime: RegimeArg,
    approach: ApproachArg,
    enzyme: &EnzymeSpec,
    dc: &DerivedConstants,
) -> ApproxFamily {
    match (regime, approach) {
        (RegimeArg::Standard, ApproachArg::Free) => squssa_free(&enzyme.rates, dc, &enzyme.init),
        (RegimeArg::Standard, ApproachArg::Total) => squssa_total_variant(
            &enzyme.rates,
            dc,
            &enzyme.init,
            TotalLayerVariant::AsPrinted,
        ),
        (RegimeArg::Reverse, ApproachArg::Free) => rqssa_free(&enzyme.rates, dc, &enzyme.init),
        (RegimeArg::Reverse, ApproachArg::Total) => rqssa_total(&enzyme.rates, dc, &enzyme.init),
    }
}

/// Evaluate the inner/outer/uniform triple on the output grid and write
/// `approx.csv`.
pub fn cmd_approx(
    cfg: &ScenarioConfig,
    out_dir: &Path,
    requested: Option<RegimeArg>,
    approach: ApproachArg,
    force: bool,
) -> Result<(), CliError> {
    let enzyme = cfg.enzyme.as_ref().ok_or(CliError::NotEnzyme)?;
    let dc = enzyme_constants(enzyme);
    let classified = classify_regime(&dc, cfg.eps_lo, cfg.eps_hi)?;
    let regime = effective_regime(&classified, requested, force)?;
    let kind = regime.kind();
    let t_end = cfg.resolve_t_end(&dc, kind)?;
    let grid = sample_grid(&cfg.grid, fastest_t1(&dc), t_end)?;
    let family = family_for(regime, approach, enzyme, &dc);

    let mut rows = Vec::with_capacity(grid.len() + 1);
    for &t in std::iter::once(&0.0).chain(grid.iter()) {
        let (xi, ci) = family.inner.eval(t);
        let (xo, co) = family.outer.eval(t);
        let (xu, cu) = family.uniform.eval(t);
        rows.push(vec![t, xi, ci, xo, co, xu, cu]);
    }
    let header = match approach {
        ApproachArg::Free => "t,S_in,C_in,S_out,C_out,S_un,C_un",
        ApproachArg::Total => "t,T_in,C_in,T_out,C_out,T_un,C_un",
    };
    let path = out_dir.join("approx.csv");
    write_csv(&path, header, &rows).map_err(io_err(&path))?;
    Ok(())
}

#[derive(Serialize)]
struct Norms {
    sup: f64,
    l2: f64,
}

#[derive(Serialize)]
struct PairNorms {
    s: Norms,
    c: Norms,
}

#[derive(Serialize)]
struct FamilyErrors {
    /// Boundary between the layer window and the slow window (5 t1).
    window_split: f64,
    inner: PairNorms,
    outer: PairNorms,
    uniform: PairNorms,
}

#[derive(Serialize)]
struct UniformErrors {
    uniform: PairNorms,
}

#[derive(Serialize)]
struct ErrorReportJson {
    epsilon: f64,
    eta: Option<f64>,
    a1: f64,
    a4: f64,
    t_end: f64,
    /// All norms are normalized by `a1`.
    normalization: &'static str,
    standard_free: FamilyErrors,
    reverse_free: FamilyErrors,
    standard_total_printed: UniformErrors,
    standard_total_inner_consistent: UniformErrors,
    reverse_total: UniformErrors,
    blend: UniformErrors,
}

struct OracleSamples<'a> {
    times: &'a [f64],
    /// Reference values for (free substrate, total substrate, complex).
    s: Vec<f64>,
    total: Vec<f64>,
    c: Vec<f64>,
    a1: f64,
}

impl OracleSamples<'_> {
    fn norms(&self, curve: &impl Evaluate, against_total: bool, window: (f64, f64)) -> PairNorms {
        let mut sup_x = 0.0_f64;
        let mut sup_c = 0.0_f64;
        let mut sum_x = 0.0_f64;
        let mut sum_c = 0.0_f64;
        let mut n = 0usize;
        for (i, &t) in self.times.iter().enumerate() {
            if t < window.0 || t > window.1 {
                continue;
            }
            let reference = if against_total {
                self.total[i]
            } else {
                self.s[i]
            };
            let (x, c) = curve.eval(t);
            let dx = (x - reference).abs();
            let dcv = (c - self.c[i]).abs();
            sup_x = sup_x.max(dx);
            sup_c = sup_c.max(dcv);
            sum_x += dx * dx;
            sum_c += dcv * dcv;
            n += 1;
        }
        let n = n.max(1) as f64;
        PairNorms {
            s: Norms {
                sup: sup_x / self.a1,
                l2: (sum_x / n).sqrt() / self.a1,
            },
            c: Norms {
                sup: sup_c / self.a1,
                l2: (sum_c / n).sqrt() / self.a1,
            },
        }
    }

    fn family_errors(
        &self,
        family: &ApproxFamily,
        against_total: bool,
        t1: f64,
        t_end: f64,
    ) -> FamilyErrors {
        let split = 5.0 * t1;
        FamilyErrors {
            window_split: split,
            inner: self.norms(&family.inner, against_total, (0.0, split)),
            outer: self.norms(&family.outer, against_total, (split, t_end)),
            uniform: self.norms(&family.uniform, against_total, (0.0, t_end)),
        }
    }
}

/// Run the oracle and all applicable closed forms, write `errors.json`.
pub fn cmd_compare(cfg: &ScenarioConfig, out_dir: &Path) -> Result<(), CliError> {
    let enzyme = cfg.enzyme.as_ref().ok_or(CliError::NotEnzyme)?;
    let dc = enzyme_constants(enzyme);
    let classified = classify_regime(&dc, cfg.eps_lo, cfg.eps_hi)?;
    let t_end = cfg.resolve_t_end(&dc, classified.kind)?;
    let grid = sample_grid(&cfg.grid, fastest_t1(&dc), t_end)?;
    let opts = integrate_options(cfg);
    let traj = integrate_full(&enzyme.rates, &enzyme.init, t_end, &opts, Some(&grid))?;
    let oracle = OracleSamples {
        times: &traj.times,
        s: traj.states.iter().map(|st| st.s).collect(),
        total: traj.states.iter().map(|st| st.s + st.c).collect(),
        c: traj.states.iter().map(|st| st.c).collect(),
        a1: dc.a1,
    };

    let std_free = squssa_free(&enzyme.rates, &dc, &enzyme.init);
    let rev_free = rqssa_free(&enzyme.rates, &dc, &enzyme.init);
    let std_total_printed = squssa_total_variant(
        &enzyme.rates,
        &dc,
        &enzyme.init,
        TotalLayerVariant::AsPrinted,
    );
    let std_total_consistent = squssa_total_variant(
        &enzyme.rates,
        &dc,
        &enzyme.init,
        TotalLayerVariant::InnerConsistent,
    );
    let rev_total = rqssa_total(&enzyme.rates, &dc, &enzyme.init);
    let blended = blend(dc.epsilon, &std_free.uniform, &rev_free.uniform)
        .expect("uniform curves from one scenario");

    let report = ErrorReportJson {
        epsilon: dc.epsilon,
        eta: dc.eta,
        a1: dc.a1,
        a4: dc.a4,
        t_end,
        normalization: "a1",
        standard_free: oracle.family_errors(&std_free, false, dc.t1_standard, t_end),
        reverse_free: oracle.family_errors(
            &rev_free,
            false,
            dc.t1_reverse.unwrap_or(dc.t1_standard),
            t_end,
        ),
        standard_total_printed: UniformErrors {
            uniform: oracle.norms(&std_total_printed.uniform, true, (0.0, t_end)),
        },
        standard_total_inner_consistent: UniformErrors {
            uniform: oracle.norms(&std_total_consistent.uniform, true, (0.0, t_end)),
        },
        reverse_total: UniformErrors {
            uniform: oracle.norms(&rev_total.uniform, true, (0.0, t_end)),
        },
        blend: UniformErrors {
            uniform: oracle.norms(&blended, false, (0.0, t_end)),
        },
    };
    let path = out_dir.join("errors.json");
    write_json(&path, &report).map_err(io_err(&path))?;
    Ok(())
}

#[derive(Serialize)]
struct ScalingJson {
    system: &'static str,
    epsilon: Option<f64>,
    eta: Option<f64>,
    #[serde(flatten)]
    report: ScalingReport,
    /// Union of the per-choice dimensionless groups.
    groups: Vec<f64>,
}

/// Nondimensionalize the scenario's system and write `scaling.json`.
pub fn cmd_scale(cfg: &ScenarioConfig, out_dir: &Path) -> Result<(), CliError> {
    let (system, report, epsilon, eta) = if let Some(sir) = &cfg.sir {
        let sys = sir_bounded_system(sir.beta, sir.gamma, sir.n0)?;
        ("sir", scale_system(&sys)?, None, None)
    } else {
        let enzyme = cfg.enzyme.as_ref().ok_or(CliError::NotEnzyme)?;
        let dc = enzyme_constants(enzyme);
        let sys = sc_bounded_system(&enzyme.rates, &dc)?;
        (
            "substrate_complex",
            scale_system(&sys)?,
            Some(dc.epsilon),
            dc.eta,
        )
    };
    let mut groups: Vec<f64> = report
        .choices
        .iter()
        .flat_map(|c| c.groups.iter().copied())
        .collect();
    groups.sort_by(|a, b| a.partial_cmp(b).unwrap());
    groups.dedup_by(|a, b| (*a - *b).abs() <= 1e-9 * a.abs().max(b.abs()));
    let doc = ScalingJson {
        system,
        epsilon,
        eta,
        report,
        groups,
    };
    let path = out_dir.join("scaling.json");
    write_json(&path, &doc).map_err(io_err(&path))?;
    Ok(())
}

#[derive(Serialize)]
struct DulacSample {
    s: f64,
    c: f64,
    divergence: f64,
}

#[derive(Serialize)]
struct StabilityJson {
    lambda_plus: f64,
    lambda_minus: f64,
    dulac: Vec<DulacSample>,
}

/// Eigenvalues at the origin plus a Dulac divergence sample grid,
/// written to `stability.json`.
pub fn cmd_stability(cfg: &ScenarioConfig, out_dir: &Path) -> Result<(), CliError> {
    let enzyme = cfg.enzyme.as_ref().ok_or(CliError::NotEnzyme)?;
    let dc = enzyme_constants(enzyme);
    if !(dc.a1 > 0.0 && dc.a2 > 0.0) {
        return Err(CliError::DegenerateStability);
    }
    let pair = eigenvalues_at_origin(&enzyme.rates, dc.a2);
    let mut dulac = Vec::with_capacity(25);
    for i in 1..=5 {
        for j in 1..=5 {
            let s = dc.a1 * i as f64 / 6.0;
            let c = dc.a4 * j as f64 / 6.0;
            let divergence =
                dulac_divergence(&qssa_core::ode::ReducedState { s, c }, &enzyme.rates, dc.a2)
                    .expect("interior grid point");
            dulac.push(DulacSample { s, c, divergence });
        }
    }
    let doc = StabilityJson {
        lambda_plus: pair.lambda_plus,
        lambda_minus: pair.lambda_minus,
        dulac,
    };
    let path = out_dir.join("stability.json");
    write_json(&path, &doc).map_err(io_err(&path))?;
    Ok(())
}
