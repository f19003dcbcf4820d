//! Embedded Dormand-Prince 5(4) stepper with PI (Lund) step-size
//! control and first-same-as-last stage reuse.
//!
//! The driver steps exactly onto requested output times by truncating
//! the controlled step, so sampled values carry no interpolation error.

/// Butcher tableau, classic DOPRI5 coefficients.
const A2: [f64; 1] = [1.0 / 5.0];
const A3: [f64; 2] = [3.0 / 40.0, 9.0 / 40.0];
const A4: [f64; 3] = [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0];
const A5: [f64; 4] = [
    19372.0 / 6561.0,
    -25360.0 / 2187.0,
    64448.0 / 6561.0,
    -212.0 / 729.0,
];
const A6: [f64; 5] = [
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
];
const A7: [f64; 6] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
];
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
/// Difference between the 5th- and 4th-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

const SAFETY: f64 = 0.9;
const BETA: f64 = 0.04;
const EXPO1: f64 = 0.2 - BETA * 0.75;
/// Step-size change limits per accepted step: shrink by at most 1/5,
/// grow by at most 10.
const FAC_MAX_SHRINK: f64 = 5.0;
const FAC_MAX_GROW: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SolverError {
    /// Error control drove the step size below the resolvable floor.
    StepSizeUnderflow { t: f64 },
    /// Step budget exhausted before reaching the end time.
    StepLimit { t: f64, max_steps: usize },
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Stats {
    pub accepted: usize,
    pub rejected: usize,
}

pub struct Options {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub initial_step: f64,
    pub max_step: f64,
    pub max_steps: usize,
}

/// Integrate `y' = rhs(t, y)` from `(0, y0)` to `t_end`.
///
/// With `grid = None`, `on_sample` fires at `t = 0` and at every
/// accepted step. With `grid = Some(ts)` (strictly increasing times in
/// `(0, t_end]`), it fires at `t = 0` and exactly at the grid times.
pub fn solve<const N: usize>(
    mut rhs: impl FnMut(f64, &[f64; N]) -> [f64; N],
    y0: [f64; N],
    t_end: f64,
    opts: &Options,
    grid: Option<&[f64]>,
    mut on_sample: impl FnMut(f64, &[f64; N]),
) -> Result<Stats, SolverError> {
    debug_assert!(t_end > 0.0);
    let mut t = 0.0_f64;
    let mut y = y0;
    let mut k1 = rhs(t, &y);
    let mut stats = Stats::default();
    on_sample(t, &y);

    let mut grid_idx = 0usize;
    let next_target = |grid_idx: usize| -> f64 {
        match grid {
            Some(ts) if grid_idx < ts.len() => ts[grid_idx],
            _ => t_end,
        }
    };

    let h_floor = 4.0 * f64::EPSILON * t_end;
    let mut h = opts
        .initial_step
        .min(opts.max_step)
        .min(t_end)
        .max(8.0 * h_floor);
    let mut facold = 1e-4_f64;

    while t < t_end {
        if stats.accepted + stats.rejected >= opts.max_steps {
            return Err(SolverError::StepLimit {
                t,
                max_steps: opts.max_steps,
            });
        }
        if h < h_floor {
            return Err(SolverError::StepSizeUnderflow { t });
        }
        let target = next_target(grid_idx);
        // Truncate the controlled step to land exactly on the target.
        let mut h_step = h.min(opts.max_step);
        let mut hit_target = false;
        if t + h_step >= target - h_floor {
            h_step = target - t;
            hit_target = true;
        }

        let mut k = [[0.0_f64; N]; 7];
        k[0] = k1;
        stage(&mut rhs, t, &y, h_step, &mut k, 1, &A2);
        stage(&mut rhs, t, &y, h_step, &mut k, 2, &A3);
        stage(&mut rhs, t, &y, h_step, &mut k, 3, &A4);
        stage(&mut rhs, t, &y, h_step, &mut k, 4, &A5);
        stage(&mut rhs, t, &y, h_step, &mut k, 5, &A6);
        // Stage 7 state is the 5th-order solution (A7 equals the weights).
        let mut y5 = y;
        for i in 0..N {
            let mut acc = 0.0;
            for (j, a) in A7.iter().enumerate() {
                acc += a * k[j][i];
            }
            y5[i] = y[i] + h_step * acc;
        }
        let k7 = rhs(t + C[6] * h_step, &y5);
        k[6] = k7;

        // Weighted RMS of the embedded error estimate.
        let mut err_sq = 0.0;
        for i in 0..N {
            let mut e_acc = 0.0;
            for (j, e) in E.iter().enumerate() {
                e_acc += e * k[j][i];
            }
            let scale = opts.abs_tol + opts.rel_tol * y[i].abs().max(y5[i].abs());
            let ratio = h_step * e_acc / scale;
            err_sq += ratio * ratio;
        }
        let err = (err_sq / N as f64).sqrt();

        let fac11 = err.powf(EXPO1);
        if err <= 1.0 {
            stats.accepted += 1;
            let fac = (fac11 / facold.powf(BETA) / SAFETY)
                .max(FAC_MAX_GROW)
                .min(FAC_MAX_SHRINK);
            facold = err.max(1e-4);
            t = if hit_target { target } else { t + h_step };
            y = y5;
            k1 = k7;
            let emit = match grid {
                None => true,
                Some(ts) => hit_target && grid_idx < ts.len(),
            };
            if emit {
                on_sample(t, &y);
            }
            if hit_target && grid.is_some() && grid_idx < grid.map_or(0, |g| g.len()) {
                grid_idx += 1;
            }
            // Floor keeps an output-truncated step from starving the
            // controller; genuine stiffness still underflows via the
            // rejection path.
            h = (h_step / fac).min(opts.max_step).max(8.0 * h_floor);
        } else {
            stats.rejected += 1;
            let fac = (fac11 / SAFETY).min(FAC_MAX_SHRINK);
            h = h_step / fac;
        }
    }
    Ok(stats)
}

#[inline]
fn stage<const N: usize>(
    rhs: &mut impl FnMut(f64, &[f64; N]) -> [f64; N],
    t: f64,
    y: &[f64; N],
    h: f64,
    k: &mut [[f64; N]; 7],
    idx: usize,
    coeffs: &[f64],
) {
    let mut ys = *y;
    for i in 0..N {
        let mut acc = 0.0;
        for (j, a) in coeffs.iter().enumerate() {
            acc += a * k[j][i];
        }
        ys[i] = y[i] + h * acc;
    }
    k[idx] = rhs(t + C[idx] * h, &ys);
}
