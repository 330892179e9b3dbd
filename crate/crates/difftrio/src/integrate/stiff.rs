//! Variable-step BDF2 integrator with Newton iteration and a numeric
//! Jacobian, for the stiff coefficient systems produced by the nonlinear
//! spectral reduction. A-stable, second order; error is estimated from the
//! distance between the corrector and a polynomial predictor.

use super::{check_output_times, error_norm, linalg::Lu, OdeSystem, OutputCollector, ToleranceSpec, Trajectory};
use crate::error::{Error, Result};

/// How the Newton matrix is formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum JacobianPolicy {
    /// Forward-difference Jacobian, refreshed when convergence degrades.
    #[default]
    Numeric,
    /// No Jacobian: damped fixed-point iteration (non-stiff use only).
    None,
}

const NEWTON_MAX_ITER: usize = 8;
const NEWTON_TOL: f64 = 0.03; // in units of the step tolerance
const MAX_GROWTH: f64 = 3.0;
const MIN_SHRINK: f64 = 0.1;

struct History {
    /// (t, y) of up to three most recent accepted points, newest last.
    entries: Vec<(f64, Vec<f64>)>,
}

impl History {
    fn push(&mut self, t: f64, y: Vec<f64>) {
        self.entries.push((t, y));
        if self.entries.len() > 3 {
            self.entries.remove(0);
        }
    }

    fn newest(&self) -> &(f64, Vec<f64>) {
        self.entries.last().unwrap()
    }
}

/// Integrate a (potentially stiff) system over `[t0, t1]`, sampling
/// `output_times` by linear interpolation between accepted steps.
pub fn integrate_stiff<S: OdeSystem>(
    sys: &mut S,
    t0: f64,
    t1: f64,
    state0: &[f64],
    tol: &ToleranceSpec,
    output_times: &[f64],
) -> Result<Trajectory> {
    integrate_stiff_with(sys, t0, t1, state0, tol, output_times, JacobianPolicy::Numeric)
}

pub fn integrate_stiff_with<S: OdeSystem>(
    sys: &mut S,
    t0: f64,
    t1: f64,
    state0: &[f64],
    tol: &ToleranceSpec,
    output_times: &[f64],
    jacobian: JacobianPolicy,
) -> Result<Trajectory> {
    tol.validate()?;
    check_output_times(t0, t1, output_times)?;
    let dim = sys.dim();
    let span = t1 - t0;
    let h_floor = 1e-14 * span;
    let h_max = tol.max_step.unwrap_or(span).min(span);

    let mut rhs_evals = 0usize;
    let mut f0 = vec![0.0; dim];
    sys.rhs(t0, state0, &mut f0)?;
    rhs_evals += 1;

    let mut h = match tol.initial_step {
        Some(h0) if h0 > 0.0 => h0,
        _ => {
            let fn_norm = error_norm(&f0, state0, state0, tol.abs_tol, tol.rel_tol);
            (0.01 / fn_norm.max(1e-8)).min(span / 100.0).max(h_floor * 10.0)
        }
    }
    .min(h_max);

    let mut out = OutputCollector::new(output_times, dim);
    out.push_exact(t0, state0);

    let mut hist = History {
        entries: vec![(t0, state0.to_vec())],
    };
    let mut steps = 0usize;
    let mut jac: Option<(Lu, f64)> = None; // factored I - c h J, and the c*h it was built at

    let mut scratch_pred = vec![0.0; dim];
    let mut scratch_psi = vec![0.0; dim];

    let mut t = t0;
    while t < t1 {
        h = h.min(t1 - t);
        if h < h_floor {
            return Err(Error::StepUnderflow { t });
        }
        let t_new = t + h;

        // BDF coefficients: first step falls back to backward Euler.
        let (beta, have_two) = if hist.entries.len() >= 2 {
            let (t_nm1, _) = hist.entries[hist.entries.len() - 2];
            let h_prev = t - t_nm1;
            let rho = h / h_prev;
            ((1.0 + rho) / (1.0 + 2.0 * rho), true)
        } else {
            (1.0, false)
        };
        // psi collects the history part of the BDF formula, written in
        // difference form so a constant state passes through exactly.
        {
            let yn = &hist.newest().1;
            if have_two {
                let (t_nm1, y_nm1) = &hist.entries[hist.entries.len() - 2];
                let rho = h / (t - t_nm1);
                let a1 = -rho * rho / (1.0 + 2.0 * rho);
                for i in 0..dim {
                    scratch_psi[i] = yn[i] + a1 * (y_nm1[i] - yn[i]);
                }
            } else {
                scratch_psi.copy_from_slice(yn);
            }
        }

        // predictor: polynomial extrapolation of the history to t_new
        predict(&hist, t_new, &mut scratch_pred);

        // Newton solve for y_new: y - beta h f(t_new, y) - psi = 0
        let mut y_new = scratch_pred.clone();
        let converged = newton_solve(
            sys,
            t_new,
            beta * h,
            &scratch_psi,
            &mut y_new,
            tol,
            &mut jac,
            jacobian,
            &mut rhs_evals,
        )?;
        if !converged {
            jac = None; // force a fresh Jacobian after shrinking
            h *= 0.3;
            if h < h_floor {
                return Err(Error::StiffSolve { t });
            }
            continue;
        }

        // error estimate from the corrector-predictor distance; the first
        // couple of steps use a crude (over-conservative) scale
        let order_scale = if hist.entries.len() >= 3 { 1.0 / 3.0 } else { 0.5 };
        let mut err_vec = vec![0.0; dim];
        for i in 0..dim {
            err_vec[i] = (y_new[i] - scratch_pred[i]) * order_scale;
        }
        let err = error_norm(&err_vec, &hist.newest().1, &y_new, tol.abs_tol, tol.rel_tol);

        if !err.is_finite() {
            jac = None;
            h *= 0.1;
            continue;
        }

        if err <= 1.0 {
            steps += 1;
            // sample pending outputs; quadratic through the last three points
            // keeps the interpolation error at the order of the step error
            {
                let e = &hist.entries;
                if e.len() >= 2 {
                    let (ta, ya) = &e[e.len() - 2];
                    let (tb, yb) = &e[e.len() - 1];
                    out.collect_dense(t_new, |tq, buf| {
                        let la = (tq - tb) * (tq - t_new) / ((ta - tb) * (ta - t_new));
                        let lb = (tq - ta) * (tq - t_new) / ((tb - ta) * (tb - t_new));
                        for i in 0..buf.len() {
                            buf[i] = y_new[i]
                                + la * (ya[i] - y_new[i])
                                + lb * (yb[i] - y_new[i]);
                        }
                    });
                } else {
                    out.collect_linear(t, &hist.newest().1, t_new, &y_new);
                }
            }
            hist.push(t_new, y_new);
            t = t_new;
            let exponent = if hist.entries.len() >= 3 { 1.0 / 3.0 } else { 0.5 };
            let fac = (0.9 / err.max(1e-10).powf(exponent)).clamp(MIN_SHRINK, MAX_GROWTH);
            let h_new = (h * fac).min(h_max);
            if (h_new - h).abs() > 0.2 * h {
                jac = None; // step changed enough to invalidate the iteration matrix
            }
            h = h_new;
        } else {
            let exponent = if hist.entries.len() >= 3 { 1.0 / 3.0 } else { 0.5 };
            let fac = (0.9 / err.powf(exponent)).clamp(MIN_SHRINK, 0.9);
            h *= fac;
            jac = None;
        }
    }

    let (t_end, y_end) = hist.newest();
    out.finish_with(*t_end, y_end);
    Ok(Trajectory {
        times: output_times.to_vec(),
        states: out.into_states(),
        dim,
        steps,
        rhs_evals,
    })
}

fn predict(hist: &History, t_new: f64, out: &mut [f64]) {
    let e = &hist.entries;
    match e.len() {
        1 => out.copy_from_slice(&e[0].1),
        2 => {
            // linear extrapolation
            let (t0, y0) = &e[0];
            let (t1, y1) = &e[1];
            let w = (t_new - t1) / (t1 - t0);
            for i in 0..out.len() {
                out[i] = y1[i] + w * (y1[i] - y0[i]);
            }
        }
        _ => {
            // quadratic Lagrange extrapolation through the last three points,
            // in difference form (exact for constant states)
            let (ta, ya) = &e[e.len() - 3];
            let (tb, yb) = &e[e.len() - 2];
            let (tc, yc) = &e[e.len() - 1];
            let la = (t_new - tb) * (t_new - tc) / ((ta - tb) * (ta - tc));
            let lb = (t_new - ta) * (t_new - tc) / ((tb - ta) * (tb - tc));
            for i in 0..out.len() {
                out[i] = yc[i] + la * (ya[i] - yc[i]) + lb * (yb[i] - yc[i]);
            }
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn newton_solve<S: OdeSystem>(
    sys: &mut S,
    t_new: f64,
    beta_h: f64,
    psi: &[f64],
    y: &mut [f64],
    tol: &ToleranceSpec,
    jac: &mut Option<(Lu, f64)>,
    policy: JacobianPolicy,
    rhs_evals: &mut usize,
) -> Result<bool> {
    let dim = y.len();
    let mut f = vec![0.0; dim];
    let mut g = vec![0.0; dim];
    let mut delta = vec![0.0; dim];
    let mut last_norm = f64::INFINITY;

    for iter in 0..NEWTON_MAX_ITER {
        // a trial iterate outside the admissible range means the step was
        // too ambitious, not that the problem is ill-posed
        match sys.rhs(t_new, y, &mut f) {
            Ok(()) => {}
            Err(Error::ConstitutiveRange(_)) => return Ok(false),
            Err(e) => return Err(e),
        }
        *rhs_evals += 1;
        for i in 0..dim {
            g[i] = y[i] - beta_h * f[i] - psi[i];
            if !g[i].is_finite() {
                return Ok(false);
            }
        }
        match policy {
            JacobianPolicy::Numeric => {
                if jac.is_none() || (jac.as_ref().unwrap().1 - beta_h).abs() > 1e-12 * beta_h {
                    *jac = Some((
                        factor_iteration_matrix(sys, t_new, y, &f, beta_h, rhs_evals)?,
                        beta_h,
                    ));
                }
                jac.as_ref().unwrap().0.solve(&g, &mut delta);
            }
            JacobianPolicy::None => {
                // damped fixed-point: y <- y - g
                delta.copy_from_slice(&g);
            }
        }
        for i in 0..dim {
            y[i] -= delta[i];
        }
        let norm = error_norm(&delta, y, y, tol.abs_tol, tol.rel_tol);
        if norm <= NEWTON_TOL {
            return Ok(true);
        }
        if iter > 1 && norm > 0.9 * last_norm {
            // diverging or stalled; trigger a retry with a fresh matrix/step
            return Ok(false);
        }
        last_norm = norm;
    }
    Ok(false)
}

fn factor_iteration_matrix<S: OdeSystem>(
    sys: &mut S,
    t: f64,
    y: &[f64],
    f_at_y: &[f64],
    beta_h: f64,
    rhs_evals: &mut usize,
) -> Result<Lu> {
    let dim = y.len();
    let mut m = vec![0.0; dim * dim];
    let mut y_pert = y.to_vec();
    let mut f_pert = vec![0.0; dim];
    for j in 0..dim {
        let dy = 1e-8 * y[j].abs().max(1e-5);
        y_pert[j] = y[j] + dy;
        match sys.rhs(t, &y_pert, &mut f_pert) {
            Ok(()) => {}
            // fall back to a one-sided zero column; Newton will either cope
            // or reject the step
            Err(Error::ConstitutiveRange(_)) => {
                y_pert[j] = y[j];
                f_pert.copy_from_slice(f_at_y);
            }
            Err(e) => return Err(e),
        }
        *rhs_evals += 1;
        y_pert[j] = y[j];
        for i in 0..dim {
            m[i * dim + j] = -beta_h * (f_pert[i] - f_at_y[i]) / dy;
        }
    }
    for i in 0..dim {
        m[i * dim + i] += 1.0;
    }
    Lu::factor(m, dim)
}
