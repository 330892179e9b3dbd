//! Time-integration engines shared by the solvers: a fixed-step explicit
//! Euler, an adaptive embedded Runge-Kutta pair with dense output, and an
//! implicit variable-step integrator for stiff coefficient systems.

mod dopri;
mod linalg;
mod stiff;

pub use dopri::integrate_adaptive_rk;
pub use stiff::{integrate_stiff, JacobianPolicy};

use crate::error::{Error, Result};

/// Right-hand side of an explicit ODE system `dy/dt = f(t, y)`.
pub trait OdeSystem {
    fn dim(&self) -> usize;
    /// Write `f(t, y)` into `dydt`. May fail on constitutive-range violations.
    fn rhs(&mut self, t: f64, y: &[f64], dydt: &mut [f64]) -> Result<()>;
}

/// Wrap a closure as an [`OdeSystem`].
pub struct FnSystem<F> {
    dim: usize,
    f: F,
}

impl<F> FnSystem<F>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
{
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<F> OdeSystem for FnSystem<F>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn rhs(&mut self, t: f64, y: &[f64], dydt: &mut [f64]) -> Result<()> {
        (self.f)(t, y, dydt)
    }
}

/// Shorthand constructor for closure-backed systems.
pub fn system<F>(dim: usize, f: F) -> FnSystem<F>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
{
    FnSystem::new(dim, f)
}

/// Error-control settings for the adaptive integrators.
#[derive(Debug, Clone, Copy)]
pub struct ToleranceSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub initial_step: Option<f64>,
    pub max_step: Option<f64>,
}

impl Default for ToleranceSpec {
    fn default() -> Self {
        Self {
            abs_tol: 1e-4,
            rel_tol: 1e-4,
            initial_step: None,
            max_step: None,
        }
    }
}

impl ToleranceSpec {
    pub fn tight(abs_tol: f64, rel_tol: f64) -> Self {
        Self {
            abs_tol,
            rel_tol,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0) {
            return Err(Error::Config("tolerances must be positive".into()));
        }
        Ok(())
    }
}

/// States captured at the requested output instants, plus step statistics.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    /// Row-major: `states[ti * dim + i]`.
    pub states: Vec<f64>,
    pub dim: usize,
    pub steps: usize,
    pub rhs_evals: usize,
}

impl Trajectory {
    pub fn state(&self, ti: usize) -> &[f64] {
        &self.states[ti * self.dim..(ti + 1) * self.dim]
    }
}

pub(crate) fn check_output_times(t0: f64, t1: f64, output_times: &[f64]) -> Result<()> {
    if !(t0 < t1) {
        return Err(Error::Config(format!(
            "integration span [{t0}, {t1}] is empty"
        )));
    }
    let eps = 1e-9 * (t1 - t0);
    for &t in output_times {
        if t < t0 - eps || t > t1 + eps {
            return Err(Error::Config(format!(
                "output time {t} outside the integration span [{t0}, {t1}]"
            )));
        }
    }
    if !output_times.windows(2).all(|w| w[1] > w[0]) {
        return Err(Error::Config("output times must be increasing".into()));
    }
    Ok(())
}

/// One explicit Euler step: `state + dt * f(t, state)`.
pub fn step_euler_explicit<S: OdeSystem>(
    sys: &mut S,
    t: f64,
    state: &[f64],
    dt: f64,
) -> Result<Vec<f64>> {
    if !(dt > 0.0) {
        return Err(Error::Config("Euler step requires dt > 0".into()));
    }
    let mut out = vec![0.0; state.len()];
    euler_step_into(sys, t, state, dt, &mut out)?;
    Ok(out)
}

pub(crate) fn euler_step_into<S: OdeSystem>(
    sys: &mut S,
    t: f64,
    state: &[f64],
    dt: f64,
    out: &mut [f64],
) -> Result<()> {
    sys.rhs(t, state, out)?;
    for (o, &s) in out.iter_mut().zip(state) {
        *o = s + dt * *o;
        if !o.is_finite() {
            return Err(Error::Integration {
                t,
                reason: "non-finite state after explicit Euler step".into(),
            });
        }
    }
    Ok(())
}

/// Fixed-step explicit Euler over `[t0, t1]`, sampling `output_times` by
/// linear interpolation between consecutive steps.
pub fn integrate_euler_fixed<S: OdeSystem>(
    sys: &mut S,
    t0: f64,
    t1: f64,
    state0: &[f64],
    dt: f64,
    output_times: &[f64],
) -> Result<Trajectory> {
    check_output_times(t0, t1, output_times)?;
    if !(dt > 0.0) {
        return Err(Error::Config("Euler integration requires dt > 0".into()));
    }
    let dim = sys.dim();
    let mut y = state0.to_vec();
    let mut y_next = vec![0.0; dim];
    let mut t = t0;
    let mut out = OutputCollector::new(output_times, dim);
    out.push_exact(t0, &y);

    let mut steps = 0usize;
    while t < t1 {
        let h = dt.min(t1 - t);
        euler_step_into(sys, t, &y, h, &mut y_next)?;
        let t_next = t + h;
        out.collect_linear(t, &y, t_next, &y_next);
        std::mem::swap(&mut y, &mut y_next);
        t = t_next;
        steps += 1;
    }
    out.finish_with(t1, &y);
    Ok(Trajectory {
        times: output_times.to_vec(),
        states: out.into_states(),
        dim,
        steps,
        rhs_evals: steps,
    })
}

/// Streams interpolated states at fixed output instants while an integrator
/// marches; avoids retaining the full step-resolution history.
pub(crate) struct OutputCollector<'a> {
    times: &'a [f64],
    next: usize,
    dim: usize,
    states: Vec<f64>,
}

impl<'a> OutputCollector<'a> {
    pub fn new(times: &'a [f64], dim: usize) -> Self {
        Self {
            times,
            next: 0,
            dim,
            states: Vec::with_capacity(times.len() * dim),
        }
    }

    /// Record the initial state for any leading output instants equal to `t0`.
    pub fn push_exact(&mut self, t0: f64, y: &[f64]) {
        while self.next < self.times.len() && self.times[self.next] <= t0 + 1e-14 * t0.abs() {
            self.states.extend_from_slice(y);
            self.next += 1;
        }
    }

    /// Emit all pending outputs inside `(t_prev, t_new]` by linear interpolation.
    pub fn collect_linear(&mut self, t_prev: f64, y_prev: &[f64], t_new: f64, y_new: &[f64]) {
        while self.next < self.times.len() && self.times[self.next] <= t_new {
            let t = self.times[self.next];
            let w = if t_new > t_prev {
                (t - t_prev) / (t_new - t_prev)
            } else {
                1.0
            };
            for i in 0..self.dim {
                self.states.push(y_prev[i] + w * (y_new[i] - y_prev[i]));
            }
            self.next += 1;
        }
    }

    /// Emit all pending outputs via a caller-supplied dense evaluation.
    pub fn collect_dense(&mut self, t_new: f64, mut eval: impl FnMut(f64, &mut [f64])) {
        let mut buf = vec![0.0; self.dim];
        while self.next < self.times.len() && self.times[self.next] <= t_new + 1e-14 * t_new.abs()
        {
            eval(self.times[self.next], &mut buf);
            self.states.extend_from_slice(&buf);
            self.next += 1;
        }
    }

    /// Flush any trailing outputs (equal to the final time up to rounding).
    pub fn finish_with(&mut self, t_end: f64, y_end: &[f64]) {
        while self.next < self.times.len() {
            debug_assert!(self.times[self.next] >= t_end - 1e-9 * t_end.abs().max(1.0));
            self.states.extend_from_slice(y_end);
            self.next += 1;
        }
    }

    pub fn into_states(self) -> Vec<f64> {
        self.states
    }
}

/// Scaled RMS norm used for error control.
pub(crate) fn error_norm(err: &[f64], y0: &[f64], y1: &[f64], abs_tol: f64, rel_tol: f64) -> f64 {
    let mut acc = 0.0;
    for i in 0..err.len() {
        let sk = abs_tol + rel_tol * y0[i].abs().max(y1[i].abs());
        let e = err[i] / sk;
        acc += e * e;
    }
    (acc / err.len().max(1) as f64).sqrt()
}
