//! Adaptive Dormand-Prince 5(4) integrator with PI step control and the
//! standard fourth-order dense-output polynomial.

use super::{check_output_times, error_norm, OdeSystem, OutputCollector, ToleranceSpec, Trajectory};
use crate::error::{Error, Result};

// Butcher tableau of the DOPRI5(4) pair (FSAL form).
const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];

const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];

// Difference between the 5th- and embedded 4th-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

// Weights of the continuous extension.
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

const SAFETY: f64 = 0.9;
const BETA: f64 = 0.04;
const EXPO1: f64 = 0.2 - BETA * 0.75;
const FAC_MIN: f64 = 0.2; // max shrink per step
const FAC_MAX: f64 = 10.0; // max growth per step

/// Dense-output coefficients of one accepted step.
struct DenseStep {
    t0: f64,
    h: f64,
    cont: [Vec<f64>; 5],
}

impl DenseStep {
    fn eval(&self, t: f64, out: &mut [f64]) {
        let s = (t - self.t0) / self.h;
        let s1 = 1.0 - s;
        for i in 0..out.len() {
            out[i] = self.cont[0][i]
                + s * (self.cont[1][i]
                    + s1 * (self.cont[2][i] + s * (self.cont[3][i] + s1 * self.cont[4][i])));
        }
    }
}

/// Integrate `sys` over `[t0, t1]` with the embedded 4(5) pair, returning
/// dense-output samples at `output_times`. Local error per step is held at
/// `abs_tol + rel_tol * |state|` by a PI controller; a step collapse below
/// `1e-14 * (t1 - t0)` is reported as stiffness failure.
pub fn integrate_adaptive_rk<S: OdeSystem>(
    sys: &mut S,
    t0: f64,
    t1: f64,
    state0: &[f64],
    tol: &ToleranceSpec,
    output_times: &[f64],
) -> Result<Trajectory> {
    tol.validate()?;
    check_output_times(t0, t1, output_times)?;
    let dim = sys.dim();
    let span = t1 - t0;
    let h_floor = 1e-14 * span;
    let h_max = tol.max_step.unwrap_or(span).min(span);

    let mut y = state0.to_vec();
    let mut k: [Vec<f64>; 7] = Default::default();
    for stage in k.iter_mut() {
        *stage = vec![0.0; dim];
    }
    let mut y_stage = vec![0.0; dim];
    let mut y_new = vec![0.0; dim];
    let mut err_vec = vec![0.0; dim];

    let mut t = t0;
    let mut rhs_evals = 0usize;
    sys.rhs(t, &y, &mut k[0])?;
    rhs_evals += 1;

    let mut h = match tol.initial_step {
        Some(h0) if h0 > 0.0 => h0.min(h_max),
        _ => initial_step_guess(&y, &k[0], span, tol).min(h_max),
    };

    let mut out = OutputCollector::new(output_times, dim);
    out.push_exact(t0, &y);

    let mut facold: f64 = 1e-4;
    let mut steps = 0usize;
    let mut range_error: Option<Error> = None;

    'march: while t < t1 {
        h = h.min(t1 - t);
        if h < h_floor {
            // report the physical cause when trial stages kept leaving the
            // admissible range
            return Err(range_error.unwrap_or(Error::StepUnderflow { t }));
        }

        // stages 2..7
        for s in 1..7 {
            for i in 0..dim {
                let mut acc = 0.0;
                for (j, stage) in k.iter().enumerate().take(s) {
                    let a = A[s][j];
                    if a != 0.0 {
                        acc += a * stage[i];
                    }
                }
                y_stage[i] = y[i] + h * acc;
            }
            match sys.rhs(t + C[s] * h, &y_stage, &mut k[s]) {
                Ok(()) => {}
                Err(e @ Error::ConstitutiveRange(_)) => {
                    // trial stage left the admissible range: retry smaller
                    range_error = Some(e);
                    h *= 0.3;
                    continue 'march;
                }
                Err(e) => return Err(e),
            }
            rhs_evals += 1;
            if s == 6 {
                // stage 7 is evaluated at the 5th-order solution (FSAL)
                y_new.copy_from_slice(&y_stage);
            }
        }

        for i in 0..dim {
            let mut e = 0.0;
            for (j, stage) in k.iter().enumerate() {
                if E[j] != 0.0 {
                    e += E[j] * stage[i];
                }
            }
            err_vec[i] = h * e;
        }
        let err = error_norm(&err_vec, &y, &y_new, tol.abs_tol, tol.rel_tol);

        if !err.is_finite() {
            // reject hard and retry with a much smaller step
            h *= 0.1;
            if h < h_floor {
                return Err(Error::Integration {
                    t,
                    reason: "non-finite error estimate".into(),
                });
            }
            continue;
        }

        let fac11 = err.powf(EXPO1);
        if err <= 1.0 {
            // accept; the controller uses the error of the previous accepted step
            let fac = (fac11 / facold.powf(BETA) / SAFETY).clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
            facold = err.max(1e-4);
            steps += 1;
            let t_new = t + h;

            // dense-output coefficients for this step
            let mut cont: [Vec<f64>; 5] = Default::default();
            for c in cont.iter_mut() {
                *c = vec![0.0; dim];
            }
            for i in 0..dim {
                let ydiff = y_new[i] - y[i];
                let bspl = h * k[0][i] - ydiff;
                let mut dsum = 0.0;
                for (j, stage) in k.iter().enumerate() {
                    if D[j] != 0.0 {
                        dsum += D[j] * stage[i];
                    }
                }
                cont[0][i] = y[i];
                cont[1][i] = ydiff;
                cont[2][i] = bspl;
                cont[3][i] = ydiff - h * k[6][i] - bspl;
                cont[4][i] = h * dsum;
            }
            let dense = DenseStep { t0: t, h, cont };
            out.collect_dense(t_new, |tq, buf| dense.eval(tq, buf));

            std::mem::swap(&mut y, &mut y_new);
            k.swap(0, 6); // FSAL: k7 becomes k1 of the next step
            t = t_new;
            h = (h / fac).min(h_max);
        } else {
            // reject
            h /= (fac11 / SAFETY).min(1.0 / FAC_MIN);
        }
    }
    out.finish_with(t1, &y);

    Ok(Trajectory {
        times: output_times.to_vec(),
        states: out.into_states(),
        dim,
        steps,
        rhs_evals,
    })
}

fn initial_step_guess(y: &[f64], f: &[f64], span: f64, tol: &ToleranceSpec) -> f64 {
    let mut d0: f64 = 0.0;
    let mut d1: f64 = 0.0;
    for i in 0..y.len() {
        let sk = tol.abs_tol + tol.rel_tol * y[i].abs();
        d0 += (y[i] / sk).powi(2);
        d1 += (f[i] / sk).powi(2);
    }
    let n = y.len().max(1) as f64;
    let d0 = (d0 / n).sqrt();
    let d1 = (d1 / n).sqrt();
    let h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6 * span
    } else {
        0.01 * d0 / d1
    };
    h0.min(span / 10.0).max(1e-12 * span)
}
