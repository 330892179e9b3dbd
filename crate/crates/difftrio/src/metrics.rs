//! Error metrics, flux computation, conduction loads and temporal
//! aggregation. Field errors are always taken on dimensionless fields over a
//! shared space-time lattice: `eps2(x)` is the per-node RMS over time of the
//! deviation from the reference, and `eps_inf` its maximum over nodes.

use crate::error::{Error, Result};
use crate::model::{
    interp_xy, Coefficients, DiffusionProblem, Physics, SolutionField,
};
use crate::spectral::{cheb_eval, derivative_coeffs_first};

/// Per-solver accuracy and cost summary against a reference solution.
#[derive(Debug, Clone)]
pub struct ErrorReport {
    /// RMS-over-time error per node.
    pub eps2_profile: Vec<f64>,
    /// max over nodes of `eps2_profile`.
    pub field_eps_inf: f64,
    /// same norm applied to the dimensionless flux field.
    pub flux_eps_inf: f64,
    /// significant correct digits of the final-time profile; NaN when the
    /// reference vanishes at a node.
    pub scd: f64,
    /// wall-clock cost per simulated hour [ms/h].
    pub r_cpu_ms_per_h: f64,
}

fn check_same_grid(a: &SolutionField, b: &SolutionField) -> Result<()> {
    if a.nx() != b.nx() || a.nt() != b.nt() {
        return Err(Error::Contract(format!(
            "grid mismatch: {}x{} vs {}x{}",
            a.nt(),
            a.nx(),
            b.nt(),
            b.nx()
        )));
    }
    let x_ok = a
        .x_nodes
        .iter()
        .zip(&b.x_nodes)
        .all(|(p, q)| (p - q).abs() <= 1e-9);
    let t_ok = a
        .t_samples
        .iter()
        .zip(&b.t_samples)
        .all(|(p, q)| (p - q).abs() <= 1e-9 * q.abs().max(1.0));
    if !(x_ok && t_ok) {
        return Err(Error::Contract("solution grids do not coincide".into()));
    }
    Ok(())
}

/// Per-node RMS-over-time deviation between a solution and the reference.
pub fn eps2_profile(sol: &SolutionField, reference: &SolutionField) -> Result<Vec<f64>> {
    check_same_grid(sol, reference)?;
    let (nx, nt) = (sol.nx(), sol.nt());
    let mut out = vec![0.0; nx];
    for ti in 0..nt {
        let a = sol.row(ti);
        let b = reference.row(ti);
        for j in 0..nx {
            let d = a[j] - b[j];
            out[j] += d * d;
        }
    }
    for v in &mut out {
        *v = (*v / nt as f64).sqrt();
    }
    Ok(out)
}

/// Supremum of the error profile over the nodes.
pub fn eps_inf(profile: &[f64]) -> f64 {
    profile.iter().fold(0.0f64, |m, v| m.max(*v))
}

/// Significant correct digits of the final-time profile:
/// `-log10 || (u(x, tau) - u_ref(x, tau)) / u_ref(x, tau) ||_inf`,
/// capped at 16 (double-precision limit).
pub fn scd(sol: &SolutionField, reference: &SolutionField) -> Result<f64> {
    check_same_grid(sol, reference)?;
    let last = sol.nt() - 1;
    let a = sol.row(last);
    let b = reference.row(last);
    let mut sup = 0.0f64;
    for j in 0..sol.nx() {
        if b[j] == 0.0 {
            return Err(Error::UndefinedScd);
        }
        sup = sup.max(((a[j] - b[j]) / b[j]).abs());
    }
    if sup == 0.0 {
        return Ok(16.0);
    }
    Ok((-sup.log10()).min(16.0))
}

/// A flux time series at a fixed location, in physical units.
#[derive(Debug, Clone)]
pub struct FluxSeries {
    /// Sample instants [s].
    pub t_samples: Vec<f64>,
    /// Flux density values [W/m^2 or kg/(s.m^2)].
    pub values: Vec<f64>,
    /// Location [m].
    pub location: f64,
}

/// Dimensionless flux field on the interior + right nodes (one-sided
/// differences are anchored at node `j`, using nodes `j-1` and `j`).
#[derive(Debug, Clone)]
pub struct FluxField {
    pub x_nodes: Vec<f64>,
    pub t_samples: Vec<f64>,
    /// Row-major `values[ti * nx + xi]`.
    pub values: Vec<f64>,
}

impl FluxField {
    pub fn nx(&self) -> usize {
        self.x_nodes.len()
    }

    fn as_field(&self) -> SolutionField {
        SolutionField {
            x_nodes: self.x_nodes.clone(),
            t_samples: self.t_samples.clone(),
            values: self.values.clone(),
            solver_id: crate::model::SolverId::Reference,
            cpu_seconds: 0.0,
            dimensionless: true,
            modal: None,
        }
    }
}

/// Dimensionless flux `-kappa*(v) dv/dx*` over the whole grid. Grid-based
/// solutions use the one-sided first-order difference anchored at each node
/// (with the permeability at the half-node mean); spectral solutions use the
/// exact series derivative evaluated at the same nodes.
pub fn flux_field(sol: &SolutionField, coeffs: &Coefficients) -> Result<FluxField> {
    if !sol.dimensionless {
        return Err(Error::Contract(
            "flux_field expects a dimensionless field".into(),
        ));
    }
    let nx = sol.nx();
    let nt = sol.nt();
    if nx < 2 {
        return Err(Error::Contract("flux needs at least two nodes".into()));
    }
    let x_out: Vec<f64> = sol.x_nodes[1..].to_vec();
    let mut values = Vec::with_capacity((nx - 1) * nt);
    match &sol.modal {
        Some(modal) => {
            for ti in 0..nt {
                let coeffs_row = modal.row(ti);
                let deriv = derivative_coeffs_first(coeffs_row);
                for &x in &x_out {
                    let x_cheb = 2.0 * x - 1.0;
                    let v = cheb_eval(coeffs_row, x_cheb)?;
                    // d/dx* = 2 d/dX through the domain map
                    let dv = 2.0 * cheb_eval(&deriv, x_cheb)?;
                    values.push(-coeffs.kappa_star(v) * dv);
                }
            }
        }
        None => {
            for ti in 0..nt {
                let row = sol.row(ti);
                for j in 1..nx {
                    let dx = sol.x_nodes[j] - sol.x_nodes[j - 1];
                    let mid = 0.5 * (row[j] + row[j - 1]);
                    values.push(-coeffs.kappa_star(mid) * (row[j] - row[j - 1]) / dx);
                }
            }
        }
    }
    Ok(FluxField {
        x_nodes: x_out,
        t_samples: sol.t_samples.clone(),
        values,
    })
}

/// `eps_inf` of the dimensionless flux deviation between solution and
/// reference (same norm as the field error, applied to the flux field).
pub fn flux_eps_inf(
    sol: &SolutionField,
    reference: &SolutionField,
    coeffs: &Coefficients,
) -> Result<f64> {
    let a = flux_field(sol, coeffs)?.as_field();
    let b = flux_field(reference, coeffs)?.as_field();
    Ok(eps_inf(&eps2_profile(&a, &b)?))
}

/// Physical flux density at `x0` [m] for a dimensionless solution of
/// problem `p`. Grid methods require `x0` to coincide with a node and use
/// the paper-faithful one-sided difference; spectral solutions evaluate the
/// series derivative anywhere in `[0, L]`.
pub fn flux(sol: &SolutionField, p: &DiffusionProblem, x0: f64) -> Result<FluxSeries> {
    if !sol.dimensionless {
        return Err(Error::Contract("flux expects a dimensionless field".into()));
    }
    let scale = p.value_scale();
    let length = p.thickness;
    let x_star = x0 / length;
    let nt = sol.nt();
    let t_samples: Vec<f64> = sol.t_samples.iter().map(|t| t * p.t_ref).collect();
    let mut values = Vec::with_capacity(nt);
    match &sol.modal {
        Some(modal) => {
            if !(0.0..=1.0).contains(&x_star) {
                return Err(Error::OffGrid { x: x0 });
            }
            let x_cheb = 2.0 * x_star - 1.0;
            for ti in 0..nt {
                let row = modal.row(ti);
                let deriv = derivative_coeffs_first(row);
                let v = cheb_eval(row, x_cheb)?;
                let dv_dxstar = 2.0 * cheb_eval(&deriv, x_cheb)?;
                let conductivity = transport_coefficient(p, v * scale);
                values.push(-conductivity * scale / length * dv_dxstar);
            }
        }
        None => {
            let j = sol
                .x_nodes
                .iter()
                .position(|&x| (x - x_star).abs() <= 1e-9)
                .ok_or(Error::OffGrid { x: x0 })?;
            if j == 0 {
                return Err(Error::OffGrid { x: x0 });
            }
            let dx = sol.x_nodes[j] - sol.x_nodes[j - 1];
            for ti in 0..nt {
                let row = sol.row(ti);
                let mid = 0.5 * (row[j] + row[j - 1]) * scale;
                let conductivity = transport_coefficient(p, mid);
                values.push(-conductivity * scale / length * (row[j] - row[j - 1]) / dx);
            }
        }
    }
    Ok(FluxSeries {
        t_samples,
        values,
        location: x0,
    })
}

fn transport_coefficient(p: &DiffusionProblem, field_value: f64) -> f64 {
    match &p.physics {
        Physics::Heat(m) => m.conductivity,
        Physics::Moisture(m) => m.permeability(field_value),
    }
}

/// Conduction load: trapezoidal integral of the flux density over
/// `[t1, t2]` [J/m^2 or kg/m^2]. Window edges may fall between samples and
/// are handled by linear interpolation.
pub fn conduction_load(q: &FluxSeries, t1: f64, t2: f64) -> Result<f64> {
    let (start, end) = (q.t_samples[0], q.t_samples[q.t_samples.len() - 1]);
    if !(t1 < t2) || t1 < start - 1e-9 || t2 > end + 1e-9 {
        return Err(Error::OutOfRange {
            t: if t1 < start { t1 } else { t2 },
            start,
            end,
        });
    }
    let value_at = |t: f64| interp_xy(&q.t_samples, &q.values, t);
    let mut acc = 0.0;
    let mut t_prev = t1;
    let mut v_prev = value_at(t1);
    for (i, &ts) in q.t_samples.iter().enumerate() {
        if ts <= t1 {
            continue;
        }
        if ts >= t2 {
            break;
        }
        acc += 0.5 * (v_prev + q.values[i]) * (ts - t_prev);
        t_prev = ts;
        v_prev = q.values[i];
    }
    acc += 0.5 * (v_prev + value_at(t2)) * (t2 - t_prev);
    Ok(acc)
}

/// Aggregation window for series statistics.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Period {
    Daily,
    Monthly,
}

impl Period {
    pub fn seconds(&self) -> f64 {
        match self {
            Period::Daily => 24.0 * 3600.0,
            Period::Monthly => 30.0 * 24.0 * 3600.0,
        }
    }
}

/// Block means of a uniformly sampled series over fixed calendar-agnostic
/// windows (24 h or 30 d). Returns (window mid-times, means) for every
/// complete window; errors if not even one window fits.
pub fn aggregate(times: &[f64], values: &[f64], period: Period) -> Result<(Vec<f64>, Vec<f64>)> {
    if times.len() != values.len() || times.len() < 2 {
        return Err(Error::Contract("series too short to aggregate".into()));
    }
    let window = period.seconds();
    let t0 = times[0];
    let span = times[times.len() - 1] - t0;
    let n_windows = (span / window).floor() as usize;
    if n_windows == 0 {
        return Err(Error::OutOfRange {
            t: window,
            start: 0.0,
            end: span,
        });
    }
    let mut mids = Vec::with_capacity(n_windows);
    let mut means = Vec::with_capacity(n_windows);
    let dt = times[1] - times[0];
    for w in 0..n_windows {
        let lo = t0 + w as f64 * window;
        let hi = lo + window;
        // samples with t in [lo, hi): a block of round(window / dt) entries
        let i_lo = ((lo - t0) / dt).round() as usize;
        let i_hi = ((hi - t0) / dt).round() as usize;
        let block = &values[i_lo..i_hi.min(values.len())];
        let mean = block.iter().sum::<f64>() / block.len() as f64;
        mids.push(0.5 * (lo + hi));
        means.push(mean);
    }
    Ok((mids, means))
}

/// Conduction loads per complete window: the flux integral over each block.
pub fn loads_per_window(q: &FluxSeries, period: Period) -> Result<(Vec<f64>, Vec<f64>)> {
    let window = period.seconds();
    let t0 = q.t_samples[0];
    let span = q.t_samples[q.t_samples.len() - 1] - t0;
    let n_windows = (span / window).floor() as usize;
    if n_windows == 0 {
        return Err(Error::OutOfRange {
            t: window,
            start: 0.0,
            end: span,
        });
    }
    let mut mids = Vec::with_capacity(n_windows);
    let mut loads = Vec::with_capacity(n_windows);
    for w in 0..n_windows {
        let lo = t0 + w as f64 * window;
        let hi = lo + window;
        mids.push(0.5 * (lo + hi));
        loads.push(conduction_load(q, lo, hi)?);
    }
    Ok((mids, loads))
}

/// Resample a field onto `x_target` by linear interpolation along x
/// (identity when the grids already coincide).
pub fn resample_to_grid(field: &SolutionField, x_target: &[f64]) -> Result<SolutionField> {
    let nx_t = x_target.len();
    let mut values = Vec::with_capacity(nx_t * field.nt());
    for ti in 0..field.nt() {
        let row = field.row(ti);
        for &x in x_target {
            values.push(interp_xy(&field.x_nodes, row, x));
        }
    }
    SolutionField::new(
        x_target.to_vec(),
        field.t_samples.clone(),
        values,
        field.solver_id,
        field.cpu_seconds,
        field.dimensionless,
    )
}

/// Full per-solver report against a reference on the shared grid.
pub fn error_report(
    sol: &SolutionField,
    reference: &SolutionField,
    coeffs: &Coefficients,
    horizon_seconds: f64,
) -> Result<ErrorReport> {
    let profile = eps2_profile(sol, reference)?;
    let field = eps_inf(&profile);
    let flux = flux_eps_inf(sol, reference, coeffs)?;
    let scd_value = match scd(sol, reference) {
        Ok(v) => v,
        Err(Error::UndefinedScd) => f64::NAN,
        Err(e) => return Err(e),
    };
    Ok(ErrorReport {
        eps2_profile: profile,
        field_eps_inf: field,
        flux_eps_inf: flux,
        scd: scd_value,
        r_cpu_ms_per_h: sol.cpu_seconds * 1000.0 / (horizon_seconds / 3600.0),
    })
}
