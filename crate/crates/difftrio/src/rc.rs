//! Lumped RC network model: a chain of r resistances with r - 1 capacitive
//! nodes, stepped with explicit Euler in physical units. The ends of the
//! chain are clamped to the Dirichlet signals. For matched grids the nodal
//! balance is algebraically identical to the central-difference stencil.

use crate::error::{Error, Result};
use crate::model::{
    BoundarySignal, DiffusionProblem, OutputGrid, Physics, SolutionField, SolverId,
};

/// A resistance/capacitance ladder across the wall.
#[derive(Debug, Clone)]
pub struct RcChain {
    /// Number of resistances r; the chain has r - 1 interior nodes.
    pub resistances: usize,
    /// Node spacing L / r [m].
    pub dx: f64,
    /// Per-link resistance, r entries [K.m^2/W or Pa.m.s/kg].
    pub link_resistance: Vec<f64>,
    /// Per-node lumped capacity C * dx, r - 1 entries.
    pub node_capacity: Vec<f64>,
}

impl RcChain {
    /// Total series resistance of the chain.
    pub fn total_resistance(&self) -> f64 {
        self.link_resistance.iter().sum()
    }
}

/// Build the thermal ladder: uniform link resistance `(L/r)/k` and lumped
/// capacity `rho c (L/r)` at each interior node.
pub fn build_chain_heat(
    m: &crate::model::HeatMaterial,
    thickness: f64,
    r: usize,
) -> Result<RcChain> {
    m.validate()?;
    if r < 2 {
        return Err(Error::Config(
            "an RC chain needs r >= 2 resistances (at least one interior node)".into(),
        ));
    }
    let dx = thickness / r as f64;
    Ok(RcChain {
        resistances: r,
        dx,
        link_resistance: vec![dx / m.conductivity; r],
        node_capacity: vec![m.volumetric_capacity() * dx; r - 1],
    })
}

/// Build the vapor ladder for the current pressure state. Each node
/// contributes a half-link resistance `dx / (2 kappa(P_j))`; a link then
/// carries `R_j + R_{j+1}`, which reduces to `dx / kappa` for constant
/// permeability. Capacities are `xi(P_j) dx`. The boundary half-resistances
/// use the clamped Dirichlet pressures.
pub fn build_chain_moisture(
    m: &crate::model::MoistureMaterial,
    thickness: f64,
    r: usize,
    state: &[f64],
    p_left: f64,
    p_right: f64,
) -> Result<RcChain> {
    if r < 2 {
        return Err(Error::Config(
            "an RC chain needs r >= 2 resistances (at least one interior node)".into(),
        ));
    }
    if state.len() != r - 1 {
        return Err(Error::Contract(format!(
            "state holds {} nodes but the chain has {}",
            state.len(),
            r - 1
        )));
    }
    let dx = thickness / r as f64;
    let half = |p: f64| -> Result<f64> {
        let kappa = m.permeability(p);
        if !(kappa > 0.0) {
            return Err(Error::ConstitutiveRange(format!(
                "kappa({p}) = {kappa} must be positive"
            )));
        }
        Ok(dx / (2.0 * kappa))
    };
    let mut link_resistance = Vec::with_capacity(r);
    let mut prev = half(p_left)?;
    for &p in state {
        let h = half(p)?;
        link_resistance.push(prev + h);
        prev = h;
    }
    link_resistance.push(prev + half(p_right)?);
    let mut node_capacity = Vec::with_capacity(r - 1);
    for &p in state {
        let xi = m.capacity_at(p);
        if !(xi > 0.0) {
            return Err(Error::ConstitutiveRange(format!(
                "xi({p}) = {xi} must be positive"
            )));
        }
        node_capacity.push(xi * dx);
    }
    Ok(RcChain {
        resistances: r,
        dx,
        link_resistance,
        node_capacity,
    })
}

/// Nodal balance of the ladder: `C dx dT_j/dt = (T_{j+1}-T_j)/R_{j+1} - (T_j-T_{j-1})/R_j`
/// with the ends clamped to the boundary values.
pub fn rhs_rc_heat(chain: &RcChain, state: &[f64], left: f64, right: f64, out: &mut [f64]) {
    let n = state.len();
    debug_assert_eq!(n, chain.resistances - 1);
    for j in 0..n {
        let tm = if j == 0 { left } else { state[j - 1] };
        let tp = if j + 1 == n { right } else { state[j + 1] };
        let q_in = (state[j] - tm) / chain.link_resistance[j];
        let q_out = (tp - state[j]) / chain.link_resistance[j + 1];
        out[j] = (q_out - q_in) / chain.node_capacity[j];
    }
}

/// Largest stable explicit step in dimensionless time: `dt* = dx*^2 / (2 fo)`.
pub fn cfl_max_step(fo: f64, dx_star: f64) -> f64 {
    dx_star * dx_star / (2.0 * fo)
}

/// Time-stepping policy for the ladder march.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DtPolicy {
    /// Explicit Euler at `factor` times the stability bound (factor in (0, 1]).
    Auto { factor: f64 },
    /// Explicit Euler at a fixed step [s]; refused up front if it violates
    /// the stability bound.
    Fixed { dt: f64 },
    /// Adaptive embedded Runge-Kutta on the ladder ODEs. This is the
    /// protocol behind the reported accuracy tables: the error then floors
    /// at the integrator tolerance instead of the much smaller explicit
    /// Euler truncation. Tolerances apply to the physical state, so pick
    /// `abs_tol`/`rel_tol` with the field magnitude in mind.
    AdaptiveRk { abs_tol: f64, rel_tol: f64 },
}

impl Default for DtPolicy {
    fn default() -> Self {
        DtPolicy::Auto { factor: 0.5 }
    }
}

/// Stability bound in physical seconds for the given problem and spacing.
/// Heat uses the exact bound `dx^2 rho c / (2 k)`; moisture uses the
/// conservative frozen-coefficient heuristic `min(xi) dx^2 / (2 max(kappa))`
/// with the extremes taken over the admissible pressure range.
fn stability_bound(p: &DiffusionProblem, dx: f64) -> f64 {
    match &p.physics {
        Physics::Heat(m) => dx * dx / (2.0 * m.diffusivity()),
        Physics::Moisture(m) => {
            let (lo_l, hi_l) = p.left.envelope(p.horizon);
            let (lo_r, hi_r) = p.right.envelope(p.horizon);
            let lo = lo_l.min(lo_r).min(p.value_scale());
            let hi = hi_l.max(hi_r).max(p.value_scale());
            let kappa_max = m.permeability(lo).max(m.permeability(hi));
            let xi_min = m.capacity_at(lo).min(m.capacity_at(hi));
            xi_min * dx * dx / (2.0 * kappa_max)
        }
    }
}

/// Solve in physical units with the explicit Euler march. The returned field
/// lives on the chain's own r + 1 node grid (clamped ends included) with
/// output instants interpolated linearly between steps.
pub fn solve_rc(
    p: &DiffusionProblem,
    r: usize,
    dt_policy: DtPolicy,
    output: &OutputGrid,
) -> Result<SolutionField> {
    p.validate()?;
    if let DtPolicy::AdaptiveRk { abs_tol, rel_tol } = dt_policy {
        return solve_rc_adaptive(p, r, abs_tol, rel_tol, output);
    }
    let dx = p.thickness / r as f64;
    let bound = stability_bound(p, dx);
    let mut dt = match dt_policy {
        DtPolicy::Auto { factor } => {
            if !(factor > 0.0 && factor <= 1.0) {
                return Err(Error::Config(format!(
                    "dt factor {factor} must lie in (0, 1]"
                )));
            }
            factor * bound
        }
        DtPolicy::Fixed { dt } => {
            if dt > bound {
                return Err(Error::CflViolation { dt, bound });
            }
            if !(dt > 0.0) {
                return Err(Error::Config("fixed dt must be positive".into()));
            }
            dt
        }
        DtPolicy::AdaptiveRk { .. } => unreachable!(),
    };
    // never step coarser than the boundary-data resolution
    for sig in [&p.left, &p.right] {
        if let BoundarySignal::Sampled { times, .. } = sig {
            let min_spacing = times
                .windows(2)
                .map(|w| w[1] - w[0])
                .fold(f64::INFINITY, f64::min);
            dt = dt.min(min_spacing);
        }
    }

    // output instants in physical seconds
    let out_times: Vec<f64> = output.times.iter().map(|t| t * p.t_ref).collect();

    let n = r - 1;
    let mut state: Vec<f64> = (1..r)
        .map(|j| p.initial_at(j as f64 * dx))
        .collect();
    let mut next = vec![0.0; n];
    let mut rhs = vec![0.0; n];

    let started = std::time::Instant::now();
    let mut heat_chain = match &p.physics {
        Physics::Heat(m) => Some(build_chain_heat(m, p.thickness, r)?),
        Physics::Moisture(_) => None,
    };

    let mut t = 0.0;
    let mut out_idx = 0usize;
    let nt = out_times.len();
    let mut interior_rows: Vec<f64> = Vec::with_capacity(nt * n);
    // leading outputs at t = 0
    while out_idx < nt && out_times[out_idx] <= 0.0 {
        interior_rows.extend_from_slice(&state);
        out_idx += 1;
    }

    while t < p.horizon {
        let h = dt.min(p.horizon - t);
        let left = p.left.sample(t)?;
        let right = p.right.sample(t)?;
        let chain = match &p.physics {
            Physics::Heat(_) => heat_chain.as_ref().unwrap(),
            Physics::Moisture(m) => {
                heat_chain = Some(build_chain_moisture(m, p.thickness, r, &state, left, right)?);
                heat_chain.as_ref().unwrap()
            }
        };
        rhs_rc_heat(chain, &state, left, right, &mut rhs);
        let t_next = t + h;
        for j in 0..n {
            next[j] = state[j] + h * rhs[j];
            if !next[j].is_finite() {
                return Err(Error::Integration {
                    t,
                    reason: "RC state diverged".into(),
                });
            }
        }
        while out_idx < nt && out_times[out_idx] <= t_next {
            let w = (out_times[out_idx] - t) / h;
            for j in 0..n {
                interior_rows.push(state[j] + w * (next[j] - state[j]));
            }
            out_idx += 1;
        }
        std::mem::swap(&mut state, &mut next);
        t = t_next;
    }
    while out_idx < nt {
        interior_rows.extend_from_slice(&state);
        out_idx += 1;
    }
    let cpu_seconds = started.elapsed().as_secs_f64();

    // assemble the full grid with exact clamped boundary values
    let nodes: Vec<f64> = (0..=r).map(|j| j as f64 * dx).collect();
    let mut values = Vec::with_capacity(nt * (r + 1));
    for (ti, &ts) in out_times.iter().enumerate() {
        values.push(p.left.sample(ts)?);
        values.extend_from_slice(&interior_rows[ti * n..(ti + 1) * n]);
        values.push(p.right.sample(ts)?);
    }
    SolutionField::new(
        nodes,
        out_times,
        values,
        SolverId::Rc { resistances: r },
        cpu_seconds,
        false,
    )
}

/// Adaptive march over the ladder ODEs in physical units.
fn solve_rc_adaptive(
    p: &DiffusionProblem,
    r: usize,
    abs_tol: f64,
    rel_tol: f64,
    output: &OutputGrid,
) -> Result<SolutionField> {
    use crate::integrate::{integrate_adaptive_rk, system, ToleranceSpec};
    if r < 2 {
        return Err(Error::Config(
            "an RC chain needs r >= 2 resistances (at least one interior node)".into(),
        ));
    }
    let dx = p.thickness / r as f64;
    let n = r - 1;
    let out_times: Vec<f64> = output.times.iter().map(|t| t * p.t_ref).collect();
    let state0: Vec<f64> = (1..r).map(|j| p.initial_at(j as f64 * dx)).collect();

    let heat_chain = match &p.physics {
        Physics::Heat(m) => Some(build_chain_heat(m, p.thickness, r)?),
        Physics::Moisture(_) => None,
    };
    let physics = p.physics.clone();
    let (left, right, thickness) = (p.left.clone(), p.right.clone(), p.thickness);

    let started = std::time::Instant::now();
    let mut sys = system(n, move |t, y: &[f64], dydt: &mut [f64]| {
        let l = left.sample(t)?;
        let rr = right.sample(t)?;
        match &physics {
            Physics::Heat(_) => {
                rhs_rc_heat(heat_chain.as_ref().unwrap(), y, l, rr, dydt);
            }
            Physics::Moisture(m) => {
                let chain = build_chain_moisture(m, thickness, r, y, l, rr)?;
                rhs_rc_heat(&chain, y, l, rr, dydt);
            }
        }
        Ok(())
    });
    let tol = ToleranceSpec::tight(abs_tol, rel_tol);
    let traj = integrate_adaptive_rk(&mut sys, 0.0, p.horizon, &state0, &tol, &out_times)?;
    let cpu_seconds = started.elapsed().as_secs_f64();

    let nodes: Vec<f64> = (0..=r).map(|j| j as f64 * dx).collect();
    let mut values = Vec::with_capacity(out_times.len() * (r + 1));
    for (ti, &ts) in out_times.iter().enumerate() {
        values.push(p.left.sample(ts)?);
        values.extend_from_slice(traj.state(ti));
        values.push(p.right.sample(ts)?);
    }
    SolutionField::new(
        nodes,
        out_times,
        values,
        SolverId::Rc { resistances: r },
        cpu_seconds,
        false,
    )
}
