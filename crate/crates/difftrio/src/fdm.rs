//! Central finite-difference semi-discretization on a uniform dimensionless
//! grid, integrated in time with the adaptive Runge-Kutta pair. Dirichlet
//! values are injected into the stencil at every right-hand-side evaluation,
//! so the state vector holds interior nodes only.

use crate::error::{Error, Result};
use crate::integrate::{integrate_adaptive_rk, system, ToleranceSpec};
use crate::model::{
    Coefficients, DimensionlessProblem, OutputGrid, SolutionField, SolverId,
};

/// Uniform grid on `x* in [0, 1]` with `n_cells` intervals.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FdmGrid {
    n_cells: usize,
}

impl FdmGrid {
    pub fn new(n_cells: usize) -> Result<Self> {
        if n_cells < 2 {
            return Err(Error::Config("FDM grid needs at least 2 cells".into()));
        }
        Ok(Self { n_cells })
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn dx(&self) -> f64 {
        1.0 / self.n_cells as f64
    }

    /// Positions of all nodes 0..=n_cells.
    pub fn nodes(&self) -> Vec<f64> {
        (0..=self.n_cells)
            .map(|j| j as f64 / self.n_cells as f64)
            .collect()
    }

    /// Positions of the interior nodes 1..n_cells.
    pub fn interior_nodes(&self) -> Vec<f64> {
        (1..self.n_cells)
            .map(|j| j as f64 / self.n_cells as f64)
            .collect()
    }

    pub fn interior_len(&self) -> usize {
        self.n_cells - 1
    }
}

/// Semi-discrete linear heat operator: `du_j/dt = fo (u_{j-1} - 2u_j + u_{j+1}) / dx^2`
/// with the boundary values supplied for the current instant.
pub fn rhs_linear_heat(
    state: &[f64],
    fo: f64,
    grid: &FdmGrid,
    u_left: f64,
    u_right: f64,
    out: &mut [f64],
) {
    let n = state.len();
    debug_assert_eq!(n, grid.interior_len());
    let c = fo / (grid.dx() * grid.dx());
    for j in 0..n {
        let um = if j == 0 { u_left } else { state[j - 1] };
        let up = if j + 1 == n { u_right } else { state[j + 1] };
        out[j] = c * (um - 2.0 * state[j] + up);
    }
}

/// Semi-discrete nonlinear moisture operator with half-node permeability
/// taken at the arithmetic mean of the adjacent states:
/// `xi*(v_j) dv_j/dt = fo [k*(v_{j+1/2})(v_{j+1}-v_j) - k*(v_{j-1/2})(v_j-v_{j-1})] / dx^2`.
pub fn rhs_nonlinear_moisture(
    state: &[f64],
    fo: f64,
    grid: &FdmGrid,
    coeffs: &Coefficients,
    v_left: f64,
    v_right: f64,
    out: &mut [f64],
) -> Result<()> {
    let n = state.len();
    debug_assert_eq!(n, grid.interior_len());
    let c = fo / (grid.dx() * grid.dx());
    // flux through the face left of node j, for j = 0..n internal faces + boundary faces
    let mut flux_left = {
        let vm = v_left;
        let v0 = state[0];
        coeffs.kappa_star(0.5 * (vm + v0)) * (v0 - vm)
    };
    for j in 0..n {
        let vj = state[j];
        let vp = if j + 1 == n { v_right } else { state[j + 1] };
        let flux_right = coeffs.kappa_star(0.5 * (vj + vp)) * (vp - vj);
        let xi = coeffs.xi_star(vj);
        if !(xi > 0.0) {
            return Err(Error::ConstitutiveRange(format!(
                "xi*({vj}) = {xi} at interior node {}",
                j + 1
            )));
        }
        out[j] = c * (flux_right - flux_left) / xi;
        flux_left = flux_right;
    }
    Ok(())
}

/// Solve a dimensionless problem with the method of lines: central
/// differences in space, adaptive Runge-Kutta in time. Boundary columns of
/// the returned field carry the exact Dirichlet values.
pub fn solve_fdm(
    p: &DimensionlessProblem,
    grid: &FdmGrid,
    tol: &ToleranceSpec,
    output: &OutputGrid,
) -> Result<SolutionField> {
    tol.validate()?;
    let interior = grid.interior_nodes();
    let dim = interior.len();
    let state0: Vec<f64> = interior.iter().map(|&x| p.initial_at(x)).collect();

    let left = p.left.clone();
    let right = p.right.clone();
    let coeffs = p.coeffs.clone();
    let fo = p.fo;
    let g = *grid;
    let linear = matches!(coeffs, Coefficients::Unit);

    let started = std::time::Instant::now();
    let mut sys = system(dim, move |t, y: &[f64], dydt: &mut [f64]| {
        let ul = left.sample(t)?;
        let ur = right.sample(t)?;
        if linear {
            rhs_linear_heat(y, fo, &g, ul, ur, dydt);
            Ok(())
        } else {
            rhs_nonlinear_moisture(y, fo, &g, &coeffs, ul, ur, dydt)
        }
    });
    let traj = integrate_adaptive_rk(&mut sys, 0.0, p.horizon, &state0, tol, &output.times)?;
    let cpu_seconds = started.elapsed().as_secs_f64();

    let nodes = grid.nodes();
    let nx = nodes.len();
    let mut values = Vec::with_capacity(nx * output.times.len());
    for (ti, &t) in output.times.iter().enumerate() {
        values.push(p.left.sample(t)?);
        values.extend_from_slice(traj.state(ti));
        values.push(p.right.sample(t)?);
        debug_assert_eq!(values.len(), (ti + 1) * nx);
    }
    SolutionField::new(
        nodes,
        output.times.clone(),
        values,
        SolverId::Fdm {
            intervals: grid.n_cells(),
        },
        cpu_seconds,
        true,
    )
}
