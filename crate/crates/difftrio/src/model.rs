//! Domain model shared by all solvers: wall materials, boundary signals,
//! dimensional problems and their dimensionless counterparts.
//!
//! Every solver consumes either a [`DiffusionProblem`] (physical units, used
//! by the RC network) or a [`DimensionlessProblem`] obtained through
//! [`nondimensionalize`]. The single scaling parameter of the dimensionless
//! diffusion equation is the Fourier number `fo = D t_ref / L^2` where `D`
//! is the diffusivity of the transport process.

use crate::error::{Error, Result};

/// Thermal constitutive data for a single-layer wall.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeatMaterial {
    /// Thermal conductivity k [W/(m.K)].
    pub conductivity: f64,
    /// Density rho [kg/m^3].
    pub density: f64,
    /// Specific heat c [J/(kg.K)].
    pub specific_heat: f64,
}

impl HeatMaterial {
    pub fn new(conductivity: f64, density: f64, specific_heat: f64) -> Result<Self> {
        let m = Self {
            conductivity,
            density,
            specific_heat,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.conductivity > 0.0 && self.density > 0.0 && self.specific_heat > 0.0) {
            return Err(Error::InvalidProblem(
                "heat material requires k > 0, rho > 0, c > 0".into(),
            ));
        }
        Ok(())
    }

    /// Volumetric heat capacity rho*c [J/(m^3.K)].
    pub fn volumetric_capacity(&self) -> f64 {
        self.density * self.specific_heat
    }

    /// Thermal diffusivity k/(rho*c) [m^2/s].
    pub fn diffusivity(&self) -> f64 {
        self.conductivity / self.volumetric_capacity()
    }
}

/// Moisture capacity `xi(P_v)` [s^2/m^2]: constant or tabulated in vapor pressure.
#[derive(Debug, Clone, PartialEq)]
pub enum MoistureCapacity {
    Constant(f64),
    /// Sorted (vapor pressure, capacity) pairs, interpolated linearly.
    Tabulated(Vec<(f64, f64)>),
}

/// Vapor-transport constitutive data: affine permeability and a capacity law.
#[derive(Debug, Clone, PartialEq)]
pub struct MoistureMaterial {
    /// Slope of the affine permeability kappa(P_v) = slope*P_v + intercept [s/Pa].
    pub kappa_slope: f64,
    /// Intercept of the affine permeability [s].
    pub kappa_intercept: f64,
    pub capacity: MoistureCapacity,
}

impl MoistureMaterial {
    /// Permeability kappa(P_v) [s].
    pub fn permeability(&self, vapor_pressure: f64) -> f64 {
        self.kappa_slope * vapor_pressure + self.kappa_intercept
    }

    /// Moisture capacity xi(P_v) [s^2/m^2].
    pub fn capacity_at(&self, vapor_pressure: f64) -> f64 {
        match &self.capacity {
            MoistureCapacity::Constant(c) => *c,
            MoistureCapacity::Tabulated(rows) => interp_sorted(rows, vapor_pressure),
        }
    }
}

fn interp_sorted(rows: &[(f64, f64)], x: f64) -> f64 {
    debug_assert!(!rows.is_empty());
    if x <= rows[0].0 {
        return rows[0].1;
    }
    if x >= rows[rows.len() - 1].0 {
        return rows[rows.len() - 1].1;
    }
    let hi = rows.partition_point(|r| r.0 < x);
    let (x0, y0) = rows[hi - 1];
    let (x1, y1) = rows[hi];
    y0 + (y1 - y0) * (x - x0) / (x1 - x0)
}

pub(crate) fn interp_xy(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    debug_assert_eq!(xs.len(), ys.len());
    if x <= xs[0] {
        return ys[0];
    }
    if x >= xs[xs.len() - 1] {
        return ys[ys.len() - 1];
    }
    let hi = xs.partition_point(|&v| v < x);
    ys[hi - 1] + (ys[hi] - ys[hi - 1]) * (x - xs[hi - 1]) / (xs[hi] - xs[hi - 1])
}

/// One sinusoidal component of an analytic boundary signal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SineComponent {
    pub amplitude: f64,
    /// Period [s].
    pub period: f64,
}

/// A prescribed Dirichlet surface signal, either analytic or measured.
#[derive(Debug, Clone, PartialEq)]
pub enum BoundarySignal {
    /// mean + sum of amplitude*sin(2 pi t / period) terms.
    Sinusoid {
        mean: f64,
        components: Vec<SineComponent>,
    },
    /// Ordered samples (time [s], value), interpolated linearly.
    Sampled { times: Vec<f64>, values: Vec<f64> },
}

impl BoundarySignal {
    pub fn constant(value: f64) -> Self {
        BoundarySignal::Sinusoid {
            mean: value,
            components: Vec::new(),
        }
    }

    pub fn sinusoid(mean: f64, components: Vec<SineComponent>) -> Self {
        BoundarySignal::Sinusoid { mean, components }
    }

    pub fn sampled(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.len() != values.len() || times.len() < 2 {
            return Err(Error::InvalidProblem(
                "sampled signal needs at least two (time, value) pairs".into(),
            ));
        }
        if !times.windows(2).all(|w| w[1] > w[0]) {
            return Err(Error::InvalidProblem(
                "sampled signal times must be strictly increasing".into(),
            ));
        }
        Ok(BoundarySignal::Sampled { times, values })
    }

    /// Evaluate the signal at time `t` [s]. Sinusoids are exact; sampled
    /// series are interpolated linearly between samples.
    pub fn sample(&self, t: f64) -> Result<f64> {
        match self {
            BoundarySignal::Sinusoid { mean, components } => {
                if t < 0.0 {
                    return Err(Error::OutOfRange {
                        t,
                        start: 0.0,
                        end: f64::INFINITY,
                    });
                }
                let mut v = *mean;
                for c in components {
                    v += c.amplitude * (2.0 * std::f64::consts::PI * t / c.period).sin();
                }
                Ok(v)
            }
            BoundarySignal::Sampled { times, values } => {
                let (start, end) = (times[0], times[times.len() - 1]);
                if t < start || t > end {
                    return Err(Error::OutOfRange { t, start, end });
                }
                if t == end {
                    return Ok(values[values.len() - 1]);
                }
                let hi = times.partition_point(|&x| x <= t);
                let (t0, t1) = (times[hi - 1], times[hi]);
                let (v0, v1) = (values[hi - 1], values[hi]);
                Ok(v0 + (v1 - v0) * (t - t0) / (t1 - t0))
            }
        }
    }

    /// Time span on which the signal is defined.
    pub fn span(&self) -> (f64, f64) {
        match self {
            BoundarySignal::Sinusoid { .. } => (0.0, f64::INFINITY),
            BoundarySignal::Sampled { times, .. } => (times[0], times[times.len() - 1]),
        }
    }

    /// Conservative (min, max) envelope of the signal over `[0, horizon]`.
    pub fn envelope(&self, horizon: f64) -> (f64, f64) {
        match self {
            BoundarySignal::Sinusoid { mean, components } => {
                let reach: f64 = components.iter().map(|c| c.amplitude.abs()).sum();
                (mean - reach, mean + reach)
            }
            BoundarySignal::Sampled { times, values } => {
                let mut lo = f64::INFINITY;
                let mut hi = f64::NEG_INFINITY;
                for (&t, &v) in times.iter().zip(values) {
                    if t > horizon {
                        break;
                    }
                    lo = lo.min(v);
                    hi = hi.max(v);
                }
                (lo, hi)
            }
        }
    }
}

/// Initial state of the wall: uniform or a sampled profile over `[0, L]`.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialCondition {
    Uniform(f64),
    Profile { x: Vec<f64>, values: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Physics {
    Heat(HeatMaterial),
    Moisture(MoistureMaterial),
}

/// A dimensional single-layer diffusion problem with Dirichlet faces.
#[derive(Debug, Clone)]
pub struct DiffusionProblem {
    pub physics: Physics,
    /// Wall thickness L [m].
    pub thickness: f64,
    pub left: BoundarySignal,
    pub right: BoundarySignal,
    pub initial: InitialCondition,
    /// Simulation horizon tau [s].
    pub horizon: f64,
    /// Characteristic time t_ref [s] used by the dimensionless form.
    pub t_ref: f64,
}

impl DiffusionProblem {
    pub fn validate(&self) -> Result<()> {
        if !(self.thickness > 0.0) {
            return Err(Error::InvalidProblem("thickness must be > 0".into()));
        }
        if !(self.horizon > 0.0) {
            return Err(Error::InvalidProblem("horizon must be > 0".into()));
        }
        if !(self.t_ref > 0.0) {
            return Err(Error::InvalidProblem("t_ref must be > 0".into()));
        }
        if let Physics::Heat(m) = &self.physics {
            m.validate()?;
        }
        for (name, sig) in [("left", &self.left), ("right", &self.right)] {
            let (start, end) = sig.span();
            if start > 0.0 || end < self.horizon {
                return Err(Error::InvalidProblem(format!(
                    "{name} signal spans [{start}, {end}] but the horizon is [0, {}]",
                    self.horizon
                )));
            }
        }
        if let InitialCondition::Profile { x, values } = &self.initial {
            if x.len() != values.len() || x.len() < 2 {
                return Err(Error::InvalidProblem(
                    "initial profile needs at least two samples".into(),
                ));
            }
            if !x.windows(2).all(|w| w[1] > w[0]) {
                return Err(Error::InvalidProblem(
                    "initial profile positions must be strictly increasing".into(),
                ));
            }
        }
        Ok(())
    }

    /// Initial value at position `x` [m].
    pub fn initial_at(&self, x: f64) -> f64 {
        match &self.initial {
            InitialCondition::Uniform(v) => *v,
            InitialCondition::Profile { x: xs, values } => interp_xy(xs, values, x),
        }
    }

    /// The value used to scale the field into dimensionless form: the uniform
    /// initial value, or the mean of the initial profile.
    pub fn value_scale(&self) -> f64 {
        match &self.initial {
            InitialCondition::Uniform(v) => *v,
            InitialCondition::Profile { values, .. } => {
                values.iter().sum::<f64>() / values.len() as f64
            }
        }
    }
}

/// A scalar property of the dimensionless field, e.g. kappa*(v) or xi*(v).
#[derive(Debug, Clone, PartialEq)]
pub enum PropertyFn {
    Constant(f64),
    Affine { slope: f64, intercept: f64 },
    Table { arg: Vec<f64>, val: Vec<f64> },
}

impl PropertyFn {
    pub fn eval(&self, v: f64) -> f64 {
        match self {
            PropertyFn::Constant(c) => *c,
            PropertyFn::Affine { slope, intercept } => slope * v + intercept,
            PropertyFn::Table { arg, val } => {
                let rows: Vec<(f64, f64)> =
                    arg.iter().copied().zip(val.iter().copied()).collect();
                interp_sorted(&rows, v)
            }
        }
    }

    pub fn derivative(&self, v: f64) -> f64 {
        match self {
            PropertyFn::Constant(_) => 0.0,
            PropertyFn::Affine { slope, .. } => *slope,
            PropertyFn::Table { arg, val } => {
                // secant slope of the bracketing segment
                if arg.len() < 2 {
                    return 0.0;
                }
                let hi = arg.partition_point(|&x| x < v).clamp(1, arg.len() - 1);
                (val[hi] - val[hi - 1]) / (arg[hi] - arg[hi - 1])
            }
        }
    }
}

/// Dimensionless constitutive coefficients. Heat is `Unit`; moisture carries
/// kappa*(v) and xi*(v) normalized so both equal one at v = 1.
#[derive(Debug, Clone, PartialEq)]
pub enum Coefficients {
    Unit,
    Varying {
        kappa_star: PropertyFn,
        xi_star: PropertyFn,
    },
}

impl Coefficients {
    pub fn kappa_star(&self, v: f64) -> f64 {
        match self {
            Coefficients::Unit => 1.0,
            Coefficients::Varying { kappa_star, .. } => kappa_star.eval(v),
        }
    }

    pub fn xi_star(&self, v: f64) -> f64 {
        match self {
            Coefficients::Unit => 1.0,
            Coefficients::Varying { xi_star, .. } => xi_star.eval(v),
        }
    }

    pub fn kappa_star_derivative(&self, v: f64) -> f64 {
        match self {
            Coefficients::Unit => 0.0,
            Coefficients::Varying { kappa_star, .. } => kappa_star.derivative(v),
        }
    }

    pub fn is_linear(&self) -> bool {
        match self {
            Coefficients::Unit => true,
            Coefficients::Varying {
                kappa_star,
                xi_star,
            } => {
                matches!(kappa_star, PropertyFn::Constant(_))
                    && matches!(xi_star, PropertyFn::Constant(_))
            }
        }
    }
}

/// A boundary signal seen through the dimensionless scaling: values divided
/// by the field scale, times multiplied by `t_ref`.
#[derive(Debug, Clone)]
pub struct ScaledSignal {
    pub signal: BoundarySignal,
    pub scale: f64,
    pub t_ref: f64,
}

impl ScaledSignal {
    /// Evaluate at dimensionless time `t_star`.
    pub fn sample(&self, t_star: f64) -> Result<f64> {
        Ok(self.signal.sample(t_star * self.t_ref)? / self.scale)
    }
}

/// Dimensionless initial field; `Uniform` means identically one.
#[derive(Debug, Clone)]
pub enum DimlessInitial {
    Uniform,
    Profile { x_star: Vec<f64>, values: Vec<f64> },
}

/// The dimensionless diffusion problem on `x* in [0, 1]`, `t* in [0, horizon]`.
#[derive(Debug, Clone)]
pub struct DimensionlessProblem {
    pub fo: f64,
    pub left: ScaledSignal,
    pub right: ScaledSignal,
    pub initial: DimlessInitial,
    pub coeffs: Coefficients,
    /// Dimensionless horizon tau / t_ref.
    pub horizon: f64,
    /// The value scale (T_0 or P_v0) that maps the field back to physical units.
    pub scale: f64,
}

impl DimensionlessProblem {
    /// Initial dimensionless value at `x_star`.
    pub fn initial_at(&self, x_star: f64) -> f64 {
        match &self.initial {
            DimlessInitial::Uniform => 1.0,
            DimlessInitial::Profile { x_star: xs, values } => interp_xy(xs, values, x_star),
        }
    }
}

/// Scale a dimensional problem to its dimensionless form.
///
/// The field scale is the initial value (uniform case) or the initial profile
/// mean; heat problems are scaled with the Celsius value of T_0. Boundary
/// signals are divided by the same scale, so a uniform initial state maps to
/// the constant field 1.
pub fn nondimensionalize(p: &DiffusionProblem) -> Result<DimensionlessProblem> {
    p.validate()?;
    let scale = p.value_scale();
    if !(scale > 0.0) {
        return Err(Error::InvalidProblem(format!(
            "field scale must be positive, got {scale}"
        )));
    }
    let length2 = p.thickness * p.thickness;
    let (fo, coeffs) = match &p.physics {
        Physics::Heat(m) => {
            m.validate()?;
            let fo = m.conductivity * p.t_ref / (m.volumetric_capacity() * length2);
            (fo, Coefficients::Unit)
        }
        Physics::Moisture(m) => {
            let kappa_ref = m.permeability(scale);
            let xi_ref = m.capacity_at(scale);
            if !(kappa_ref > 0.0) || !(xi_ref > 0.0) {
                return Err(Error::InvalidProblem(
                    "moisture properties must be positive at the initial pressure".into(),
                ));
            }
            let fo = kappa_ref * p.t_ref / (xi_ref * length2);
            let kappa_star = PropertyFn::Affine {
                slope: m.kappa_slope * scale / kappa_ref,
                intercept: m.kappa_intercept / kappa_ref,
            };
            let xi_star = match &m.capacity {
                MoistureCapacity::Constant(_) => PropertyFn::Constant(1.0),
                MoistureCapacity::Tabulated(rows) => PropertyFn::Table {
                    arg: rows.iter().map(|r| r.0 / scale).collect(),
                    val: rows.iter().map(|r| r.1 / xi_ref).collect(),
                },
            };
            (
                fo,
                Coefficients::Varying {
                    kappa_star,
                    xi_star,
                },
            )
        }
    };
    let initial = match &p.initial {
        InitialCondition::Uniform(_) => DimlessInitial::Uniform,
        InitialCondition::Profile { x, values } => DimlessInitial::Profile {
            x_star: x.iter().map(|xi| xi / p.thickness).collect(),
            values: values.iter().map(|v| v / scale).collect(),
        },
    };
    Ok(DimensionlessProblem {
        fo,
        left: ScaledSignal {
            signal: p.left.clone(),
            scale,
            t_ref: p.t_ref,
        },
        right: ScaledSignal {
            signal: p.right.clone(),
            scale,
            t_ref: p.t_ref,
        },
        initial,
        coeffs,
        horizon: p.horizon / p.t_ref,
        scale,
    })
}

/// Identifies which solver produced a field; used for report labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverId {
    Rc { resistances: usize },
    Fdm { intervals: usize },
    Spectral { order: usize },
    Reference,
}

impl SolverId {
    pub fn label(&self) -> String {
        match self {
            SolverId::Rc { resistances } => format!("R{resistances}C"),
            SolverId::Fdm { .. } => "FDM".to_string(),
            SolverId::Spectral { .. } => "Spectral".to_string(),
            SolverId::Reference => "Reference".to_string(),
        }
    }
}

/// Chebyshev coefficient history attached to spectral solutions so that
/// fluxes can be taken from the exact series derivative.
#[derive(Debug, Clone)]
pub struct ModalTrajectory {
    /// Polynomial order n; each row holds n + 1 coefficients.
    pub order: usize,
    /// Row-major: `coeffs[ti * (order + 1) + i]`.
    pub coeffs: Vec<f64>,
}

impl ModalTrajectory {
    pub fn row(&self, ti: usize) -> &[f64] {
        let n = self.order + 1;
        &self.coeffs[ti * n..(ti + 1) * n]
    }
}

/// A space-time field on a rectangular grid with solver provenance.
#[derive(Debug, Clone)]
pub struct SolutionField {
    /// Ascending node positions; `[0, 1]` when dimensionless, `[0, L]` otherwise.
    pub x_nodes: Vec<f64>,
    /// Uniform output instants.
    pub t_samples: Vec<f64>,
    /// Row-major field matrix: `values[ti * nx + xi]`.
    pub values: Vec<f64>,
    pub solver_id: SolverId,
    /// Wall-clock cost of the solve call [s].
    pub cpu_seconds: f64,
    pub dimensionless: bool,
    pub modal: Option<ModalTrajectory>,
}

impl SolutionField {
    pub fn new(
        x_nodes: Vec<f64>,
        t_samples: Vec<f64>,
        values: Vec<f64>,
        solver_id: SolverId,
        cpu_seconds: f64,
        dimensionless: bool,
    ) -> Result<Self> {
        let field = Self {
            x_nodes,
            t_samples,
            values,
            solver_id,
            cpu_seconds,
            dimensionless,
            modal: None,
        };
        field.validate()?;
        Ok(field)
    }

    pub fn validate(&self) -> Result<()> {
        if self.values.len() != self.x_nodes.len() * self.t_samples.len() {
            return Err(Error::Contract(format!(
                "field shape {}x{} does not match {} values",
                self.t_samples.len(),
                self.x_nodes.len(),
                self.values.len()
            )));
        }
        if !self.x_nodes.windows(2).all(|w| w[1] > w[0]) {
            return Err(Error::Contract("x nodes must be ascending".into()));
        }
        if self.t_samples.len() > 1 {
            let dt = self.t_samples[1] - self.t_samples[0];
            let uniform = self
                .t_samples
                .windows(2)
                .all(|w| ((w[1] - w[0]) - dt).abs() <= 1e-9 * dt.abs().max(1.0));
            if !uniform {
                return Err(Error::Contract("t samples must be uniform".into()));
            }
        }
        if !self.values.iter().all(|v| v.is_finite()) {
            return Err(Error::Contract("field contains non-finite values".into()));
        }
        Ok(())
    }

    pub fn nx(&self) -> usize {
        self.x_nodes.len()
    }

    pub fn nt(&self) -> usize {
        self.t_samples.len()
    }

    pub fn at(&self, ti: usize, xi: usize) -> f64 {
        self.values[ti * self.nx() + xi]
    }

    pub fn row(&self, ti: usize) -> &[f64] {
        let nx = self.nx();
        &self.values[ti * nx..(ti + 1) * nx]
    }

    /// Time series of the field at node index `xi`.
    pub fn column(&self, xi: usize) -> Vec<f64> {
        (0..self.nt()).map(|ti| self.at(ti, xi)).collect()
    }
}

/// Map a dimensionless field back to physical units for problem `p`.
/// Inverse of the scaling applied by [`nondimensionalize`]; the round trip
/// reproduces fields to machine precision.
pub fn redimensionalize(field: &SolutionField, p: &DiffusionProblem) -> Result<SolutionField> {
    if !field.dimensionless {
        return Err(Error::Contract(
            "redimensionalize expects a dimensionless field".into(),
        ));
    }
    let horizon_star = p.horizon / p.t_ref;
    let t_end = field.t_samples.last().copied().unwrap_or(0.0);
    if (t_end - horizon_star).abs() > 1e-6 * horizon_star.max(1.0) {
        return Err(Error::Contract(format!(
            "field horizon {t_end} does not match problem horizon {horizon_star}"
        )));
    }
    let scale = p.value_scale();
    Ok(SolutionField {
        x_nodes: field.x_nodes.iter().map(|x| x * p.thickness).collect(),
        t_samples: field.t_samples.iter().map(|t| t * p.t_ref).collect(),
        values: field.values.iter().map(|v| v * scale).collect(),
        solver_id: field.solver_id,
        cpu_seconds: field.cpu_seconds,
        dimensionless: false,
        modal: field.modal.clone(),
    })
}

/// Scale a physical field into dimensionless form (used for RC solutions
/// before error metrics are taken).
pub fn nondimensionalize_field(
    field: &SolutionField,
    p: &DiffusionProblem,
) -> Result<SolutionField> {
    if field.dimensionless {
        return Err(Error::Contract(
            "nondimensionalize_field expects a physical field".into(),
        ));
    }
    let scale = p.value_scale();
    Ok(SolutionField {
        x_nodes: field.x_nodes.iter().map(|x| x / p.thickness).collect(),
        t_samples: field.t_samples.iter().map(|t| t / p.t_ref).collect(),
        values: field.values.iter().map(|v| v / scale).collect(),
        solver_id: field.solver_id,
        cpu_seconds: field.cpu_seconds,
        dimensionless: true,
        modal: field.modal.clone(),
    })
}

/// Uniform output instants in dimensionless time.
#[derive(Debug, Clone)]
pub struct OutputGrid {
    pub times: Vec<f64>,
}

impl OutputGrid {
    /// `samples_per_unit` output instants per dimensionless time unit,
    /// always including both endpoints.
    pub fn new(horizon: f64, samples_per_unit: f64) -> Result<Self> {
        if !(horizon > 0.0 && samples_per_unit > 0.0) {
            return Err(Error::Config(
                "output grid requires positive horizon and sampling rate".into(),
            ));
        }
        let n = (horizon * samples_per_unit).round().max(1.0) as usize;
        let times = (0..=n).map(|i| horizon * i as f64 / n as f64).collect();
        Ok(Self { times })
    }
}
