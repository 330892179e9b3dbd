//! Built-in case studies: a linear heat slab with sinusoidal faces, a
//! nonlinear vapor-diffusion slab, and a year-long wall driven by measured
//! (or synthetic) hourly surface temperatures.

use crate::error::Result;
use crate::model::{
    BoundarySignal, DiffusionProblem, HeatMaterial, InitialCondition, MoistureCapacity,
    MoistureMaterial, Physics, SineComponent,
};

/// Saturation vapor pressure over water, Buck-type fit:
/// `611.21 exp(17.502 T / (240.97 + T))` with `T` in degrees Celsius.
pub fn saturation_pressure(t_celsius: f64) -> f64 {
    611.21 * (17.502 * t_celsius / (240.97 + t_celsius)).exp()
}

/// Hour in seconds.
pub const HOUR: f64 = 3600.0;

/// Linear heat diffusion through a 0.1 m concrete slab over 24 h. Faces
/// swing sinusoidally around 20 C: +-10 C with a 24 h period on the left,
/// +-4 C with a 3 h period on the right.
pub fn linear_heat_case() -> DiffusionProblem {
    DiffusionProblem {
        physics: Physics::Heat(HeatMaterial {
            conductivity: 2.0,
            density: 1000.0,
            specific_heat: 2000.0,
        }),
        thickness: 0.1,
        left: BoundarySignal::sinusoid(
            20.0,
            vec![SineComponent {
                amplitude: 10.0,
                period: 24.0 * HOUR,
            }],
        ),
        right: BoundarySignal::sinusoid(
            20.0,
            vec![SineComponent {
                amplitude: 4.0,
                period: 3.0 * HOUR,
            }],
        ),
        initial: InitialCondition::Uniform(20.0),
        horizon: 24.0 * HOUR,
        t_ref: HOUR,
    }
}

/// Nonlinear isothermal vapor diffusion through a 0.1 m aerated-concrete
/// slab over 72 h. Constant capacity, affine pressure-dependent
/// permeability. The faces carry relative-humidity signals around 0.5
/// (0.1..0.9 with a 12 h period on the left, 0.4..0.6 with a 6 h period on
/// the right) converted to vapor pressure at 25 C; the initial state is the
/// mid-range pressure 0.5 * psat(25 C).
pub fn nonlinear_moisture_case() -> DiffusionProblem {
    let psat = saturation_pressure(25.0);
    DiffusionProblem {
        physics: Physics::Moisture(MoistureMaterial {
            kappa_slope: 6.72e-13,
            kappa_intercept: 3e-10,
            capacity: MoistureCapacity::Constant(1.88e-2),
        }),
        thickness: 0.1,
        left: BoundarySignal::sinusoid(
            0.5 * psat,
            vec![SineComponent {
                amplitude: 0.4 * psat,
                period: 12.0 * HOUR,
            }],
        ),
        right: BoundarySignal::sinusoid(
            0.5 * psat,
            vec![SineComponent {
                amplitude: 0.1 * psat,
                period: 6.0 * HOUR,
            }],
        ),
        initial: InitialCondition::Uniform(0.5 * psat),
        horizon: 72.0 * HOUR,
        t_ref: HOUR,
    }
}

/// Year-long heat conduction through a 0.5 m masonry wall driven by sampled
/// surface temperatures. The initial state is the linear reconstruction
/// between the first samples of the two signals.
pub fn annual_wall_case(left: BoundarySignal, right: BoundarySignal) -> Result<DiffusionProblem> {
    let (start_l, end_l) = left.span();
    let (start_r, end_r) = right.span();
    let horizon = end_l.min(end_r);
    let l0 = left.sample(start_l)?;
    let r0 = right.sample(start_r)?;
    let thickness = 0.5;
    let p = DiffusionProblem {
        physics: Physics::Heat(HeatMaterial {
            conductivity: 2.48,
            density: 2.8e6,
            specific_heat: 1.0,
        }),
        thickness,
        left,
        right,
        initial: init_linear_profile(l0, r0, thickness),
        horizon,
        t_ref: HOUR,
    };
    p.validate()?;
    Ok(p)
}

/// Affine reconstruction between the two boundary values, used as the
/// initial condition of the measured-data case.
pub fn init_linear_profile(left_value: f64, right_value: f64, thickness: f64) -> InitialCondition {
    InitialCondition::Profile {
        x: vec![0.0, thickness],
        values: vec![left_value, right_value],
    }
}

/// Default grid intervals of the shared output lattice per case: 100 for
/// the 0.1 m slabs (1 mm spacing), 50 for the 0.5 m wall (10 mm spacing).
pub fn default_intervals(p: &DiffusionProblem) -> usize {
    if p.thickness > 0.25 {
        50
    } else {
        100
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn saturation_pressure_at_25c() {
        // frozen from a hand evaluation of the documented fit; published
        // psychrometric tables give 3169 Pa
        assert_relative_eq!(
            saturation_pressure(25.0),
            3167.0345307107345,
            max_relative = 1e-12
        );
    }

    #[test]
    fn linear_profile_reconstruction() {
        let ic = init_linear_profile(0.0, 1.0, 0.5);
        let p = DiffusionProblem {
            initial: ic,
            ..linear_heat_case()
        };
        assert_relative_eq!(p.initial_at(0.25), 0.5);
        let same = init_linear_profile(7.0, 7.0, 0.5);
        let p2 = DiffusionProblem {
            initial: same,
            ..linear_heat_case()
        };
        assert_relative_eq!(p2.initial_at(0.31), 7.0);
    }

    #[test]
    fn profile_matches_boundary_samples_at_ends() {
        let left = BoundarySignal::sampled(vec![0.0, HOUR], vec![4.5, 5.0]).unwrap();
        let right = BoundarySignal::sampled(vec![0.0, HOUR], vec![21.0, 21.2]).unwrap();
        let p = annual_wall_case(left, right).unwrap();
        assert_relative_eq!(p.initial_at(0.0), p.left.sample(0.0).unwrap());
        assert_relative_eq!(p.initial_at(0.5), p.right.sample(0.0).unwrap());
    }

    #[test]
    fn case_fourier_numbers() {
        let d1 = crate::model::nondimensionalize(&linear_heat_case()).unwrap();
        assert_relative_eq!(d1.fo, 0.36, max_relative = 1e-12);
        let d2 = crate::model::nondimensionalize(&nonlinear_moisture_case()).unwrap();
        assert_relative_eq!(d2.fo, 2.612151578908353e-2, max_relative = 1e-12);
    }
}
