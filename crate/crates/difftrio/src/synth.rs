//! Deterministic synthetic stand-in for a year of measured hourly surface
//! temperatures: seasonal and daily sinusoids plus seeded smooth synoptic
//! noise, shaped like real wall monitoring data (cold season early in the
//! record, a warm rise between days ~110 and ~290).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::csvio::{BcCsv, BcRow};

/// Exterior signal bounds [C]; every generated sample stays inside.
pub const EXTERIOR_BOUNDS: (f64, f64) = (-9.0, 35.0);
/// Interior signal bounds [C].
pub const INTERIOR_BOUNDS: (f64, f64) = (19.0, 26.0);

const HOURS_PER_YEAR: usize = 8760;

struct Ar1 {
    state: f64,
    rho: f64,
    sigma_eps: f64,
    clamp: f64,
}

impl Ar1 {
    fn new(correlation_hours: f64, sigma: f64, clamp: f64) -> Self {
        let rho = (-1.0 / correlation_hours).exp();
        Self {
            state: 0.0,
            rho,
            sigma_eps: sigma * (1.0 - rho * rho).sqrt(),
            clamp,
        }
    }

    fn step(&mut self, rng: &mut ChaCha8Rng) -> f64 {
        // Box-Muller standard normal
        let u1: f64 = rng.r#gen::<f64>().max(1e-12);
        let u2: f64 = rng.r#gen::<f64>();
        let z = (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos();
        self.state = (self.rho * self.state + self.sigma_eps * z).clamp(-self.clamp, self.clamp);
        self.state
    }
}

/// Generate one year (8760 hourly rows) of synthetic surface temperatures.
/// Identical seeds produce identical tables.
pub fn synth_annual_bc(seed: u64) -> BcCsv {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // multi-day weather systems outside, mild indoor drift
    let mut synoptic = Ar1::new(72.0, 3.2, 8.0);
    let mut indoor = Ar1::new(24.0, 0.35, 1.0);

    let two_pi = 2.0 * std::f64::consts::PI;
    let mut rows = Vec::with_capacity(HOURS_PER_YEAR);
    for h in 0..HOURS_PER_YEAR {
        let t = h as f64 * 3600.0;
        let day = h as f64 / 24.0;
        // warmest around day 290, coldest around day 107
        let annual = 9.0 * (two_pi * (day - 290.0) / 365.0).cos();
        let daily = 4.0 * (two_pi * (t / 86_400.0) - 2.1).sin();
        let left = 13.0 + annual + daily + synoptic.step(&mut rng);
        let right = 22.5
            + 0.8 * (two_pi * (day - 290.0) / 365.0).cos()
            + 0.5 * (two_pi * (t / 86_400.0) - 2.8).sin()
            + indoor.step(&mut rng);
        rows.push(BcRow {
            time_s: t,
            left,
            right,
        });
    }
    BcCsv::new(Some("time [s], temperatures [C]".into()), rows)
}
