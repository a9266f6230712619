#![allow(dead_code)]

use epchiral::demo;
use epchiral::{
    find_exceptional_points, newton_ep, seed_from_sweep, Complex64, ExceptionalPoint, MatrixPencil,
    SeedRegion, Tolerances,
};

pub const DEMO_N: usize = 10;
pub const DEMO_SEED: u64 = 42;
pub const DEMO_INTERVAL: (f64, f64) = (-3.0, 3.0);
pub const DEMO_STEPS: usize = 1200;

/// A located EP of a pencil together with every EP found on the same sweep.
pub struct Located {
    pub pencil: MatrixPencil,
    pub seed: SeedRegion,
    pub ep: ExceptionalPoint,
    pub all: Vec<ExceptionalPoint>,
}

impl Located {
    /// Distance from `ep` to the nearest other located EP (its conjugate included).
    pub fn isolation(&self) -> f64 {
        self.all
            .iter()
            .map(|e| (e.lambda_c - self.ep.lambda_c).norm())
            .filter(|&d| d > 1e-8)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn known(&self) -> Vec<Complex64> {
        self.all.iter().map(|e| e.lambda_c).collect()
    }
}

/// The EP attached to the smallest real-axis gap of `pencil`.
pub fn sharpest(pencil: MatrixPencil, interval: (f64, f64), steps: usize) -> Located {
    let tol = Tolerances::default();
    let seeds = seed_from_sweep(&pencil, interval, steps, &tol).unwrap();
    let seed = *seeds
        .iter()
        .min_by(|a, b| a.gap_at_seed.total_cmp(&b.gap_at_seed))
        .expect("the sweep has at least one repulsion");
    let ep = newton_ep(&pencil, &seed, &tol).unwrap();
    let all = find_exceptional_points(&pencil, interval, steps, &tol).unwrap();
    Located {
        pencil,
        seed,
        ep,
        all,
    }
}

pub fn demo_sharpest() -> Located {
    sharpest(
        demo::random_pencil(DEMO_N, DEMO_SEED),
        DEMO_INTERVAL,
        DEMO_STEPS,
    )
}

/// Sweep window for a two-level instance; contains both `Re λ_c` values.
pub fn two_level_interval(lambda_c: Complex64) -> (f64, f64) {
    let half = 2.0 * lambda_c.norm() + 1.0;
    (-half, half)
}
