//! Fixtures shared by the benchmarks.

use epchiral::{
    demo, newton_ep, seed_from_sweep, ExceptionalPoint, MatrixPencil, SeedRegion, Tolerances,
};

/// Seeded demo pencil with the seed and EP of its smallest real-axis gap.
pub fn demo_fixture(n: usize, seed: u64) -> (MatrixPencil, SeedRegion, ExceptionalPoint) {
    let pencil = demo::random_pencil(n, seed);
    let tol = Tolerances::default();
    let seeds = seed_from_sweep(&pencil, (-3.0, 3.0), 1200, &tol).expect("sweep");
    let seed = *seeds
        .iter()
        .min_by(|a, b| a.gap_at_seed.total_cmp(&b.gap_at_seed))
        .expect("at least one repulsion");
    let ep = newton_ep(&pencil, &seed, &tol).expect("newton converges");
    (pencil, seed, ep)
}
