//! Seeded random instances.
//!
//! All randomness goes through one [`SplitMix64`] generator (64-bit state,
//! seeded directly with the user's `u64`). Standard normals are drawn with
//! `rand_distr::StandardNormal`. For a pencil of size `n` the draw order is
//! the upper triangle of `h0` row by row (diagonal included), then the upper
//! triangle of `h1`; lower triangles are mirrored so both matrices are
//! exactly symmetric.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;
pub use rand_xoshiro::SplitMix64;

use crate::pencil::MatrixPencil;
use crate::two_level::TwoLevelParams;

pub const DEFAULT_SEED: u64 = 42;

pub fn rng(seed: u64) -> SplitMix64 {
    SplitMix64::seed_from_u64(seed)
}

fn symmetric_normal<R: Rng>(n: usize, rng: &mut R) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let x: f64 = rng.sample(StandardNormal);
            m[(i, j)] = x;
            m[(j, i)] = x;
        }
    }
    m
}

/// Random pencil with independent standard-normal upper-triangle entries.
pub fn random_pencil_with<R: Rng>(n: usize, rng: &mut R) -> MatrixPencil {
    let h0 = symmetric_normal(n, rng);
    let h1 = symmetric_normal(n, rng);
    MatrixPencil::new(h0, h1).expect("mirrored matrices are symmetric")
}

/// Deterministic demo pencil for a given size and seed.
pub fn random_pencil(n: usize, seed: u64) -> MatrixPencil {
    random_pencil_with(n, &mut rng(seed))
}

/// Random real orthogonal matrix: QR of a Gaussian matrix with the sign of
/// `R`'s diagonal folded into `Q`.
pub fn random_orthogonal<R: Rng>(n: usize, rng: &mut R) -> DMatrix<f64> {
    let g = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// Two-level parameters with `|ε1−ε2|` and `|ω1−ω2|` in `[0.5, 2]`, random
/// signs and offsets, and `|sin 2φ| > min_sin`.
pub fn random_two_level<R: Rng>(rng: &mut R, min_sin: f64) -> TwoLevelParams {
    let sign = |rng: &mut R| if rng.random_bool(0.5) { 1.0 } else { -1.0 };
    let de = sign(rng) * rng.random_range(0.5..2.0);
    let dw = sign(rng) * rng.random_range(0.5..2.0);
    let e_mid: f64 = rng.random_range(-1.0..1.0);
    let w_mid: f64 = rng.random_range(-1.0..1.0);
    let phi = loop {
        let phi: f64 = rng.random_range(0.0..std::f64::consts::PI);
        if (2.0 * phi).sin().abs() > min_sin {
            break phi;
        }
    };
    TwoLevelParams::new(
        e_mid + de / 2.0,
        e_mid - de / 2.0,
        w_mid + dw / 2.0,
        w_mid - dw / 2.0,
        phi,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_per_seed() {
        assert_eq!(random_pencil(10, 42), random_pencil(10, 42));
        assert_ne!(random_pencil(10, 42), random_pencil(10, 43));
        assert_eq!(
            random_pencil(10, 42).to_json(),
            random_pencil(10, 42).to_json()
        );
    }

    #[test]
    fn two_dimensional_instance_is_valid() {
        let p = random_pencil(2, 7);
        assert_eq!(p.n(), 2);
        assert!(MatrixPencil::from_json(&p.to_json()).is_ok());
    }

    #[test]
    fn orthogonal_is_orthogonal() {
        let mut r = rng(1);
        let q = random_orthogonal(6, &mut r);
        let err = (q.transpose() * &q - DMatrix::identity(6, 6)).amax();
        assert!(err < 1e-13);
    }

    #[test]
    fn two_level_respects_coupling_bound() {
        let mut r = rng(5);
        for _ in 0..200 {
            let p = random_two_level(&mut r, 0.1);
            assert!((2.0 * p.phi).sin().abs() > 0.1);
            assert!((p.eps1 - p.eps2).abs() >= 0.5 - 1e-12);
            assert!((p.omega1 - p.omega2).abs() >= 0.5 - 1e-12);
        }
    }
}
