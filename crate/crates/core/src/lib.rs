//! Exceptional points of complex-symmetric matrix pencils `H(λ) = H0 + λ·H1`.
//!
//! The crate is organised bottom-up:
//!
//! - [`pencil`] and [`eigen`]: the pencil itself and a dense eigensolver for
//!   complex symmetric matrices with the biorthogonal (unconjugated) left system.
//! - [`two_level`]: the closed-form 2×2 model.
//! - [`locator`]: seeding from real-axis level repulsion, Newton refinement of
//!   the coalescence conditions and the square-root (Puiseux) fit.
//! - [`continuation`]: eigensystem continuation in the complex λ-plane, loop
//!   monodromy and the energy/width crossing classification.
//! - [`reduction`]: projection onto the coalescing pair, effective two-level
//!   parameters and the chirality of the wavefunction at the EP.
//! - [`demo`]: the seeded random pencil generator.

pub mod complex_json;
pub mod continuation;
pub mod demo;
pub mod eigen;
pub mod locator;
pub mod pencil;
pub mod reduction;
pub mod tolerances;
pub mod two_level;

pub use num_complex::Complex64;

pub use continuation::{
    classify_crossing, continue_along, monodromy, monodromy_along, ContinuationError,
    ContinuationOptions, ContinuationState, CrossingReport, LoopPath, MonodromyResult,
    SignedPermutation,
};
pub use eigen::{
    biorthogonal_normalize, completeness_residual, eigendecompose, EigenError, EigenSystem,
    SelfOrthogonality,
};
pub use locator::{
    char_poly_eval, find_exceptional_points, newton_ep, refine_ep, seed_from_sweep, verify_ep,
    verify_ep_in, ExceptionalPoint, LocatorError, PuiseuxFit, SeedRegion,
};
pub use pencil::{evaluate, CMatrix, CVector, MatrixPencil, PencilError};
pub use reduction::{
    chirality, compare_reduction, effective_pencil, extract_effective_params, predict_ep, reduce,
    ChiralityResult, EffectiveTwoLevel, ReductionComparison, ReductionError,
};
pub use tolerances::Tolerances;
pub use two_level::{ThetaAngle, TwoLevelError, TwoLevelParams};

/// Shorthand for a complex number with the given parts.
#[inline]
pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}
