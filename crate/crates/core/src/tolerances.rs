//! Numerical thresholds shared across the crate.
//!
//! Defaults are the values the library is tested against; the CLI can
//! override the eigen residual and Newton residual.

/// Configurable thresholds. `Default` gives the reference values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Absolute per-entry symmetry tolerance for real pencil matrices.
    pub pencil_symmetry: f64,
    /// Absolute per-entry symmetry tolerance for complex matrices passed to the eigensolver.
    pub matrix_symmetry: f64,
    /// Eigenpair residual bound, relative to the spectral scale of the matrix.
    pub eig_residual: f64,
    /// Unit-scaled self-orthogonality below which a level is near-defective.
    pub near_defective: f64,
    /// Residual required for Newton convergence at an EP.
    pub newton_residual: f64,
    /// Update-norm threshold for Newton convergence.
    pub newton_step: f64,
    /// QR sweeps allowed per eigenvalue before giving up.
    pub qr_iterations_per_eigenvalue: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            pencil_symmetry: 1e-12,
            matrix_symmetry: 1e-10,
            eig_residual: 1e-10,
            near_defective: 1e-6,
            newton_residual: 1e-9,
            newton_step: 1e-12,
            qr_iterations_per_eigenvalue: 60,
        }
    }
}
