//! The linear pencil `H(λ) = H0 + λ·H1` with real symmetric `H0`, `H1`.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::tolerances::Tolerances;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

#[derive(Debug, thiserror::Error)]
pub enum PencilError {
    #[error("pencil dimension must be at least 2, got {0}")]
    TooSmall(usize),
    #[error("{name} has shape {rows}x{cols}, expected {n}x{n}")]
    Shape {
        name: &'static str,
        rows: usize,
        cols: usize,
        n: usize,
    },
    #[error("{name} is not symmetric: |a[{i}][{j}] - a[{j}][{i}]| = {diff:e}")]
    NotSymmetric {
        name: &'static str,
        i: usize,
        j: usize,
        diff: f64,
    },
    #[error("{name} contains a non-finite entry at ({i}, {j})")]
    NonFinite {
        name: &'static str,
        i: usize,
        j: usize,
    },
    #[error("invalid pencil JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// Pair of real symmetric matrices defining `H(λ) = H0 + λ·H1`.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixPencil {
    h0: DMatrix<f64>,
    h1: DMatrix<f64>,
}

impl MatrixPencil {
    pub fn new(h0: DMatrix<f64>, h1: DMatrix<f64>) -> Result<Self, PencilError> {
        Self::with_tolerance(h0, h1, Tolerances::default().pencil_symmetry)
    }

    pub fn with_tolerance(
        h0: DMatrix<f64>,
        h1: DMatrix<f64>,
        symmetry_tol: f64,
    ) -> Result<Self, PencilError> {
        let n = h0.nrows();
        if n < 2 {
            return Err(PencilError::TooSmall(n));
        }
        for (name, m) in [("h0", &h0), ("h1", &h1)] {
            if m.nrows() != n || m.ncols() != n {
                return Err(PencilError::Shape {
                    name,
                    rows: m.nrows(),
                    cols: m.ncols(),
                    n,
                });
            }
            for i in 0..n {
                for j in 0..n {
                    if !m[(i, j)].is_finite() {
                        return Err(PencilError::NonFinite { name, i, j });
                    }
                }
            }
            for i in 0..n {
                for j in (i + 1)..n {
                    let diff = (m[(i, j)] - m[(j, i)]).abs();
                    if diff > symmetry_tol {
                        return Err(PencilError::NotSymmetric { name, i, j, diff });
                    }
                }
            }
        }
        Ok(Self { h0, h1 })
    }

    /// Builds a pencil from row-major nested vectors.
    pub fn from_rows(h0: &[Vec<f64>], h1: &[Vec<f64>]) -> Result<Self, PencilError> {
        let to_matrix = |name: &'static str, rows: &[Vec<f64>]| {
            let n = rows.len();
            if let Some(bad) = rows.iter().find(|r| r.len() != n) {
                return Err(PencilError::Shape {
                    name,
                    rows: n,
                    cols: bad.len(),
                    n,
                });
            }
            Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
        };
        let a = to_matrix("h0", h0)?;
        let b = to_matrix("h1", h1)?;
        if b.nrows() != a.nrows() {
            return Err(PencilError::Shape {
                name: "h1",
                rows: b.nrows(),
                cols: b.ncols(),
                n: a.nrows(),
            });
        }
        Self::new(a, b)
    }

    pub fn n(&self) -> usize {
        self.h0.nrows()
    }

    pub fn h0(&self) -> &DMatrix<f64> {
        &self.h0
    }

    pub fn h1(&self) -> &DMatrix<f64> {
        &self.h1
    }

    /// `H(λ) = H0 + λ·H1`.
    pub fn evaluate(&self, lambda: Complex64) -> CMatrix {
        evaluate(self, lambda)
    }

    /// The pencil `(Qᵀ H0 Q, Qᵀ H1 Q)` for a real orthogonal `q`.
    pub fn conjugated_by(&self, q: &DMatrix<f64>) -> Self {
        let sym = |m: DMatrix<f64>| {
            let t = m.transpose();
            (m + t) * 0.5
        };
        Self {
            h0: sym(q.transpose() * &self.h0 * q),
            h1: sym(q.transpose() * &self.h1 * q),
        }
    }

    /// Frobenius norm of `H(λ)`, used as the spectral scale for residual checks.
    pub fn scale_at(&self, lambda: Complex64) -> f64 {
        self.evaluate(lambda).norm()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&PencilFile::from(self)).expect("pencil serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, PencilError> {
        let f: PencilFile = serde_json::from_str(s)?;
        f.try_into()
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, PencilError> {
        let s = std::fs::read_to_string(path)?;
        Self::from_json(&s)
    }
}

/// `H0 + λ·H1`; symmetric (not Hermitian) for complex λ.
pub fn evaluate(pencil: &MatrixPencil, lambda: Complex64) -> CMatrix {
    let n = pencil.n();
    CMatrix::from_fn(n, n, |i, j| {
        Complex64::from(pencil.h0[(i, j)]) + lambda * pencil.h1[(i, j)]
    })
}

/// On-disk representation: `{"n": int, "h0": [[...]], "h1": [[...]]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PencilFile {
    pub n: usize,
    pub h0: Vec<Vec<f64>>,
    pub h1: Vec<Vec<f64>>,
}

impl From<&MatrixPencil> for PencilFile {
    fn from(p: &MatrixPencil) -> Self {
        let rows = |m: &DMatrix<f64>| {
            (0..m.nrows())
                .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
                .collect()
        };
        Self {
            n: p.n(),
            h0: rows(&p.h0),
            h1: rows(&p.h1),
        }
    }
}

impl TryFrom<PencilFile> for MatrixPencil {
    type Error = PencilError;

    fn try_from(f: PencilFile) -> Result<Self, Self::Error> {
        if f.h0.len() != f.n {
            return Err(PencilError::Shape {
                name: "h0",
                rows: f.h0.len(),
                cols: f.h0.first().map_or(0, Vec::len),
                n: f.n,
            });
        }
        MatrixPencil::from_rows(&f.h0, &f.h1)
    }
}
