//! Dense eigensolver for complex symmetric matrices and the biorthogonal system.
//!
//! The right eigenvectors come from a Hessenberg reduction, a shifted QR
//! iteration to complex Schur form and back-substitution on the triangular
//! factor, polished by inverse iteration when the residual is above
//! tolerance. Left eigenvectors are never computed: for `Hᵀ = H` the row
//! vector `⟨ψ̃_k|` has the same components as `|ψ_k⟩`, so every biorthogonal
//! product here is the unconjugated `uᵀv`.

use std::cmp::Ordering;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::pencil::{CMatrix, CVector, MatrixPencil};
use crate::tolerances::Tolerances;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EigenError {
    #[error("matrix must be square and non-empty, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not symmetric: |a[{i}][{j}] - a[{j}][{i}]| = {diff:e}")]
    NonSymmetricInput { i: usize, j: usize, diff: f64 },
    #[error(
        "QR iteration did not converge after {iterations} sweeps (active block ends at {index})"
    )]
    ConvergenceFailure { iterations: usize, index: usize },
    #[error("levels {levels:?} are near-defective; the eigenbasis is incomplete")]
    DefectivePresent { levels: Vec<usize> },
}

/// Unconjugated bilinear product `uᵀv`.
#[inline]
pub fn bilinear(u: &CVector, v: &CVector) -> Complex64 {
    u.iter().zip(v.iter()).map(|(a, b)| a * b).sum()
}

/// `|⟨ψ̃|ψ⟩|` of a level after scaling `ψ` to unit 2-norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelfOrthogonality {
    pub level_index: usize,
    pub value: f64,
}

/// Unit-scaled self-orthogonality of a single vector, in `[0, 1]`.
pub fn unit_self_orthogonality(v: &CVector) -> f64 {
    let n2 = v.norm_squared();
    if n2 == 0.0 {
        return 0.0;
    }
    (bilinear(v, v).norm() / n2).min(1.0)
}

/// Eigenvalues and right eigenvectors of `H(λ)` at one parameter value.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    /// Parameter value, when the matrix came from a pencil.
    pub lambda: Option<Complex64>,
    /// Ascending by real part, ties by imaginary part.
    pub values: Vec<Complex64>,
    pub right_vectors: Vec<CVector>,
    /// `⟨ψ̃_k|ψ_k⟩ = ψ_kᵀ ψ_k`.
    pub biortho_norms: Vec<Complex64>,
    /// Set by [`biorthogonal_normalize`] for levels that could not be scaled.
    pub near_defective: Vec<bool>,
}

impl EigenSystem {
    pub fn n(&self) -> usize {
        self.values.len()
    }

    /// Solves `H(λ)` of `pencil` and records `λ`.
    pub fn at(
        pencil: &MatrixPencil,
        lambda: Complex64,
        tol: &Tolerances,
    ) -> Result<Self, EigenError> {
        let mut sys = eigendecompose(&pencil.evaluate(lambda), tol)?;
        sys.lambda = Some(lambda);
        Ok(sys)
    }

    pub fn self_orthogonality(&self, k: usize) -> SelfOrthogonality {
        SelfOrthogonality {
            level_index: k,
            value: unit_self_orthogonality(&self.right_vectors[k]),
        }
    }

    pub fn self_orthogonalities(&self) -> Vec<SelfOrthogonality> {
        (0..self.n()).map(|k| self.self_orthogonality(k)).collect()
    }

    /// Smallest `|E_j - E_k|` over all pairs.
    pub fn min_gap(&self) -> f64 {
        let mut best = f64::INFINITY;
        for j in 0..self.n() {
            for k in (j + 1)..self.n() {
                best = best.min((self.values[j] - self.values[k]).norm());
            }
        }
        best
    }

    /// Largest eigenvalue magnitude.
    pub fn spectral_radius(&self) -> f64 {
        self.values.iter().map(|e| e.norm()).fold(0.0, f64::max)
    }

    /// Matrix of unconjugated overlaps `ψ_jᵀ ψ_k`.
    pub fn overlap_matrix(&self) -> CMatrix {
        let n = self.n();
        CMatrix::from_fn(n, n, |j, k| {
            bilinear(&self.right_vectors[j], &self.right_vectors[k])
        })
    }
}

/// Full eigensystem of a complex symmetric matrix.
pub fn eigendecompose(matrix: &CMatrix, tol: &Tolerances) -> Result<EigenSystem, EigenError> {
    let n = matrix.nrows();
    if n == 0 || matrix.ncols() != n {
        return Err(EigenError::NotSquare {
            rows: matrix.nrows(),
            cols: matrix.ncols(),
        });
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let diff = (matrix[(i, j)] - matrix[(j, i)]).norm();
            if diff > tol.matrix_symmetry {
                return Err(EigenError::NonSymmetricInput { i, j, diff });
            }
        }
    }

    let (mut t, mut z) = hessenberg(matrix);
    schur_qr(&mut t, &mut z, tol.qr_iterations_per_eigenvalue)?;
    let raw_values: Vec<Complex64> = (0..n).map(|k| t[(k, k)]).collect();
    let raw_vectors = triangular_eigenvectors(&t, &z);

    let scale = matrix.norm().max(f64::MIN_POSITIVE);
    let mut pairs: Vec<(Complex64, CVector)> = raw_values
        .into_iter()
        .zip(raw_vectors)
        .map(|(e, v)| {
            let v = polish(matrix, e, v, tol.eig_residual * scale);
            (e, gauge(v))
        })
        .collect();
    pairs.sort_by(|a, b| order_values(&a.0, &b.0));

    let values: Vec<Complex64> = pairs.iter().map(|p| p.0).collect();
    let right_vectors: Vec<CVector> = pairs.into_iter().map(|p| p.1).collect();
    let biortho_norms = right_vectors.iter().map(|v| bilinear(v, v)).collect();
    Ok(EigenSystem {
        lambda: None,
        values,
        right_vectors,
        biortho_norms,
        near_defective: vec![false; n],
    })
}

fn order_values(a: &Complex64, b: &Complex64) -> Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

/// Scales each vector to `⟨ψ̃_k|ψ_k⟩ = 1` using the principal square root of its
/// current norm. Levels whose unit-scaled self-orthogonality is below the
/// near-defective threshold are flagged and left as they are.
pub fn biorthogonal_normalize(mut system: EigenSystem, tol: &Tolerances) -> EigenSystem {
    for k in 0..system.n() {
        let v = &system.right_vectors[k];
        if unit_self_orthogonality(v) < tol.near_defective {
            system.near_defective[k] = true;
            system.biortho_norms[k] = bilinear(v, v);
            continue;
        }
        let root = bilinear(v, v).sqrt();
        let scaled = v.map(|x| x / root);
        system.biortho_norms[k] = bilinear(&scaled, &scaled);
        system.right_vectors[k] = scaled;
        system.near_defective[k] = false;
    }
    system
}

/// Max-entry magnitude of `Σ_k |ψ_k⟩⟨ψ̃_k| / ⟨ψ̃_k|ψ_k⟩ − 1`.
pub fn completeness_residual(system: &EigenSystem, tol: &Tolerances) -> Result<f64, EigenError> {
    let levels: Vec<usize> = (0..system.n())
        .filter(|&k| {
            system.near_defective[k]
                || unit_self_orthogonality(&system.right_vectors[k]) < tol.near_defective
        })
        .collect();
    if !levels.is_empty() {
        return Err(EigenError::DefectivePresent { levels });
    }
    let n = system.n();
    let mut sum = CMatrix::identity(n, n).map(|x: Complex64| -x);
    for v in &system.right_vectors {
        let norm = bilinear(v, v);
        sum += (v * v.transpose()).map(|x| x / norm);
    }
    Ok(sum.iter().map(|z| z.norm()).fold(0.0, f64::max))
}

/// Householder reduction `A = Q H Q^H`; returns `(H, Q)`.
fn hessenberg(a: &CMatrix) -> (CMatrix, CMatrix) {
    let n = a.nrows();
    let mut h = a.clone();
    let mut q = CMatrix::identity(n, n);
    for k in 0..n.saturating_sub(2) {
        let len = n - k - 1;
        let mut v = CVector::from_fn(len, |i, _| h[(k + 1 + i, k)]);
        let alpha_norm = v.norm();
        if alpha_norm == 0.0 {
            continue;
        }
        let x0 = v[0];
        let phase = if x0.norm() == 0.0 {
            Complex64::new(1.0, 0.0)
        } else {
            x0 / x0.norm()
        };
        v[0] += phase * alpha_norm;
        let vn = v.norm();
        if vn == 0.0 {
            continue;
        }
        v /= Complex64::from(vn);
        // H <- P H P with P = I - 2 v v^H acting on rows/cols k+1..n
        for col in 0..n {
            let mut s = Complex64::new(0.0, 0.0);
            for i in 0..len {
                s += v[i].conj() * h[(k + 1 + i, col)];
            }
            s *= 2.0;
            for i in 0..len {
                h[(k + 1 + i, col)] -= v[i] * s;
            }
        }
        for row in 0..n {
            let mut s = Complex64::new(0.0, 0.0);
            for i in 0..len {
                s += h[(row, k + 1 + i)] * v[i];
            }
            s *= 2.0;
            for i in 0..len {
                h[(row, k + 1 + i)] -= s * v[i].conj();
            }
            let mut s = Complex64::new(0.0, 0.0);
            for i in 0..len {
                s += q[(row, k + 1 + i)] * v[i];
            }
            s *= 2.0;
            for i in 0..len {
                q[(row, k + 1 + i)] -= s * v[i].conj();
            }
        }
        for i in (k + 2)..n {
            h[(i, k)] = Complex64::new(0.0, 0.0);
        }
    }
    (h, q)
}

/// Complex Givens rotation `G = [[c, s], [-s̄, c]]` with `G (a, b)ᵀ = (r, 0)ᵀ`.
fn givens(a: Complex64, b: Complex64) -> (f64, Complex64) {
    let r = a.norm().hypot(b.norm());
    if r == 0.0 {
        return (1.0, Complex64::new(0.0, 0.0));
    }
    if a.norm() == 0.0 {
        return (0.0, Complex64::new(1.0, 0.0));
    }
    let c = a.norm() / r;
    let s = (a / a.norm()) * b.conj() / r;
    (c, s)
}

/// Explicitly shifted QR on an upper Hessenberg matrix until it is triangular.
/// Rotations are applied to the full matrix and accumulated into `z` so that
/// on return `A = Z T Z^H`.
fn schur_qr(h: &mut CMatrix, z: &mut CMatrix, per_eigenvalue: usize) -> Result<(), EigenError> {
    let n = h.nrows();
    if n < 2 {
        return Ok(());
    }
    let eps = f64::EPSILON;
    let fro = h.norm().max(f64::MIN_POSITIVE);
    let mut hi = n - 1;
    let mut its = 0usize;
    let mut total = 0usize;
    let mut rotations: Vec<(f64, Complex64)> = Vec::with_capacity(n);

    while hi > 0 {
        let mut lo = hi;
        while lo > 0 {
            let off = h[(lo, lo - 1)].norm();
            let mut diag = h[(lo - 1, lo - 1)].norm() + h[(lo, lo)].norm();
            if diag == 0.0 {
                diag = fro;
            }
            if off <= eps * diag {
                h[(lo, lo - 1)] = Complex64::new(0.0, 0.0);
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            hi -= 1;
            its = 0;
            continue;
        }
        its += 1;
        total += 1;
        if its > per_eigenvalue {
            return Err(EigenError::ConvergenceFailure {
                iterations: total,
                index: hi,
            });
        }

        let mu = if its % 11 == 10 {
            // exceptional shift to break cycles
            h[(hi, hi)] + Complex64::new(0.75 * h[(hi, hi - 1)].norm(), 0.0)
        } else {
            let a = h[(hi - 1, hi - 1)];
            let b = h[(hi - 1, hi)];
            let c = h[(hi, hi - 1)];
            let d = h[(hi, hi)];
            let half = (a - d) * 0.5;
            let disc = (half * half + b * c).sqrt();
            let mean = (a + d) * 0.5;
            let m1 = mean + disc;
            let m2 = mean - disc;
            if (m1 - d).norm() <= (m2 - d).norm() {
                m1
            } else {
                m2
            }
        };

        for k in lo..=hi {
            h[(k, k)] -= mu;
        }
        rotations.clear();
        for k in lo..hi {
            let (c, s) = givens(h[(k, k)], h[(k + 1, k)]);
            rotations.push((c, s));
            for j in k..n {
                let x = h[(k, j)];
                let y = h[(k + 1, j)];
                h[(k, j)] = x * c + s * y;
                h[(k + 1, j)] = -s.conj() * x + y * c;
            }
            h[(k + 1, k)] = Complex64::new(0.0, 0.0);
        }
        for (offset, &(c, s)) in rotations.iter().enumerate() {
            let k = lo + offset;
            let last = (k + 2).min(hi);
            for i in 0..=last {
                let x = h[(i, k)];
                let y = h[(i, k + 1)];
                h[(i, k)] = x * c + y * s.conj();
                h[(i, k + 1)] = -x * s + y * c;
            }
            for i in 0..n {
                let x = z[(i, k)];
                let y = z[(i, k + 1)];
                z[(i, k)] = x * c + y * s.conj();
                z[(i, k + 1)] = -x * s + y * c;
            }
        }
        for k in lo..=hi {
            h[(k, k)] += mu;
        }
    }
    Ok(())
}

/// Eigenvectors of the triangular Schur factor by back-substitution, mapped
/// back through the Schur vectors.
fn triangular_eigenvectors(t: &CMatrix, z: &CMatrix) -> Vec<CVector> {
    let n = t.nrows();
    let small = (f64::EPSILON * t.norm()).max(f64::MIN_POSITIVE);
    (0..n)
        .map(|k| {
            let ek = t[(k, k)];
            let mut x = CVector::zeros(n);
            x[k] = Complex64::new(1.0, 0.0);
            for j in (0..k).rev() {
                let mut s = Complex64::new(0.0, 0.0);
                for l in (j + 1)..=k {
                    s += t[(j, l)] * x[l];
                }
                let mut d = t[(j, j)] - ek;
                if d.norm() < small {
                    d = Complex64::new(small, 0.0);
                }
                x[j] = -s / d;
                // rescale to avoid overflow on nearly coincident eigenvalues
                let m = x.iter().map(|z| z.norm()).fold(0.0, f64::max);
                if m > 1e100 {
                    x /= Complex64::from(m);
                }
            }
            let v = z.columns(0, k + 1) * x.rows(0, k + 1);
            let norm = v.norm();
            v / Complex64::from(norm)
        })
        .collect()
}

fn residual(a: &CMatrix, e: Complex64, v: &CVector) -> f64 {
    (a * v - v * e).norm()
}

/// Inverse iteration on `A − E·I` while the residual is above `bound`.
fn polish(a: &CMatrix, e: Complex64, mut v: CVector, bound: f64) -> CVector {
    if residual(a, e, &v) <= bound {
        return v;
    }
    let n = a.nrows();
    let shift = e + Complex64::new(f64::EPSILON * a.norm(), 0.0);
    let shifted = a - CMatrix::identity(n, n) * shift;
    let lu = shifted.lu();
    for _ in 0..3 {
        let Some(y) = lu.solve(&v) else { break };
        let norm = y.norm();
        if !norm.is_finite() || norm == 0.0 {
            break;
        }
        let candidate = y / Complex64::from(norm);
        if residual(a, e, &candidate) < residual(a, e, &v) {
            v = candidate;
        }
        if residual(a, e, &v) <= bound {
            break;
        }
    }
    v
}

/// Unit 2-norm, phase chosen so that `ψᵀψ` is real and non-negative, sign
/// chosen so the largest component has positive real part.
fn gauge(v: CVector) -> CVector {
    let norm = v.norm();
    let mut v = v / Complex64::from(norm);
    let self_product = bilinear(&v, &v);
    if self_product.norm() > 1e-14 {
        let phase = Complex64::from_polar(1.0, -0.5 * self_product.arg());
        v *= phase;
    } else {
        let (idx, _) =
            v.iter().enumerate().fold(
                (0, 0.0),
                |acc, (i, z)| if z.norm() > acc.1 { (i, z.norm()) } else { acc },
            );
        let p = v[idx];
        v *= p.conj() / p.norm();
    }
    let (idx, _) = v.iter().enumerate().fold((0, 0.0), |acc, (i, z)| {
        if z.norm() > acc.1 + 1e-12 {
            (i, z.norm())
        } else {
            acc
        }
    });
    if v[idx].re < 0.0 {
        v = -v;
    }
    v
}

/// Real symmetric matrix as a complex matrix.
pub fn complexify(m: &DMatrix<f64>) -> CMatrix {
    m.map(Complex64::from)
}
