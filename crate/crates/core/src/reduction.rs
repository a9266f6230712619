//! Reduction of an N-dimensional pencil to the two coalescing levels, and the
//! chirality of the coalesced state.
//!
//! With `χ_ν`, `χ_{ν+1}` the biorthogonally normalized eigenvectors at a real
//! reference point, `h0 = [χ_jᵀ H0 χ_k]` and `h1 = [χ_jᵀ H1 χ_k]` form a 2×2
//! pencil. Its effective parameters follow from the eigenvalues of `h0` and
//! `h1` and the angle between their eigenbases.
//!
//! Conventions fixed here:
//! - effective `ε` and `ω` are in descending order;
//! - the orientation of the `h0` eigenbasis is chosen so that `φ ∈ [0, π/2]`,
//!   which places `λ_c⁺` in the lower half plane;
//! - at the reference point the sign of `χ_{ν+1}` is chosen so that
//!   `χ_νᵀ H1 χ_{ν+1} ≤ 0`; with this gauge the ratio `c_ν/c_{ν+1}` of the
//!   coalesced state is `+i` at `λ_c⁺` and `−i` at `λ_c⁻`, independently of
//!   any real orthogonal change of basis.

use std::f64::consts::{PI, TAU};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::complex_json;
use crate::continuation::{continue_along, ContinuationError, ContinuationOptions};
use crate::eigen::{bilinear, biorthogonal_normalize, complexify, EigenError, EigenSystem};
use crate::locator::ExceptionalPoint;
use crate::pencil::{CMatrix, CVector, MatrixPencil};
use crate::tolerances::Tolerances;
use crate::two_level::{TwoLevelError, TwoLevelParams};

/// Imaginary parts of the effective matrices above this (relative) are an error.
pub const MAX_IMAGINARY_CONTAMINATION: f64 = 1e-6;
/// Sample circle radius relative to `1 + |λ_c|`.
pub const CHIRALITY_RADIUS: f64 = 1e-3;
pub const CHIRALITY_SAMPLES: usize = 8;
/// Points on the radial approach from the reference point to the circle.
const APPROACH_POINTS: usize = 80;
/// Points per half circle on the arc between samples.
const ARC_POINTS: usize = 48;

#[derive(Debug, thiserror::Error)]
pub enum ReductionError {
    #[error(transparent)]
    Eigen(#[from] EigenError),
    #[error(transparent)]
    Continuation(#[from] ContinuationError),
    #[error(transparent)]
    TwoLevel(#[from] TwoLevelError),
    #[error("basis vectors at {lambda} are near-defective")]
    NearDefectiveBasis { lambda: Complex64 },
    #[error("pair ({0}, {1}) is not an adjacent pair of a {2}-level pencil")]
    InvalidPair(usize, usize, usize),
    #[error("effective matrices carry relative imaginary part {contamination:e}")]
    NonRealEffective { contamination: f64 },
    #[error("samples disagree on the chirality sign: {signs:?}")]
    InconsistentChirality { signs: Vec<i8> },
    #[error("invalid comparison window: {0}")]
    InvalidWindow(String),
}

/// Effective two-level model of a coalescing pair.
#[derive(Debug, Clone)]
pub struct EffectiveTwoLevel {
    pub params: TwoLevelParams,
    /// `χ_ν`, `χ_{ν+1}` at `lambda_ref`, in the gauge described above.
    pub basis: [CVector; 2],
    pub lambda_ref: Complex64,
    pub h0: CMatrix,
    pub h1: CMatrix,
}

fn check_pair(n: usize, pair: (usize, usize)) -> Result<(), ReductionError> {
    if pair.1 != pair.0 + 1 || pair.1 >= n {
        return Err(ReductionError::InvalidPair(pair.0, pair.1, n));
    }
    Ok(())
}

/// Whether the second vector of `pair` must be negated at `lambda` to
/// satisfy the coupling gauge. Pairs need not be adjacent here.
fn reference_gauge_flip(
    pencil: &MatrixPencil,
    lambda: Complex64,
    pair: (usize, usize),
    tol: &Tolerances,
) -> Result<bool, ReductionError> {
    let sys = biorthogonal_normalize(EigenSystem::at(pencil, lambda, tol)?, tol);
    if sys.near_defective[pair.0] || sys.near_defective[pair.1] {
        return Err(ReductionError::NearDefectiveBasis { lambda });
    }
    let h1 = complexify(pencil.h1());
    let coupling = bilinear(
        &sys.right_vectors[pair.0],
        &(&h1 * &sys.right_vectors[pair.1]),
    );
    Ok(coupling.re > 0.0)
}

/// Gauged biorthogonal pair `χ_ν`, `χ_{ν+1}` at `lambda`.
fn reference_pair(
    pencil: &MatrixPencil,
    lambda: Complex64,
    pair: (usize, usize),
    tol: &Tolerances,
) -> Result<[CVector; 2], ReductionError> {
    check_pair(pencil.n(), pair)?;
    let flipped = reference_gauge_flip(pencil, lambda, pair, tol)?;
    let sys = biorthogonal_normalize(EigenSystem::at(pencil, lambda, tol)?, tol);
    let a = sys.right_vectors[pair.0].clone();
    let mut b = sys.right_vectors[pair.1].clone();
    if flipped {
        b.neg_mut();
    }
    Ok([a, b])
}

fn project(m: &CMatrix, basis: &[CVector; 2]) -> CMatrix {
    CMatrix::from_fn(2, 2, |j, k| bilinear(&basis[j], &(m * &basis[k])))
}

/// Projects `H0` and `H1` onto the pair `(ν, ν+1)` at `lambda_ref`.
pub fn effective_pencil(
    pencil: &MatrixPencil,
    lambda_ref: Complex64,
    pair: (usize, usize),
    tol: &Tolerances,
) -> Result<(CMatrix, CMatrix, [CVector; 2]), ReductionError> {
    let basis = reference_pair(pencil, lambda_ref, pair, tol)?;
    let h0 = project(&complexify(pencil.h0()), &basis);
    let h1 = project(&complexify(pencil.h1()), &basis);
    Ok((h0, h1, basis))
}

/// Eigenvalues (descending) and rotation angle of the leading eigenvector of
/// a real symmetric 2×2 matrix `[[p, q], [q, r]]`.
fn symmetric_2x2(p: f64, q: f64, r: f64) -> (f64, f64, f64) {
    let mean = 0.5 * (p + r);
    let half = (0.5 * (p - r)).hypot(q);
    let angle = 0.5 * (2.0 * q).atan2(p - r);
    (mean + half, mean - half, angle)
}

/// Effective `ε`, `ω` and `φ` from a projected pair of 2×2 matrices.
pub fn extract_effective_params(
    h0: &CMatrix,
    h1: &CMatrix,
) -> Result<TwoLevelParams, ReductionError> {
    let scale = h0
        .iter()
        .chain(h1.iter())
        .map(|z| z.norm())
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    let imag = h0
        .iter()
        .chain(h1.iter())
        .map(|z| z.im.abs())
        .fold(0.0, f64::max);
    let contamination = imag / scale;
    if contamination > MAX_IMAGINARY_CONTAMINATION {
        return Err(ReductionError::NonRealEffective { contamination });
    }
    let sym = |m: &CMatrix| {
        (
            m[(0, 0)].re,
            0.5 * (m[(0, 1)].re + m[(1, 0)].re),
            m[(1, 1)].re,
        )
    };
    let (p, q, r) = sym(h0);
    let (eps1, eps2, alpha) = symmetric_2x2(p, q, r);
    let u = DMatrix::from_row_slice(2, 2, &[alpha.cos(), -alpha.sin(), alpha.sin(), alpha.cos()]);
    let (a, b, c) = sym(h1);
    let h1r = DMatrix::from_row_slice(2, 2, &[a, b, b, c]);
    let rotated = u.transpose() * h1r * &u;
    let (a, b, c) = (
        rotated[(0, 0)],
        0.5 * (rotated[(0, 1)] + rotated[(1, 0)]),
        rotated[(1, 1)],
    );
    let (omega1, omega2, _) = symmetric_2x2(a, b, c);
    // flipping the second h0 eigenvector negates b, so |b| fixes the orientation
    let phi = 0.5 * (2.0 * b.abs()).atan2(a - c);
    Ok(TwoLevelParams::new(eps1, eps2, omega1, omega2, phi))
}

/// Full reduction at a reference point.
pub fn reduce(
    pencil: &MatrixPencil,
    lambda_ref: Complex64,
    pair: (usize, usize),
    tol: &Tolerances,
) -> Result<EffectiveTwoLevel, ReductionError> {
    let (h0, h1, basis) = effective_pencil(pencil, lambda_ref, pair, tol)?;
    let params = extract_effective_params(&h0, &h1)?;
    Ok(EffectiveTwoLevel {
        params,
        basis,
        lambda_ref,
        h0,
        h1,
    })
}

/// `(λ_c⁺, λ_c⁻)` of the effective model.
pub fn predict_ep(eff: &EffectiveTwoLevel) -> Result<(Complex64, Complex64), ReductionError> {
    let eps = eff.params.exceptional_points()?;
    Ok((eps.plus, eps.minus))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComparisonSample {
    pub lambda: f64,
    /// Full pencil pair, ascending.
    pub full: [f64; 2],
    /// Effective model pair, ascending.
    pub effective: [f64; 2],
    /// Uncoupled lines `ε_j + λ·ω_j`.
    pub lines: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReductionComparison {
    pub max_deviation: f64,
    pub samples: Vec<ComparisonSample>,
}

/// Largest distance over the real window between the pair `(ν, ν+1)` of the
/// full pencil and the effective eigenvalues.
pub fn compare_reduction(
    pencil: &MatrixPencil,
    eff: &EffectiveTwoLevel,
    pair: (usize, usize),
    window: (f64, f64),
    steps: usize,
    tol: &Tolerances,
) -> Result<ReductionComparison, ReductionError> {
    check_pair(pencil.n(), pair)?;
    if !(window.0.is_finite() && window.1.is_finite() && window.0 < window.1) || steps < 1 {
        return Err(ReductionError::InvalidWindow(format!(
            "({}, {}) with {steps} steps",
            window.0, window.1
        )));
    }
    let p = &eff.params;
    let mut samples = Vec::with_capacity(steps + 1);
    let mut max_deviation: f64 = 0.0;
    for k in 0..=steps {
        let t = window.0 + (window.1 - window.0) * k as f64 / steps as f64;
        let sys = EigenSystem::at(pencil, Complex64::new(t, 0.0), tol)?;
        let full = [sys.values[pair.0].re, sys.values[pair.1].re];
        let (e1, e2) = p.eigenvalues(Complex64::new(t, 0.0));
        let (lo, hi) = if e1.re <= e2.re {
            (e1.re, e2.re)
        } else {
            (e2.re, e1.re)
        };
        max_deviation = max_deviation
            .max((full[0] - lo).abs())
            .max((full[1] - hi).abs());
        samples.push(ComparisonSample {
            lambda: t,
            full,
            effective: [lo, hi],
            lines: [p.eps1 + t * p.omega1, p.eps2 + t * p.omega2],
        });
    }
    Ok(ReductionComparison {
        max_deviation,
        samples,
    })
}

/// Unit null vector of `H(λ_c) − E_c` (right singular vector of the
/// smallest singular value).
pub fn coalesced_state(pencil: &MatrixPencil, lambda_c: Complex64, e_c: Complex64) -> CVector {
    let n = pencil.n();
    let m = pencil.evaluate(lambda_c) - CMatrix::identity(n, n) * e_c;
    let svd = m.svd(false, true);
    let v_t = svd.v_t.expect("requested right singular vectors");
    let k = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(k, _)| k)
        .unwrap_or(0);
    v_t.row(k).transpose().map(|z| z.conj())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioSample {
    #[serde(with = "complex_json")]
    pub lambda: Complex64,
    #[serde(with = "complex_json")]
    pub ratio: Complex64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChiralityResult {
    /// +1 for ratio `+i`, −1 for ratio `−i`.
    pub sign: i8,
    pub ratio_samples: Vec<RatioSample>,
    pub max_deviation: f64,
}

/// Biorthogonal vectors of every level continued from the real reference
/// point to `target` near the EP: radially to the circle point nearest the
/// reference, then along the circle without crossing the ray that points
/// away from the reference. Returned in the reference gauge.
fn continued_basis(
    pencil: &MatrixPencil,
    ep: &ExceptionalPoint,
    radius: f64,
    angle: f64,
    opts: &ContinuationOptions,
) -> Result<(Vec<CVector>, Vec<Complex64>), ReductionError> {
    let lambda_ref = Complex64::new(ep.lambda_ref, 0.0);
    let offset = lambda_ref - ep.lambda_c;
    let distance = offset.norm();
    let dir = offset.arg();
    let mut path = Vec::with_capacity(APPROACH_POINTS + ARC_POINTS + 2);
    if distance > radius {
        let (a, b) = (distance.ln(), radius.ln());
        for k in 0..=APPROACH_POINTS {
            let rho = (a + (b - a) * k as f64 / APPROACH_POINTS as f64).exp();
            path.push(ep.lambda_c + Complex64::from_polar(rho, dir));
        }
    } else {
        path.push(lambda_ref);
        path.push(ep.lambda_c + Complex64::from_polar(radius, dir));
    }
    let arc_steps = ((angle.abs() / PI) * ARC_POINTS as f64).ceil().max(1.0) as usize;
    for k in 1..=arc_steps {
        let a = dir + angle * k as f64 / arc_steps as f64;
        path.push(ep.lambda_c + Complex64::from_polar(radius, a));
    }
    let state = continue_along(pencil, &path, opts)?;
    let values = state.current_values();
    Ok((state.vectors, values))
}

/// Relative sample angles in `(−π, π)`, measured from the direction of the
/// reference point and symmetric about it.
fn sample_angles(count: usize) -> Vec<f64> {
    (0..count)
        .map(|s| -PI + TAU * (s as f64 + 0.5) / count as f64)
        .collect()
}

/// Tracks (labelled by the ascending order at `Re` reference point) that
/// coalesce at `ep`: the two whose continued eigenvalues are nearest `E_c`
/// on arrival at the sample circle. Seed labels can differ from this for EPs
/// far from the real axis, where the approach passes other branch points.
pub fn identify_pair(
    pencil: &MatrixPencil,
    ep: &ExceptionalPoint,
    radius: f64,
    tol: &Tolerances,
) -> Result<(usize, usize), ReductionError> {
    let opts = ContinuationOptions {
        tol: *tol,
        ..ContinuationOptions::default()
    };
    let (_, values) = continued_basis(pencil, ep, radius, 0.0, &opts)?;
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| {
        (values[a] - ep.e_c)
            .norm()
            .total_cmp(&(values[b] - ep.e_c).norm())
    });
    Ok((idx[0].min(idx[1]), idx[0].max(idx[1])))
}

/// Chirality of the state coalescing at `ep`, sampled on a circle of radius
/// `1e-3·(1 + |λ_c|)`.
pub fn chirality(
    pencil: &MatrixPencil,
    ep: &ExceptionalPoint,
    tol: &Tolerances,
) -> Result<ChiralityResult, ReductionError> {
    chirality_at_radius(
        pencil,
        ep,
        CHIRALITY_RADIUS * (1.0 + ep.lambda_c.norm()),
        tol,
    )
}

pub fn chirality_at_radius(
    pencil: &MatrixPencil,
    ep: &ExceptionalPoint,
    radius: f64,
    tol: &Tolerances,
) -> Result<ChiralityResult, ReductionError> {
    let lambda_ref = Complex64::new(ep.lambda_ref, 0.0);
    let pair = identify_pair(pencil, ep, radius, tol)?;
    let (nu, nu1) = pair;
    let flipped = reference_gauge_flip(pencil, lambda_ref, pair, tol)?;
    let psi = coalesced_state(pencil, ep.lambda_c, ep.e_c);
    let opts = ContinuationOptions {
        tol: *tol,
        ..ContinuationOptions::default()
    };
    let mut samples = Vec::with_capacity(CHIRALITY_SAMPLES);
    for angle in sample_angles(CHIRALITY_SAMPLES) {
        let (basis, _) = continued_basis(pencil, ep, radius, angle, &opts)?;
        let c_nu = bilinear(&basis[nu], &psi);
        let mut c_nu1 = bilinear(&basis[nu1], &psi);
        if flipped {
            c_nu1 = -c_nu1;
        }
        let dir = (lambda_ref - ep.lambda_c).arg() + angle;
        samples.push(RatioSample {
            lambda: ep.lambda_c + Complex64::from_polar(radius, dir),
            ratio: c_nu / c_nu1,
        });
    }
    let signs: Vec<i8> = samples
        .iter()
        .map(|s| if s.ratio.im >= 0.0 { 1 } else { -1 })
        .collect();
    if signs.iter().any(|&s| s != signs[0]) {
        return Err(ReductionError::InconsistentChirality { signs });
    }
    let sign = signs[0];
    let target = Complex64::new(0.0, f64::from(sign));
    let max_deviation = samples
        .iter()
        .map(|s| (s.ratio - target).norm())
        .fold(0.0, f64::max);
    Ok(ChiralityResult {
        sign,
        ratio_samples: samples,
        max_deviation,
    })
}

/// Weight of the levels outside the pair in the expansion of the coalesced
/// state, `Σ_{k∉pair}|c_k|² / Σ_k|c_k|²`, averaged over the sample circle.
pub fn pair_dominance(
    pencil: &MatrixPencil,
    ep: &ExceptionalPoint,
    radius: f64,
    tol: &Tolerances,
) -> Result<f64, ReductionError> {
    let pair = identify_pair(pencil, ep, radius, tol)?;
    let psi = coalesced_state(pencil, ep.lambda_c, ep.e_c);
    let opts = ContinuationOptions {
        tol: *tol,
        ..ContinuationOptions::default()
    };
    let angles = sample_angles(4);
    let mut total = 0.0;
    for &angle in &angles {
        let (basis, _) = continued_basis(pencil, ep, radius, angle, &opts)?;
        let weights: Vec<f64> = basis
            .iter()
            .map(|chi| bilinear(chi, &psi).norm_sqr())
            .collect();
        let all: f64 = weights.iter().sum();
        let pair = weights[pair.0] + weights[pair.1];
        total += (all - pair) / all;
    }
    Ok(total / angles.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c64;
    use nalgebra::dmatrix;
    use std::f64::consts::FRAC_PI_4;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn standard() -> MatrixPencil {
        TwoLevelParams::standard().assemble()
    }

    fn standard_ep(lambda_c: Complex64) -> ExceptionalPoint {
        ExceptionalPoint {
            lambda_c,
            e_c: c64(0.0, 0.0),
            pair: (0, 1),
            lambda_ref: 0.0,
            residual: 0.0,
            chirality: None,
        }
    }

    fn close(a: Complex64, b: Complex64, eps: f64) -> bool {
        (a - b).norm() <= eps
    }

    #[test]
    fn extract_standard_parameters() {
        let h0 = complexify(&dmatrix![1.0, 0.0; 0.0, -1.0]);
        let h1 = complexify(&dmatrix![0.0, 1.0; 1.0, 0.0]);
        let p = extract_effective_params(&h0, &h1).unwrap();
        assert!((p.eps1 - 1.0).abs() < 1e-15 && (p.eps2 + 1.0).abs() < 1e-15);
        assert!((p.omega1 - 1.0).abs() < 1e-15 && (p.omega2 + 1.0).abs() < 1e-15);
        assert!((p.phi - FRAC_PI_4).abs() < 1e-15);
    }

    #[test]
    fn uncoupled_gives_zero_angle() {
        let h0 = complexify(&dmatrix![1.0, 0.0; 0.0, -1.0]);
        let h1 = complexify(&dmatrix![0.3, 0.0; 0.0, 0.7]);
        let p = extract_effective_params(&h0, &h1).unwrap();
        assert!(p.phi.abs() < 1e-15 || (p.phi - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        assert!(p.diabolic_flag());
    }

    #[test]
    fn complex_contamination_rejected() {
        let h0 = CMatrix::from_row_slice(
            2,
            2,
            &[c64(1.0, 0.1), c64(0.0, 0.0), c64(0.0, 0.0), c64(-1.0, 0.0)],
        );
        let h1 = complexify(&dmatrix![0.0, 1.0; 1.0, 0.0]);
        assert!(matches!(
            extract_effective_params(&h0, &h1),
            Err(ReductionError::NonRealEffective { .. })
        ));
    }

    #[test]
    fn extracted_model_reproduces_2x2_spectrum() {
        let mut rng = crate::demo::rng(11);
        let tol = tol();
        for _ in 0..20 {
            let pencil = crate::demo::random_pencil_with(2, &mut rng);
            let params =
                extract_effective_params(&complexify(pencil.h0()), &complexify(pencil.h1()))
                    .unwrap();
            for k in 0..5 {
                let lambda = c64(-1.0 + 0.4 * k as f64, 0.3 * k as f64 - 0.7);
                let sys = EigenSystem::at(&pencil, lambda, &tol).unwrap();
                let (a, b) = params.eigenvalues(lambda);
                let direct = close(a, sys.values[0], 1e-10) && close(b, sys.values[1], 1e-10);
                let swapped = close(a, sys.values[1], 1e-10) && close(b, sys.values[0], 1e-10);
                assert!(direct || swapped);
            }
        }
    }

    #[test]
    fn two_dimensional_reduction_is_exact() {
        let params = TwoLevelParams::new(0.4, -0.9, 1.3, -0.2, 0.6);
        let pencil = params.assemble();
        let eff = reduce(&pencil, c64(0.2, 0.0), (0, 1), &tol()).unwrap();
        let (plus, minus) = predict_ep(&eff).unwrap();
        let exact = params.exceptional_points().unwrap();
        let same = close(plus, exact.plus, 1e-9) && close(minus, exact.minus, 1e-9);
        let swapped = close(plus, exact.minus, 1e-9) && close(minus, exact.plus, 1e-9);
        assert!(same || swapped);
        assert!(plus.im <= 0.0);
        let cmp = compare_reduction(&pencil, &eff, (0, 1), (-2.0, 2.0), 50, &tol()).unwrap();
        assert!(cmp.max_deviation < 1e-10);
    }

    fn embedded_standard() -> MatrixPencil {
        let mut h0 = DMatrix::zeros(4, 4);
        let mut h1 = DMatrix::zeros(4, 4);
        h0[(0, 0)] = 1.0;
        h0[(1, 1)] = -1.0;
        h1[(0, 1)] = 1.0;
        h1[(1, 0)] = 1.0;
        h0[(2, 2)] = 5.0;
        h0[(3, 3)] = -6.0;
        h1[(2, 2)] = 0.5;
        h1[(3, 3)] = 0.25;
        MatrixPencil::new(h0, h1).unwrap()
    }

    #[test]
    fn block_embedding_recovers_block() {
        let pencil = embedded_standard();
        // ascending levels at λ = 0: −6, −1, 1, 5
        let (h0, h1, _) = effective_pencil(&pencil, c64(0.0, 0.0), (1, 2), &tol()).unwrap();
        let ev = |m: &CMatrix| {
            let (p, q, r) = (m[(0, 0)].re, m[(0, 1)].re, m[(1, 1)].re);
            symmetric_2x2(p, q, r)
        };
        let (a, b, _) = ev(&h0);
        assert!((a - 1.0).abs() < 1e-12 && (b + 1.0).abs() < 1e-12);
        let (a, b, _) = ev(&h1);
        assert!((a - 1.0).abs() < 1e-12 && (b + 1.0).abs() < 1e-12);
        let eff = reduce(&pencil, c64(0.0, 0.0), (1, 2), &tol()).unwrap();
        let (plus, minus) = predict_ep(&eff).unwrap();
        assert!(close(plus, c64(0.0, -1.0), 1e-9) && close(minus, c64(0.0, 1.0), 1e-9));
        let cmp = compare_reduction(&pencil, &eff, (1, 2), (-0.8, 0.8), 40, &tol()).unwrap();
        assert!(cmp.max_deviation <= 1e-9);
    }

    #[test]
    fn invalid_pair_rejected() {
        assert!(matches!(
            effective_pencil(&standard(), c64(0.0, 0.0), (0, 2), &tol()),
            Err(ReductionError::InvalidPair(..))
        ));
    }

    #[test]
    fn null_vector_of_standard_ep() {
        let v = coalesced_state(&standard(), c64(0.0, -1.0), c64(0.0, 0.0));
        // ∝ (i, 1)
        assert!(close(v[0] / v[1], c64(0.0, 1.0), 1e-10));
    }

    #[test]
    fn standard_chirality_signs() {
        let plus = chirality(&standard(), &standard_ep(c64(0.0, -1.0)), &tol()).unwrap();
        assert_eq!(plus.sign, 1);
        assert!(plus.max_deviation < 1e-3, "{}", plus.max_deviation);
        assert!(plus.ratio_samples.len() >= 8);
        let minus = chirality(&standard(), &standard_ep(c64(0.0, 1.0)), &tol()).unwrap();
        assert_eq!(minus.sign, -1);
        assert!(minus.max_deviation < 1e-3);
    }

    #[test]
    fn embedded_chirality_matches_block() {
        let pencil = embedded_standard();
        let ep = ExceptionalPoint {
            pair: (1, 2),
            ..standard_ep(c64(0.0, -1.0))
        };
        let res = chirality(&pencil, &ep, &tol()).unwrap();
        assert_eq!(res.sign, 1);
        assert!(res.max_deviation < 1e-6);
        let d = pair_dominance(&pencil, &ep, 1e-3, &tol()).unwrap();
        assert!(d < 1e-20);
    }
}
