//! Closed-form 2×2 model `H = diag(ε1, ε2) + λ·U(φ) diag(ω1, ω2) U(φ)ᵀ`.

use std::path::Path;

use nalgebra::{dmatrix, DMatrix};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::pencil::MatrixPencil;

/// `|sin 2φ|` below which the two EPs merge into a diabolic point.
pub const DIABOLIC_SIN_TOL: f64 = 1e-9;
/// `|ω1 − ω2|` below which there is no finite EP.
pub const DEGENERATE_OMEGA_TOL: f64 = 1e-12;
/// Distance from `λ_c±` inside which the eigenvector angle is singular.
pub const AT_EP_TOL: f64 = 1e-12;

#[derive(Debug, thiserror::Error)]
pub enum TwoLevelError {
    #[error("omega1 == omega2: the model has no finite exceptional point")]
    NoFiniteEP,
    #[error("lambda = {lambda} is within {AT_EP_TOL:e} of the exceptional point {lambda_c}")]
    AtExceptionalPoint {
        lambda: Complex64,
        lambda_c: Complex64,
    },
    #[error("the eigenvector angle is undefined (vanishing denominator)")]
    SingularTheta,
    #[error("parameter {0} is not finite")]
    NonFinite(&'static str),
    #[error("invalid parameter JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// Real parameters of the two-level model. File format:
/// `{"eps1":f,"eps2":f,"omega1":f,"omega2":f,"phi":f}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoLevelParams {
    pub eps1: f64,
    pub eps2: f64,
    pub omega1: f64,
    pub omega2: f64,
    pub phi: f64,
}

/// Pair `(λ_c⁺, λ_c⁻)` from the closed form, with the diabolic marker.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedFormEps {
    pub plus: Complex64,
    pub minus: Complex64,
    pub diabolic: bool,
}

/// Complex eigenvector angle: `ψ1 = (cos θ, sin θ)`, `ψ2 = (−sin θ, cos θ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaAngle {
    pub value: Complex64,
}

impl ThetaAngle {
    pub fn tan(&self) -> Complex64 {
        self.value.tan()
    }

    /// `(ψ1, ψ2)` as component pairs.
    pub fn eigenvectors(&self) -> ([Complex64; 2], [Complex64; 2]) {
        let (c, s) = (self.value.cos(), self.value.sin());
        ([c, s], [-s, c])
    }
}

impl TwoLevelParams {
    pub fn new(eps1: f64, eps2: f64, omega1: f64, omega2: f64, phi: f64) -> Self {
        Self {
            eps1,
            eps2,
            omega1,
            omega2,
            phi,
        }
    }

    /// `ε = ±1`, `ω = ±1`, `φ = π/4`; assembles to `diag(1,−1) + λ·σx`.
    pub fn standard() -> Self {
        Self::new(1.0, -1.0, 1.0, -1.0, std::f64::consts::FRAC_PI_4)
    }

    pub fn validate(&self) -> Result<(), TwoLevelError> {
        for (name, v) in [
            ("eps1", self.eps1),
            ("eps2", self.eps2),
            ("omega1", self.omega1),
            ("omega2", self.omega2),
            ("phi", self.phi),
        ] {
            if !v.is_finite() {
                return Err(TwoLevelError::NonFinite(name));
            }
        }
        Ok(())
    }

    pub fn diabolic_flag(&self) -> bool {
        (2.0 * self.phi).sin().abs() < DIABOLIC_SIN_TOL
    }

    pub fn degenerate_flag(&self) -> bool {
        (self.omega1 - self.omega2).abs() < DEGENERATE_OMEGA_TOL
    }

    pub fn h0(&self) -> DMatrix<f64> {
        dmatrix![self.eps1, 0.0; 0.0, self.eps2]
    }

    /// `U(φ) diag(ω1, ω2) U(φ)ᵀ`.
    pub fn h1(&self) -> DMatrix<f64> {
        let u = rotation(self.phi);
        let d = dmatrix![self.omega1, 0.0; 0.0, self.omega2];
        let m = &u * d * u.transpose();
        // exact symmetry regardless of rounding order
        let off = 0.5 * (m[(0, 1)] + m[(1, 0)]);
        dmatrix![m[(0, 0)], off; off, m[(1, 1)]]
    }

    pub fn assemble(&self) -> MatrixPencil {
        MatrixPencil::new(self.h0(), self.h1()).expect("two-level pencil is symmetric")
    }

    /// `R(λ)`, principal square root.
    pub fn resultant_r(&self, lambda: Complex64) -> Complex64 {
        let de = (self.eps1 - self.eps2) / 2.0;
        let dw = lambda * ((self.omega1 - self.omega2) / 2.0);
        let cross = lambda
            * (0.5
                * (self.eps1 - self.eps2)
                * (self.omega1 - self.omega2)
                * (2.0 * self.phi).cos());
        (de * de + dw * dw + cross).sqrt()
    }

    /// `(mean + R, mean − R)`.
    pub fn eigenvalues(&self, lambda: Complex64) -> (Complex64, Complex64) {
        let mean = (lambda * (self.omega1 + self.omega2) + (self.eps1 + self.eps2)) / 2.0;
        let r = self.resultant_r(lambda);
        (mean + r, mean - r)
    }

    /// `λ_c± = −(ε1−ε2)/(ω1−ω2)·exp(±2iφ)`.
    pub fn exceptional_points(&self) -> Result<ClosedFormEps, TwoLevelError> {
        if self.degenerate_flag() {
            return Err(TwoLevelError::NoFiniteEP);
        }
        let ratio = -(self.eps1 - self.eps2) / (self.omega1 - self.omega2);
        let diabolic = self.diabolic_flag();
        if diabolic {
            // both members collapse onto the real axis
            let real = Complex64::new(ratio * (2.0 * self.phi).cos(), 0.0);
            return Ok(ClosedFormEps {
                plus: real,
                minus: real,
                diabolic,
            });
        }
        Ok(ClosedFormEps {
            plus: Complex64::from_polar(ratio, 2.0 * self.phi),
            minus: Complex64::from_polar(ratio, -2.0 * self.phi),
            diabolic,
        })
    }

    /// `tan θ = λ(ω1−ω2) sin2φ / (E1 − E2 + ε1 − ε2 + λ(ω1−ω2) cos2φ)`.
    pub fn theta(&self, lambda: Complex64) -> Result<ThetaAngle, TwoLevelError> {
        if let Ok(eps) = self.exceptional_points() {
            for lambda_c in [eps.plus, eps.minus] {
                if (lambda - lambda_c).norm() < AT_EP_TOL {
                    return Err(TwoLevelError::AtExceptionalPoint { lambda, lambda_c });
                }
            }
        }
        let tan = self.tan_theta(lambda)?;
        if (tan * tan + 1.0).norm() == 0.0 {
            return Err(TwoLevelError::SingularTheta);
        }
        Ok(ThetaAngle { value: tan.atan() })
    }

    /// The raw ratio of the closed form; also defined at `λ_c±`, where it
    /// takes the limiting values `tan θ_c± = ∓i`.
    pub fn tan_theta(&self, lambda: Complex64) -> Result<Complex64, TwoLevelError> {
        let dw = lambda * (self.omega1 - self.omega2);
        let (e1, e2) = self.eigenvalues(lambda);
        let den = e1 - e2 + (self.eps1 - self.eps2) + dw * (2.0 * self.phi).cos();
        if den.norm() == 0.0 {
            return Err(TwoLevelError::SingularTheta);
        }
        Ok(dw * (2.0 * self.phi).sin() / den)
    }

    pub fn from_json(s: &str) -> Result<Self, TwoLevelError> {
        let p: Self = serde_json::from_str(s)?;
        p.validate()?;
        Ok(p)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, TwoLevelError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

/// `U(φ) = [[cos φ, −sin φ], [sin φ, cos φ]]`.
pub fn rotation(phi: f64) -> DMatrix<f64> {
    let (s, c) = phi.sin_cos();
    dmatrix![c, -s; s, c]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c64;
    use crate::eigen::eigendecompose;
    use crate::tolerances::Tolerances;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4};

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn rotation_examples() {
        assert_eq!(rotation(0.0), DMatrix::identity(2, 2));
        let r = rotation(FRAC_PI_2);
        let expected = dmatrix![0.0, -1.0; 1.0, 0.0];
        assert!((r - expected).amax() < 1e-15);
        let u = rotation(FRAC_PI_4);
        let m = &u * dmatrix![1.0, 0.0; 0.0, -1.0] * u.transpose();
        assert!((m - dmatrix![0.0, 1.0; 1.0, 0.0]).amax() < 1e-15);
        for phi in [0.1, 1.3, -2.2] {
            let u = rotation(phi);
            assert!((&u * u.transpose() - DMatrix::identity(2, 2)).amax() < 1e-15);
        }
    }

    #[test]
    fn standard_assembles_to_sigma_x_pencil() {
        let p = TwoLevelParams::standard().assemble();
        assert!((p.h0() - dmatrix![1.0, 0.0; 0.0, -1.0]).amax() < 1e-15);
        assert!((p.h1() - dmatrix![0.0, 1.0; 1.0, 0.0]).amax() < 1e-15);
    }

    #[test]
    fn resultant_examples() {
        let p = TwoLevelParams::standard();
        assert!(close(p.resultant_r(c64(0.0, 0.0)), c64(1.0, 0.0), 1e-15));
        assert!(p.resultant_r(c64(0.0, -1.0)).norm() < 1e-7);
        let q = TwoLevelParams::new(0.3, -1.1, 0.4, 2.0, 0.77);
        assert!(close(q.resultant_r(c64(0.0, 0.0)), c64(0.7, 0.0), 1e-15));
    }

    #[test]
    fn eigenvalue_examples() {
        let p = TwoLevelParams::standard();
        let (a, b) = p.eigenvalues(c64(0.0, 0.0));
        assert!(close(a, c64(1.0, 0.0), 1e-15) && close(b, c64(-1.0, 0.0), 1e-15));
        let (a, b) = p.eigenvalues(c64(0.0, 0.5));
        assert!(close(a, c64(0.75f64.sqrt(), 0.0), 1e-15));
        assert!(close(b, c64(-(0.75f64.sqrt()), 0.0), 1e-15));
        let (a, b) = p.eigenvalues(c64(0.0, -1.0));
        assert!(a.norm() < 1e-7 && b.norm() < 1e-7);
    }

    #[test]
    fn exceptional_point_examples() {
        let eps = TwoLevelParams::standard().exceptional_points().unwrap();
        assert!(close(eps.plus, c64(0.0, -1.0), 1e-15));
        assert!(close(eps.minus, c64(0.0, 1.0), 1e-15));
        assert!(!eps.diabolic);

        let d = TwoLevelParams::new(1.0, 0.0, 2.0, 0.0, 0.0)
            .exceptional_points()
            .unwrap();
        assert!(d.diabolic);
        assert_eq!(d.plus, c64(-0.5, 0.0));
        assert_eq!(d.minus, c64(-0.5, 0.0));

        let z = TwoLevelParams::new(0.5, 0.5, 1.0, -1.0, FRAC_PI_4)
            .exceptional_points()
            .unwrap();
        assert!(z.plus.norm() == 0.0 && z.minus.norm() == 0.0);

        let p = TwoLevelParams::new(0.0, 1.0, 1.0, -1.0, FRAC_PI_3);
        let e = p.exceptional_points().unwrap();
        assert!(close(
            e.plus,
            Complex64::from_polar(0.5, 2.0 * FRAC_PI_3),
            1e-15
        ));

        assert!(matches!(
            TwoLevelParams::new(1.0, 0.0, 1.0, 1.0, 0.3).exceptional_points(),
            Err(TwoLevelError::NoFiniteEP)
        ));
    }

    #[test]
    fn theta_examples() {
        let p = TwoLevelParams::standard();
        let t0 = p.theta(c64(0.0, 0.0)).unwrap();
        assert!(t0.value.norm() < 1e-15);
        let (v1, v2) = t0.eigenvectors();
        assert!(close(v1[0], c64(1.0, 0.0), 1e-15) && close(v2[1], c64(1.0, 0.0), 1e-15));

        let t1 = p.theta(c64(1.0, 0.0)).unwrap();
        assert!(close(t1.tan(), c64(2f64.sqrt() - 1.0, 0.0), 1e-14));

        // limiting values at λ_c±: tan θ = ∓i
        let eps = p.exceptional_points().unwrap();
        assert!(close(p.tan_theta(eps.plus).unwrap(), c64(0.0, -1.0), 1e-7));
        assert!(close(p.tan_theta(eps.minus).unwrap(), c64(0.0, 1.0), 1e-7));
        assert!(matches!(
            p.theta(eps.plus),
            Err(TwoLevelError::AtExceptionalPoint { .. })
        ));
    }

    #[test]
    fn theta_vectors_solve_the_eigenproblem() {
        let p = TwoLevelParams::new(0.4, -0.9, 1.3, -0.2, 0.6);
        let pencil = p.assemble();
        for lambda in [c64(0.3, 0.2), c64(-1.0, 0.7), c64(2.0, -0.4)] {
            let h = pencil.evaluate(lambda);
            let (e1, e2) = p.eigenvalues(lambda);
            let (v1, v2) = p.theta(lambda).unwrap().eigenvectors();
            for (e, v) in [(e1, v1), (e2, v2)] {
                let r0 = h[(0, 0)] * v[0] + h[(0, 1)] * v[1] - e * v[0];
                let r1 = h[(1, 0)] * v[0] + h[(1, 1)] * v[1] - e * v[1];
                assert!(r0.norm() < 1e-9 && r1.norm() < 1e-9);
            }
        }
    }

    #[test]
    fn closed_form_matches_eigensolver() {
        let p = TwoLevelParams::new(-0.3, 1.2, 0.8, -1.7, 1.1);
        let pencil = p.assemble();
        let lambda = c64(0.45, -0.8);
        let sys = eigendecompose(&pencil.evaluate(lambda), &Tolerances::default()).unwrap();
        let (a, b) = p.eigenvalues(lambda);
        let direct = close(a, sys.values[0], 1e-12) && close(b, sys.values[1], 1e-12);
        let swapped = close(a, sys.values[1], 1e-12) && close(b, sys.values[0], 1e-12);
        assert!(direct || swapped);
    }

    #[test]
    fn json_format() {
        let p = TwoLevelParams::from_json(
            r#"{"eps1":1,"eps2":-1,"omega1":1,"omega2":-1,"phi":0.7853981633974483}"#,
        )
        .unwrap();
        assert_eq!(p, TwoLevelParams::standard());
        assert!(TwoLevelParams::from_json(r#"{"eps1":1}"#).is_err());
    }
}
