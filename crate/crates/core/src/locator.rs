//! Locating exceptional points of an N-dimensional pencil.
//!
//! Seeds come from local minima of adjacent-level gaps along the real axis.
//! Each seed is refined by damped Newton on the coalescence conditions
//! `p(λ, E) = 0`, `∂p/∂E(λ, E) = 0` with `p(λ, E) = det(H(λ) − E)`, and a
//! located point is checked by fitting the gap of the coalescing pair to
//! `|λ − λ_c|^exponent` on rays leaving `λ_c`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::complex_json;
use crate::eigen::{unit_self_orthogonality, EigenError, EigenSystem};
use crate::pencil::MatrixPencil;
use crate::tolerances::Tolerances;

const MAX_NEWTON_ITERATIONS: usize = 50;
const MAX_HALVINGS: usize = 8;
const FD_RELATIVE_STEP: f64 = 1e-7;
/// Both vectors above this self-orthogonality means a two-dimensional eigenspace.
const DIABOLIC_SELF_ORTHOGONALITY: f64 = 0.9;
const MIN_SWEEP_STEPS: usize = 16;
/// Radii (relative to `1 + |λ_c|`) of the Puiseux fit window.
pub const PUISEUX_WINDOW: (f64, f64) = (1e-6, 1e-2);
const PUISEUX_SAMPLES_PER_RAY: usize = 17;
const PUISEUX_RAYS: usize = 8;
const PUISEUX_RAY_ANGLE: f64 = std::f64::consts::FRAC_PI_3;
/// Accepted range for a square-root branch point.
pub const BRANCH_EXPONENT_RANGE: (f64, f64) = (0.4, 0.6);

#[derive(Debug, thiserror::Error)]
pub enum LocatorError {
    #[error(transparent)]
    Eigen(#[from] EigenError),
    #[error("sweep interval ({0}, {1}) is empty")]
    EmptyInterval(f64, f64),
    #[error("a sweep needs at least {MIN_SWEEP_STEPS} steps, got {0}")]
    TooFewSteps(usize),
    #[error("Newton did not converge in {iterations} iterations (last λ = {lambda}, residual {residual:e})")]
    NoConvergence {
        iterations: usize,
        lambda: Complex64,
        residual: f64,
    },
    #[error("Newton converged to a genuine degeneracy at λ = {lambda}, E = {energy}")]
    ConvergedToDiabolic {
        lambda: Complex64,
        energy: Complex64,
    },
    #[error("exponent {:.4} outside the square-root range; not a branch point", fit.exponent)]
    NotABranchPoint { fit: PuiseuxFit },
}

/// Local minimum of an adjacent-level gap along the real λ axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeedRegion {
    #[serde(with = "complex_json")]
    pub lambda_seed: Complex64,
    /// Ascending real-axis level indices `(ν, ν+1)`.
    pub pair: (usize, usize),
    pub gap_at_seed: f64,
    /// Sample spacing of the sweep that produced the seed.
    pub spacing: f64,
}

/// A located branch point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExceptionalPoint {
    #[serde(with = "complex_json")]
    pub lambda_c: Complex64,
    #[serde(with = "complex_json")]
    pub e_c: Complex64,
    /// Indices of the coalescing levels in the ascending ordering at `lambda_ref`.
    pub pair: (usize, usize),
    /// Real-axis point the EP is associated with (the seed).
    pub lambda_ref: f64,
    pub residual: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chirality: Option<i8>,
}

impl ExceptionalPoint {
    /// The conjugate partner; exact for real `H0`, `H1`.
    pub fn conjugate(&self) -> Self {
        Self {
            lambda_c: self.lambda_c.conj(),
            e_c: self.e_c.conj(),
            chirality: self.chirality.map(|s| -s),
            ..*self
        }
    }
}

/// Result of the gap-vs-radius power-law fit around an EP.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PuiseuxFit {
    pub exponent: f64,
    /// `|e₁|` in `gap ≈ 2|e₁|·√r`.
    pub leading_coeff_magnitude: f64,
    /// Absolute radii of the sampled window.
    pub fit_window: (f64, f64),
    /// RMS of the log-log residuals.
    pub fit_residual: f64,
}

/// `p = Π(E_k − e)` and `∂p/∂e` from the eigenvalues of `H(λ)`.
pub fn char_poly_eval(
    pencil: &MatrixPencil,
    lambda: Complex64,
    e: Complex64,
    tol: &Tolerances,
) -> Result<(Complex64, Complex64), LocatorError> {
    let sys = EigenSystem::at(pencil, lambda, tol)?;
    Ok(poly_from_values(&sys.values, e))
}

fn poly_from_values(values: &[Complex64], e: Complex64) -> (Complex64, Complex64) {
    let one = Complex64::new(1.0, 0.0);
    let p = values.iter().fold(one, |acc, &ek| acc * (ek - e));
    let dp = -(0..values.len())
        .map(|j| {
            values
                .iter()
                .enumerate()
                .filter(|&(k, _)| k != j)
                .fold(one, |acc, (_, &ek)| acc * (ek - e))
        })
        .sum::<Complex64>();
    (p, dp)
}

/// Indices of the two eigenvalues closest to `e`.
fn nearest_pair(values: &[Complex64], e: Complex64) -> (usize, usize) {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| (values[a] - e).norm().total_cmp(&(values[b] - e).norm()));
    let (a, b) = (idx[0], idx[1]);
    (a.min(b), a.max(b))
}

/// `(p, ∂p/∂E)` divided by the product of the factors of the levels that do
/// not take part in the coalescence. The division is by a nonvanishing
/// analytic function, so roots and Newton convergence are unchanged while the
/// magnitudes stay O(gap²) and O(gap).
fn scaled_conditions(
    pencil: &MatrixPencil,
    lambda: Complex64,
    e: Complex64,
    tol: &Tolerances,
) -> Result<[Complex64; 2], LocatorError> {
    let sys = EigenSystem::at(pencil, lambda, tol)?;
    let (a, b) = nearest_pair(&sys.values, e);
    let (ea, eb) = (sys.values[a], sys.values[b]);
    let g = (ea - e) * (eb - e);
    let dg = e * 2.0 - ea - eb;
    let log_derivative_far: Complex64 = sys
        .values
        .iter()
        .enumerate()
        .filter(|&(k, _)| k != a && k != b)
        .map(|(_, &ek)| 1.0 / (ek - e))
        .sum();
    Ok([g, dg - g * log_derivative_far])
}

fn residual_norm(f: &[Complex64; 2]) -> f64 {
    f[0].norm().max(f[1].norm())
}

/// Sweeps the real interval and returns one seed per interior local minimum
/// of each adjacent gap `E_{ν+1} − E_ν`.
pub fn seed_from_sweep(
    pencil: &MatrixPencil,
    interval: (f64, f64),
    steps: usize,
    tol: &Tolerances,
) -> Result<Vec<SeedRegion>, LocatorError> {
    let (lo, hi) = interval;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(LocatorError::EmptyInterval(lo, hi));
    }
    if steps < MIN_SWEEP_STEPS {
        return Err(LocatorError::TooFewSteps(steps));
    }
    let n = pencil.n();
    let spacing = (hi - lo) / steps as f64;
    let ts: Vec<f64> = (0..=steps).map(|i| lo + spacing * i as f64).collect();
    let mut gaps = vec![Vec::with_capacity(ts.len()); n - 1];
    for &t in &ts {
        let sys = EigenSystem::at(pencil, Complex64::new(t, 0.0), tol)?;
        for (nu, row) in gaps.iter_mut().enumerate() {
            row.push(sys.values[nu + 1].re - sys.values[nu].re);
        }
    }
    let mut seeds = Vec::new();
    for (nu, g) in gaps.iter().enumerate() {
        for i in 1..ts.len() - 1 {
            if g[i] < g[i - 1] && g[i] <= g[i + 1] {
                seeds.push(SeedRegion {
                    lambda_seed: Complex64::new(ts[i], 0.0),
                    pair: (nu, nu + 1),
                    gap_at_seed: g[i],
                    spacing,
                });
            }
        }
    }
    Ok(seeds)
}

fn pair_gap_squared(
    pencil: &MatrixPencil,
    t: f64,
    pair: (usize, usize),
    tol: &Tolerances,
) -> Result<f64, LocatorError> {
    let sys = EigenSystem::at(pencil, Complex64::new(t, 0.0), tol)?;
    let d = sys.values[pair.1].re - sys.values[pair.0].re;
    Ok(d * d)
}

/// First guess off the real axis: the squared gap `(E_{ν+1} − E_ν)²` is
/// analytic in λ and vanishes at the EP, so a parabola through three real
/// samples around the seed has its complex root near `λ_c`.
fn initial_lambda(
    pencil: &MatrixPencil,
    seed: &SeedRegion,
    tol: &Tolerances,
) -> Result<Complex64, LocatorError> {
    let t0 = seed.lambda_seed.re;
    let h = seed.spacing.max(1e-6);
    let dm = pair_gap_squared(pencil, t0 - h, seed.pair, tol)?;
    let d0 = pair_gap_squared(pencil, t0, seed.pair, tol)?;
    let dp = pair_gap_squared(pencil, t0 + h, seed.pair, tol)?;
    let a = (dp + dm - 2.0 * d0) / (2.0 * h * h);
    let b = (dp - dm) / (2.0 * h);
    let disc = b * b - 4.0 * a * d0;
    if a > 0.0 && disc < 0.0 {
        Ok(Complex64::new(
            t0 - b / (2.0 * a),
            (-disc).sqrt() / (2.0 * a),
        ))
    } else if a > 0.0 {
        // real double root: a crossing on the axis
        Ok(Complex64::new(t0 - b / (2.0 * a), 1e-8))
    } else {
        let slope = (dp - dm).abs().sqrt() / (2.0 * h).sqrt();
        let im = if slope > 0.0 {
            seed.gap_at_seed / slope
        } else {
            seed.gap_at_seed
        };
        Ok(Complex64::new(t0, im.max(1e-8)))
    }
}

struct NewtonOutcome {
    lambda: Complex64,
    energy: Complex64,
    residual: f64,
    converged: bool,
    iterations: usize,
}

fn damped_newton(
    pencil: &MatrixPencil,
    lambda0: Complex64,
    energy0: Complex64,
    tol: &Tolerances,
) -> Result<NewtonOutcome, LocatorError> {
    let mut x = [lambda0, energy0];
    let mut f = scaled_conditions(pencil, x[0], x[1], tol)?;
    let mut res = residual_norm(&f);
    for it in 1..=MAX_NEWTON_ITERATIONS {
        let mut jac = [[Complex64::new(0.0, 0.0); 2]; 2];
        for var in 0..2 {
            let h = FD_RELATIVE_STEP * (1.0 + x[var].norm());
            let mut xp = x;
            let mut xm = x;
            xp[var] += h;
            xm[var] -= h;
            let fp = scaled_conditions(pencil, xp[0], xp[1], tol)?;
            let fm = scaled_conditions(pencil, xm[0], xm[1], tol)?;
            for eq in 0..2 {
                jac[eq][var] = (fp[eq] - fm[eq]) / (2.0 * h);
            }
        }
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        if det.norm() == 0.0 || !det.is_finite() {
            break;
        }
        let step = [
            -(jac[1][1] * f[0] - jac[0][1] * f[1]) / det,
            -(-jac[1][0] * f[0] + jac[0][0] * f[1]) / det,
        ];
        let mut scale = 1.0;
        let mut trial = [x[0] + step[0], x[1] + step[1]];
        let mut f_trial = scaled_conditions(pencil, trial[0], trial[1], tol)?;
        for _ in 0..MAX_HALVINGS {
            if residual_norm(&f_trial) < res {
                break;
            }
            scale *= 0.5;
            trial = [x[0] + step[0] * scale, x[1] + step[1] * scale];
            f_trial = scaled_conditions(pencil, trial[0], trial[1], tol)?;
        }
        let update = (step[0] * scale).norm().hypot((step[1] * scale).norm());
        let size = 1.0 + x[0].norm().hypot(x[1].norm());
        x = trial;
        f = f_trial;
        res = residual_norm(&f);
        if update < tol.newton_step * size && res < tol.newton_residual {
            return Ok(NewtonOutcome {
                lambda: x[0],
                energy: x[1],
                residual: res,
                converged: true,
                iterations: it,
            });
        }
    }
    Ok(NewtonOutcome {
        lambda: x[0],
        energy: x[1],
        residual: res,
        converged: res < tol.newton_residual,
        iterations: MAX_NEWTON_ITERATIONS,
    })
}

/// True when the two levels nearest `energy` at `lambda` span a genuine
/// two-dimensional eigenspace.
fn is_diabolic(
    pencil: &MatrixPencil,
    lambda: Complex64,
    energy: Complex64,
    tol: &Tolerances,
) -> Result<bool, LocatorError> {
    let sys = EigenSystem::at(pencil, lambda, tol)?;
    let (a, b) = nearest_pair(&sys.values, energy);
    let so_a = unit_self_orthogonality(&sys.right_vectors[a]);
    let so_b = unit_self_orthogonality(&sys.right_vectors[b]);
    Ok(so_a > DIABOLIC_SELF_ORTHOGONALITY && so_b > DIABOLIC_SELF_ORTHOGONALITY)
}

fn newton_from(
    pencil: &MatrixPencil,
    lambda0: Complex64,
    energy0: Complex64,
    tol: &Tolerances,
) -> Result<(Complex64, Complex64, f64), LocatorError> {
    let out = damped_newton(pencil, lambda0, energy0, tol)?;
    if out.lambda.is_finite() && out.energy.is_finite() {
        let scale = 1.0 + pencil.scale_at(out.lambda);
        let sys = EigenSystem::at(pencil, out.lambda, tol)?;
        let (a, b) = nearest_pair(&sys.values, out.energy);
        let gap = (sys.values[a] - sys.values[b]).norm();
        if gap <= 1e-6 * scale && is_diabolic(pencil, out.lambda, out.energy, tol)? {
            return Err(LocatorError::ConvergedToDiabolic {
                lambda: out.lambda,
                energy: out.energy,
            });
        }
    }
    if !out.converged {
        return Err(LocatorError::NoConvergence {
            iterations: out.iterations,
            lambda: out.lambda,
            residual: out.residual,
        });
    }
    Ok((out.lambda, out.energy, out.residual))
}

/// Refines a seed into an EP in the upper half plane. The conjugate partner
/// is [`ExceptionalPoint::conjugate`].
pub fn newton_ep(
    pencil: &MatrixPencil,
    seed: &SeedRegion,
    tol: &Tolerances,
) -> Result<ExceptionalPoint, LocatorError> {
    let at_seed = EigenSystem::at(pencil, seed.lambda_seed, tol)?;
    let energy0 = (at_seed.values[seed.pair.0] + at_seed.values[seed.pair.1]) * 0.5;
    let lambda0 = initial_lambda(pencil, seed, tol)?;
    let (mut lambda_c, mut e_c, residual) = newton_from(pencil, lambda0, energy0, tol)?;
    if lambda_c.im < 0.0 {
        lambda_c = lambda_c.conj();
        e_c = e_c.conj();
    }
    Ok(ExceptionalPoint {
        lambda_c,
        e_c,
        pair: seed.pair,
        lambda_ref: seed.lambda_seed.re,
        residual,
        chirality: None,
    })
}

/// Refines an EP from a bare λ guess. The starting energy is the midpoint of
/// the closest eigenvalue pair at the guess; the pair labels are taken at
/// `Re λ_c` as the adjacent real levels whose midpoint is nearest `Re E_c`.
pub fn refine_ep(
    pencil: &MatrixPencil,
    lambda_guess: Complex64,
    tol: &Tolerances,
) -> Result<ExceptionalPoint, LocatorError> {
    let sys = EigenSystem::at(pencil, lambda_guess, tol)?;
    let mut best = (0usize, 1usize, f64::INFINITY);
    for j in 0..sys.n() {
        for k in (j + 1)..sys.n() {
            let d = (sys.values[j] - sys.values[k]).norm();
            if d < best.2 {
                best = (j, k, d);
            }
        }
    }
    let energy0 = (sys.values[best.0] + sys.values[best.1]) * 0.5;
    let (lambda_c, e_c, residual) = newton_from(pencil, lambda_guess, energy0, tol)?;
    let lambda_ref = lambda_c.re;
    let real = EigenSystem::at(pencil, Complex64::new(lambda_ref, 0.0), tol)?;
    let nu = (0..real.n() - 1)
        .min_by(|&a, &b| {
            let ma = 0.5 * (real.values[a].re + real.values[a + 1].re);
            let mb = 0.5 * (real.values[b].re + real.values[b + 1].re);
            (ma - e_c.re).abs().total_cmp(&(mb - e_c.re).abs())
        })
        .unwrap_or(0);
    Ok(ExceptionalPoint {
        lambda_c,
        e_c,
        pair: (nu, nu + 1),
        lambda_ref,
        residual,
        chirality: None,
    })
}

/// Seeds, refines and deduplicates; returns every located EP together with
/// its conjugate, sorted by `(Re λ_c, Im λ_c)`. Seeds that fail to refine are
/// skipped.
pub fn find_exceptional_points(
    pencil: &MatrixPencil,
    interval: (f64, f64),
    steps: usize,
    tol: &Tolerances,
) -> Result<Vec<ExceptionalPoint>, LocatorError> {
    let seeds = seed_from_sweep(pencil, interval, steps, tol)?;
    let mut found: Vec<ExceptionalPoint> = Vec::new();
    for seed in &seeds {
        match newton_ep(pencil, seed, tol) {
            Ok(ep) => {
                let dup = found
                    .iter()
                    .any(|f| (f.lambda_c - ep.lambda_c).norm() < 1e-8 * (1.0 + ep.lambda_c.norm()));
                if !dup {
                    found.push(ep);
                }
            }
            Err(err) => log::debug!("seed at {} skipped: {err}", seed.lambda_seed),
        }
    }
    let mut all: Vec<ExceptionalPoint> =
        found.iter().flat_map(|ep| [*ep, ep.conjugate()]).collect();
    all.sort_by(|a, b| {
        a.lambda_c
            .re
            .total_cmp(&b.lambda_c.re)
            .then(a.lambda_c.im.total_cmp(&b.lambda_c.im))
    });
    Ok(all)
}

/// Least-squares line `y = slope·x + intercept`; returns `(slope, intercept, rms)`.
pub fn fit_line(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rms = (xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - slope * x - intercept).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    (slope, intercept, rms)
}

/// Log-spaced radii `[lo, hi]·(1 + |λ_c|)`.
pub fn log_radii(lambda_c: Complex64, window: (f64, f64), count: usize) -> Vec<f64> {
    let scale = 1.0 + lambda_c.norm();
    let (a, b) = (window.0.ln(), window.1.ln());
    (0..count)
        .map(|j| scale * (a + (b - a) * j as f64 / (count - 1) as f64).exp())
        .collect()
}

/// Fits `gap = |E_ν − E_{ν+1}|` against `r = |λ − λ_c|` on equally spaced
/// rays. `gap/√r` is the modulus of an analytic function of `λ − λ_c`, so the
/// mean of its logarithm over the rays drops every correction term below the
/// ray count's harmonic and the fit sees the pure square-root law.
pub fn verify_ep(
    pencil: &MatrixPencil,
    ep: &ExceptionalPoint,
    tol: &Tolerances,
) -> Result<PuiseuxFit, LocatorError> {
    verify_ep_in(pencil, ep, PUISEUX_WINDOW, tol)
}

/// [`verify_ep`] over a custom window (relative to `1 + |λ_c|`). The window
/// must stay inside the distance to the nearest other branch point of the
/// pair for the fit to see the square-root law.
pub fn verify_ep_in(
    pencil: &MatrixPencil,
    ep: &ExceptionalPoint,
    window: (f64, f64),
    tol: &Tolerances,
) -> Result<PuiseuxFit, LocatorError> {
    let radii = log_radii(ep.lambda_c, window, PUISEUX_SAMPLES_PER_RAY);
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut coeff_logs = Vec::new();
    for ray in 0..PUISEUX_RAYS {
        let angle = PUISEUX_RAY_ANGLE + std::f64::consts::TAU * ray as f64 / PUISEUX_RAYS as f64;
        for &r in &radii {
            let lambda = ep.lambda_c + Complex64::from_polar(r, angle);
            let sys = EigenSystem::at(pencil, lambda, tol)?;
            let (a, b) = nearest_pair(&sys.values, ep.e_c);
            let gap = (sys.values[a] - sys.values[b])
                .norm()
                .max(f64::MIN_POSITIVE);
            xs.push(r.ln());
            ys.push(gap.ln());
            coeff_logs.push(gap.ln() - 0.5 * r.ln());
        }
    }
    let (exponent, _, fit_residual) = fit_line(&xs, &ys);
    let mean_log = coeff_logs.iter().sum::<f64>() / coeff_logs.len() as f64;
    let fit = PuiseuxFit {
        exponent,
        leading_coeff_magnitude: 0.5 * mean_log.exp(),
        fit_window: (radii[0], radii[radii.len() - 1]),
        fit_residual,
    };
    if !(exponent > BRANCH_EXPONENT_RANGE.0 && exponent < BRANCH_EXPONENT_RANGE.1) {
        return Err(LocatorError::NotABranchPoint { fit });
    }
    Ok(fit)
}
