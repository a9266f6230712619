//! Continuation of the eigensystem along paths in the complex λ-plane.
//!
//! Levels are followed from sample to sample by the unconjugated overlap of
//! biorthogonally normalized vectors. After the last sample each track is
//! identified with a level of the freshly sorted eigensystem there, giving a
//! permutation and a ±1 sign per track. For a closed loop this is the
//! monodromy of the enclosed branch points.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::complex_json;
use crate::eigen::{bilinear, biorthogonal_normalize, EigenError, EigenSystem};
use crate::locator::ExceptionalPoint;
use crate::pencil::{CVector, MatrixPencil};
use crate::tolerances::Tolerances;

pub const DEFAULT_OVERLAP_THRESHOLD: f64 = 0.7;
pub const DEFAULT_MAX_BISECTION: usize = 12;
/// Samples closer than this to a known EP are refused.
pub const SAMPLE_EP_TOL: f64 = 1e-10;
/// Straight crossing paths closer than this to an EP are refused.
pub const PATH_EP_TOL: f64 = 1e-6;
pub const MIN_LOOP_STEPS: usize = 64;
/// Upper bound when searching for the order of a monodromy element.
const MAX_ORDER: usize = 64;

#[derive(Debug, thiserror::Error)]
pub enum ContinuationError {
    #[error(transparent)]
    Eigen(#[from] EigenError),
    #[error("a path needs at least two samples, got {0}")]
    TooFewSamples(usize),
    #[error("sample {lambda} is not finite")]
    NonFiniteSample { lambda: Complex64 },
    #[error("sample {lambda} lies within {SAMPLE_EP_TOL:e} of the exceptional point {ep}")]
    SampleThroughEP { lambda: Complex64, ep: Complex64 },
    #[error("matching failed between {from} and {to} after bisection (best overlap {overlap:.3})")]
    MatchingAmbiguous {
        from: Complex64,
        to: Complex64,
        overlap: f64,
    },
    #[error("level {level} is near-defective at {lambda}; its vector cannot be normalized")]
    NearDefective { lambda: Complex64, level: usize },
    #[error("path is not closed: first sample {first}, last sample {last}")]
    NotClosed { first: Complex64, last: Complex64 },
    #[error("invalid loop: {0}")]
    InvalidLoop(String),
    #[error("path passes within {PATH_EP_TOL:e} of the exceptional point {ep}")]
    PathThroughEP { ep: Complex64 },
    #[error("invalid crossing path: {0}")]
    InvalidPath(String),
}

#[derive(Debug, Clone)]
pub struct ContinuationOptions {
    pub tol: Tolerances,
    pub overlap_threshold: f64,
    pub max_bisection: usize,
    /// EP locations that samples must avoid.
    pub known_eps: Vec<Complex64>,
}

impl Default for ContinuationOptions {
    fn default() -> Self {
        Self {
            tol: Tolerances::default(),
            overlap_threshold: DEFAULT_OVERLAP_THRESHOLD,
            max_bisection: DEFAULT_MAX_BISECTION,
            known_eps: Vec::new(),
        }
    }
}

impl ContinuationOptions {
    pub fn with_known_eps(mut self, eps: &[ExceptionalPoint]) -> Self {
        self.known_eps = eps.iter().map(|ep| ep.lambda_c).collect();
        self
    }
}

/// Outcome of following all levels along a path.
#[derive(Debug, Clone)]
pub struct ContinuationState {
    /// Accepted path points, bisection points included.
    pub lambdas: Vec<Complex64>,
    /// `tracks[j][s]`: eigenvalue of track `j` at `lambdas[s]`.
    pub tracks: Vec<Vec<Complex64>>,
    /// Current biorthogonally normalized vector of each track.
    pub vectors: Vec<CVector>,
    /// Track `j` (labelled by the sorted order at the first sample) ends on
    /// sorted level `permutation[j]` at the last sample...
    pub permutation: Vec<usize>,
    /// ...as `signs[j]` times that level's normalized vector.
    pub signs: Vec<i8>,
    pub min_overlap_seen: f64,
}

impl ContinuationState {
    pub fn last_lambda(&self) -> Complex64 {
        *self.lambdas.last().expect("state holds at least one point")
    }

    /// Eigenvalues of all tracks at the last point.
    pub fn current_values(&self) -> Vec<Complex64> {
        self.tracks.iter().map(|t| *t.last().unwrap()).collect()
    }
}

fn normalized_system(
    pencil: &MatrixPencil,
    lambda: Complex64,
    tol: &Tolerances,
) -> Result<EigenSystem, ContinuationError> {
    let sys = biorthogonal_normalize(EigenSystem::at(pencil, lambda, tol)?, tol);
    if let Some(level) = sys.near_defective.iter().position(|&d| d) {
        return Err(ContinuationError::NearDefective { lambda, level });
    }
    Ok(sys)
}

/// Greedy best-first assignment on overlap magnitudes. Returns, per track,
/// the chosen level and the overlap.
fn greedy_match(prev: &[CVector], next: &EigenSystem) -> Vec<(usize, Complex64)> {
    let n = prev.len();
    let mut entries = Vec::with_capacity(n * n);
    for (j, u) in prev.iter().enumerate() {
        for (k, v) in next.right_vectors.iter().enumerate() {
            entries.push((j, k, bilinear(u, v)));
        }
    }
    entries.sort_by(|a, b| b.2.norm().total_cmp(&a.2.norm()));
    let mut out = vec![(usize::MAX, Complex64::new(0.0, 0.0)); n];
    let mut taken = vec![false; n];
    let mut assigned = 0;
    for (j, k, o) in entries {
        if out[j].0 == usize::MAX && !taken[k] {
            out[j] = (k, o);
            taken[k] = true;
            assigned += 1;
            if assigned == n {
                break;
            }
        }
    }
    out
}

struct Tracker<'a> {
    pencil: &'a MatrixPencil,
    opts: &'a ContinuationOptions,
    state: ContinuationState,
}

impl Tracker<'_> {
    fn advance(
        &mut self,
        from: Complex64,
        to: Complex64,
        depth: usize,
    ) -> Result<(), ContinuationError> {
        let next = normalized_system(self.pencil, to, &self.opts.tol)?;
        let matching = greedy_match(&self.state.vectors, &next);
        let worst = matching
            .iter()
            .map(|m| m.1.norm())
            .fold(f64::INFINITY, f64::min);
        if worst < self.opts.overlap_threshold {
            if depth >= self.opts.max_bisection {
                return Err(ContinuationError::MatchingAmbiguous {
                    from,
                    to,
                    overlap: worst,
                });
            }
            let mid = (from + to) * 0.5;
            self.advance(from, mid, depth + 1)?;
            return self.advance(mid, to, depth + 1);
        }
        let st = &mut self.state;
        for (j, (k, o)) in matching.into_iter().enumerate() {
            let sign: i8 = if o.re < 0.0 { -1 } else { 1 };
            st.vectors[j] = next.right_vectors[k].map(|x| x * f64::from(sign));
            st.tracks[j].push(next.values[k]);
            st.permutation[j] = k;
            st.signs[j] = sign;
        }
        st.lambdas.push(to);
        st.min_overlap_seen = st.min_overlap_seen.min(worst);
        Ok(())
    }
}

/// Follows every level of `pencil` through `samples`.
///
/// Signs are accumulated relative to the deterministic gauge of the sorted
/// eigensystem at each point, so the final `(permutation, signs)` express the
/// tracked vectors in the basis computed fresh at the last sample.
pub fn continue_along(
    pencil: &MatrixPencil,
    samples: &[Complex64],
    opts: &ContinuationOptions,
) -> Result<ContinuationState, ContinuationError> {
    if samples.len() < 2 {
        return Err(ContinuationError::TooFewSamples(samples.len()));
    }
    for &lambda in samples {
        if !lambda.is_finite() {
            return Err(ContinuationError::NonFiniteSample { lambda });
        }
        for &ep in &opts.known_eps {
            if (lambda - ep).norm() < SAMPLE_EP_TOL {
                return Err(ContinuationError::SampleThroughEP { lambda, ep });
            }
        }
    }
    let start = normalized_system(pencil, samples[0], &opts.tol)?;
    let n = start.n();
    let mut tracker = Tracker {
        pencil,
        opts,
        state: ContinuationState {
            lambdas: vec![samples[0]],
            tracks: start.values.iter().map(|&e| vec![e]).collect(),
            vectors: start.right_vectors.clone(),
            permutation: (0..n).collect(),
            signs: vec![1; n],
            min_overlap_seen: f64::INFINITY,
        },
    };
    for w in samples.windows(2) {
        tracker.advance(w[0], w[1], 0)?;
    }
    Ok(tracker.state)
}

/// A polygonal circle traversed `turns` times.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoopPath {
    #[serde(with = "complex_json")]
    pub center: Complex64,
    pub radius: f64,
    pub n_steps: usize,
    /// +1 counterclockwise, −1 clockwise.
    pub orientation: i8,
    pub turns: usize,
}

impl LoopPath {
    pub fn new(center: Complex64, radius: f64, n_steps: usize) -> Self {
        Self {
            center,
            radius,
            n_steps,
            orientation: 1,
            turns: 1,
        }
    }

    pub fn with_turns(self, turns: usize) -> Self {
        Self { turns, ..self }
    }

    pub fn with_orientation(self, orientation: i8) -> Self {
        Self {
            orientation,
            ..self
        }
    }

    pub fn validate(&self) -> Result<(), ContinuationError> {
        if !(self.radius.is_finite() && self.radius > 0.0) {
            return Err(ContinuationError::InvalidLoop(format!(
                "radius must be positive, got {}",
                self.radius
            )));
        }
        if self.n_steps < MIN_LOOP_STEPS {
            return Err(ContinuationError::InvalidLoop(format!(
                "at least {MIN_LOOP_STEPS} steps required, got {}",
                self.n_steps
            )));
        }
        if self.orientation != 1 && self.orientation != -1 {
            return Err(ContinuationError::InvalidLoop(format!(
                "orientation must be +1 or -1, got {}",
                self.orientation
            )));
        }
        if self.turns == 0 {
            return Err(ContinuationError::InvalidLoop(
                "turns must be at least 1".into(),
            ));
        }
        if !self.center.is_finite() {
            return Err(ContinuationError::InvalidLoop(
                "center is not finite".into(),
            ));
        }
        Ok(())
    }

    /// Point `k` of one turn; `k = n_steps` closes the turn.
    fn point(&self, k: usize) -> Complex64 {
        if k.is_multiple_of(self.n_steps) {
            return self.center + self.radius;
        }
        let angle = f64::from(self.orientation) * TAU * k as f64 / self.n_steps as f64;
        self.center + Complex64::from_polar(self.radius, angle)
    }

    /// Samples of one turn, closing sample included.
    pub fn turn_samples(&self) -> Vec<Complex64> {
        (0..=self.n_steps).map(|k| self.point(k)).collect()
    }

    /// All samples over every turn; the last sample equals the first.
    pub fn samples(&self) -> Vec<Complex64> {
        let mut out = vec![self.point(0)];
        for _ in 0..self.turns {
            out.extend((1..=self.n_steps).map(|k| self.point(k)));
        }
        out
    }

    /// Number of the given points strictly inside the circle.
    pub fn enclosed(&self, points: &[Complex64]) -> usize {
        points
            .iter()
            .filter(|p| (**p - self.center).norm() < self.radius)
            .count()
    }
}

/// A signed permutation: track `j` ends as `signs[j]·χ_{permutation[j]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignedPermutation {
    pub permutation: Vec<usize>,
    pub signs: Vec<i8>,
}

impl SignedPermutation {
    pub fn identity(n: usize) -> Self {
        Self {
            permutation: (0..n).collect(),
            signs: vec![1; n],
        }
    }

    pub fn is_identity(&self) -> bool {
        self.permutation.iter().enumerate().all(|(j, &p)| p == j)
            && self.signs.iter().all(|&s| s == 1)
    }

    /// `self` followed by `next`.
    pub fn then(&self, next: &Self) -> Self {
        let permutation = self
            .permutation
            .iter()
            .map(|&p| next.permutation[p])
            .collect();
        let signs = self
            .signs
            .iter()
            .zip(&self.permutation)
            .map(|(&s, &p)| s * next.signs[p])
            .collect();
        Self { permutation, signs }
    }

    pub fn power(&self, k: usize) -> Self {
        (0..k).fold(Self::identity(self.permutation.len()), |acc, _| {
            acc.then(self)
        })
    }

    pub fn inverse(&self) -> Self {
        let n = self.permutation.len();
        let mut permutation = vec![0; n];
        let mut signs = vec![1; n];
        for (j, (&p, &s)) in self.permutation.iter().zip(&self.signs).enumerate() {
            permutation[p] = j;
            signs[p] = s;
        }
        Self { permutation, signs }
    }

    /// Smallest `k ≥ 1` with `self^k = 1`.
    pub fn order(&self) -> Option<usize> {
        let mut acc = self.clone();
        for k in 1..=MAX_ORDER {
            if acc.is_identity() {
                return Some(k);
            }
            acc = acc.then(self);
        }
        None
    }

    /// Cycles of the permutation (each starting at its smallest member) with
    /// the product of the signs along the cycle. Unlike the individual signs,
    /// the sign products do not depend on the gauge of the basis vectors.
    pub fn cycles(&self) -> Vec<(Vec<usize>, i8)> {
        let n = self.permutation.len();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut cycle = Vec::new();
            let mut sign = 1;
            let mut j = start;
            while !seen[j] {
                seen[j] = true;
                cycle.push(j);
                sign *= self.signs[j];
                j = self.permutation[j];
            }
            out.push((cycle, sign));
        }
        out
    }

    /// Levels moved or sign-flipped.
    pub fn support(&self) -> Vec<usize> {
        (0..self.permutation.len())
            .filter(|&j| self.permutation[j] != j || self.signs[j] != 1)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonodromyResult {
    pub permutation: Vec<usize>,
    pub signs: Vec<i8>,
    /// Order of the single-turn element; `None` when above the search bound.
    pub loops_to_identity: Option<usize>,
    pub min_overlap: f64,
}

impl MonodromyResult {
    pub fn element(&self) -> SignedPermutation {
        SignedPermutation {
            permutation: self.permutation.clone(),
            signs: self.signs.clone(),
        }
    }

    /// The transposition `(a, b)` with exactly one sign flip inside and no
    /// other level touched.
    pub fn is_signed_transposition(&self, a: usize, b: usize) -> bool {
        let e = self.element();
        e.support() == vec![a.min(b), a.max(b)]
            && e.permutation[a] == b
            && e.permutation[b] == a
            && e.signs[a] * e.signs[b] == -1
    }
}

fn closing_element(state: &ContinuationState) -> SignedPermutation {
    SignedPermutation {
        permutation: state.permutation.clone(),
        signs: state.signs.clone(),
    }
}

/// Monodromy of a closed user path (first sample must equal the last).
pub fn monodromy_along(
    pencil: &MatrixPencil,
    samples: &[Complex64],
    opts: &ContinuationOptions,
) -> Result<(MonodromyResult, ContinuationState), ContinuationError> {
    let (first, last) = match (samples.first(), samples.last()) {
        (Some(&f), Some(&l)) => (f, l),
        _ => return Err(ContinuationError::TooFewSamples(samples.len())),
    };
    if first != last {
        return Err(ContinuationError::NotClosed { first, last });
    }
    let state = continue_along(pencil, samples, opts)?;
    let element = closing_element(&state);
    Ok((
        MonodromyResult {
            loops_to_identity: element.order(),
            permutation: element.permutation,
            signs: element.signs,
            min_overlap: state.min_overlap_seen,
        },
        state,
    ))
}

/// Continues around `lp.turns` turns of the loop. The returned permutation
/// and signs are those after all turns; `loops_to_identity` is the order of
/// the single-turn element.
pub fn monodromy(
    pencil: &MatrixPencil,
    lp: &LoopPath,
    opts: &ContinuationOptions,
) -> Result<MonodromyResult, ContinuationError> {
    monodromy_with_tracks(pencil, lp, opts).map(|(m, _)| m)
}

/// [`monodromy`] together with the continuation state (for track output).
pub fn monodromy_with_tracks(
    pencil: &MatrixPencil,
    lp: &LoopPath,
    opts: &ContinuationOptions,
) -> Result<(MonodromyResult, ContinuationState), ContinuationError> {
    lp.validate()?;
    let one = continue_along(pencil, &lp.turn_samples(), opts)?;
    let single = closing_element(&one);
    let (element, state, min_overlap) = if lp.turns == 1 {
        let min = one.min_overlap_seen;
        (single.clone(), one, min)
    } else {
        let all = continue_along(pencil, &lp.samples(), opts)?;
        let min = all.min_overlap_seen;
        (closing_element(&all), all, min)
    };
    Ok((
        MonodromyResult {
            permutation: element.permutation,
            signs: element.signs,
            loops_to_identity: single.order(),
            min_overlap,
        },
        state,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossingReport {
    pub energies_cross: bool,
    pub widths_cross: bool,
    /// `t` of the first intersection found (energies first, then widths).
    pub crossing_parameter: Option<f64>,
    /// Track indices (sorted order at the path start) of the followed pair.
    pub pair: (usize, usize),
}

/// First parameter at which `d` changes sign, linearly interpolated.
/// Exact zeros are skipped so a sample sitting on the crossing still counts.
fn sign_change(ts: &[f64], d: &[f64]) -> Option<f64> {
    let mut last: Option<(f64, f64)> = None;
    for (&t, &x) in ts.iter().zip(d) {
        if x == 0.0 {
            continue;
        }
        if let Some((t0, x0)) = last {
            if x0.signum() != x.signum() {
                return Some(t0 + (t - t0) * x0 / (x0 - x));
            }
        }
        last = Some((t, x));
    }
    None
}

/// Follows the horizontal path `t + i·offset`, `t ∈ t_range`, and reports
/// whether the real and imaginary parts of the pair coalescing at `ep`
/// intersect.
pub fn classify_crossing(
    pencil: &MatrixPencil,
    ep: &ExceptionalPoint,
    offset: f64,
    t_range: (f64, f64),
    steps: usize,
    opts: &ContinuationOptions,
) -> Result<(CrossingReport, ContinuationState), ContinuationError> {
    let (t0, t1) = t_range;
    if !(t0.is_finite() && t1.is_finite() && t0 < t1) || steps < 2 || !offset.is_finite() {
        return Err(ContinuationError::InvalidPath(format!(
            "need t0 < t1 and at least 2 steps, got ({t0}, {t1}) with {steps}"
        )));
    }
    let eps = std::iter::once(ep.lambda_c)
        .chain(std::iter::once(ep.lambda_c.conj()))
        .chain(opts.known_eps.iter().copied());
    for lc in eps {
        let nearest_t = lc.re.clamp(t0, t1);
        if (Complex64::new(nearest_t, offset) - lc).norm() < PATH_EP_TOL {
            return Err(ContinuationError::PathThroughEP { ep: lc });
        }
    }
    let ts: Vec<f64> = (0..=steps)
        .map(|k| t0 + (t1 - t0) * k as f64 / steps as f64)
        .collect();
    let samples: Vec<Complex64> = ts.iter().map(|&t| Complex64::new(t, offset)).collect();
    let state = continue_along(pencil, &samples, opts)?;

    // the sample nearest Re λ_c along the path, in accepted-point indices
    let s_ref = state
        .lambdas
        .iter()
        .enumerate()
        .min_by(|a, b| {
            (a.1.re - ep.lambda_c.re)
                .abs()
                .total_cmp(&(b.1.re - ep.lambda_c.re).abs())
        })
        .map(|(s, _)| s)
        .unwrap_or(0);
    let mut order: Vec<usize> = (0..state.tracks.len()).collect();
    order.sort_by(|&a, &b| {
        (state.tracks[a][s_ref] - ep.e_c)
            .norm()
            .total_cmp(&(state.tracks[b][s_ref] - ep.e_c).norm())
    });
    let (a, b) = (order[0].min(order[1]), order[0].max(order[1]));

    let path_t: Vec<f64> = state.lambdas.iter().map(|l| l.re).collect();
    let diff: Vec<Complex64> = state.tracks[a]
        .iter()
        .zip(&state.tracks[b])
        .map(|(x, y)| x - y)
        .collect();
    let re: Vec<f64> = diff.iter().map(|d| d.re).collect();
    let im: Vec<f64> = diff.iter().map(|d| d.im).collect();
    let energy_t = sign_change(&path_t, &re);
    let width_t = sign_change(&path_t, &im);
    Ok((
        CrossingReport {
            energies_cross: energy_t.is_some(),
            widths_cross: width_t.is_some(),
            crossing_parameter: energy_t.or(width_t),
            pair: (a, b),
        },
        state,
    ))
}
