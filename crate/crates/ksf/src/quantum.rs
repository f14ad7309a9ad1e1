//! Spin-1 quantum mechanics in the Cartesian representation.
//!
//! On C^3 with basis vectors tied to the spatial axes, the spin generators
//! are `(S_k)_{lm} = -i eps_{klm}`; the squared spin component along a unit
//! vector `n` is `S_n^2 = I - P0(n)` with `P0(n) = n n^T` the rank-1
//! projector onto outcome 0. For an orthonormal triad the three projectors
//! resolve the identity, which is exactly the sum rule: two results 1, one
//! result 0. Imperfect (jittered) directions no longer commute, so the
//! default measurement model is three sequential projective measurements
//! with the projection-update rule between them; a joint-frame model is
//! provided as a contrast that can never produce a sum other than 2.

use crate::geometry::{Direction, UNIT_TOL};
use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type CMat3 = Matrix3<Complex64>;
pub type CVec3 = Vector3<Complex64>;

/// Eigenvalue floor for density-matrix positivity.
const PSD_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuantumError {
    #[error("pure state must have unit norm (|psi| = {norm})")]
    NotNormalized { norm: f64 },
    #[error("density matrix is not Hermitian (max deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },
    #[error("density matrix must have trace 1 (trace = {trace})")]
    BadTrace { trace: f64 },
    #[error("density matrix has negative eigenvalue {eigenvalue:.3e}")]
    NotPositive { eigenvalue: f64 },
}

/// A spin-1 state: pure vector or density matrix, both in the Cartesian
/// representation.
#[derive(Debug, Clone, PartialEq)]
pub enum QState {
    Pure(CVec3),
    Mixed(CMat3),
}

impl QState {
    /// Validated pure state.
    pub fn pure(psi: CVec3) -> Result<Self, QuantumError> {
        let norm = psi.norm();
        if (norm - 1.0).abs() > UNIT_TOL {
            return Err(QuantumError::NotNormalized { norm });
        }
        Ok(QState::Pure(psi))
    }

    /// The S^2 = 0 eigenstate along `n`: the real vector `n` itself.
    pub fn pure_ray(n: &Direction) -> Self {
        QState::Pure(n.as_vector().map(|c| Complex64::new(c, 0.0)))
    }

    /// Validated density matrix.
    pub fn mixed(rho: CMat3) -> Result<Self, QuantumError> {
        let deviation = (rho - rho.adjoint()).iter().map(|c| c.norm()).fold(0.0, f64::max);
        if deviation > UNIT_TOL {
            return Err(QuantumError::NotHermitian { deviation });
        }
        let trace = rho.trace();
        if (trace.re - 1.0).abs() > UNIT_TOL || trace.im.abs() > UNIT_TOL {
            return Err(QuantumError::BadTrace { trace: trace.re });
        }
        let eigenvalues = rho.symmetric_eigenvalues();
        if let Some(min) = eigenvalues.iter().cloned().reduce(f64::min) {
            if min < -PSD_TOL {
                return Err(QuantumError::NotPositive { eigenvalue: min });
            }
        }
        Ok(QState::Mixed(rho))
    }

    /// The maximally mixed state I/3.
    pub fn maximally_mixed() -> Self {
        QState::Mixed(CMat3::identity() * Complex64::new(1.0 / 3.0, 0.0))
    }

    /// Haar-random pure state: three complex Gaussians, normalized.
    pub fn random_pure<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let mut psi = CVec3::zeros();
        loop {
            for c in psi.iter_mut() {
                *c = Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
            }
            let norm = psi.norm();
            if norm > 1e-6 {
                psi /= Complex64::new(norm, 0.0);
                break;
            }
        }
        QState::Pure(psi)
    }

    /// Density-matrix form of the state.
    pub fn density(&self) -> CMat3 {
        match self {
            QState::Pure(psi) => psi * psi.adjoint(),
            QState::Mixed(rho) => *rho,
        }
    }
}

/// One outcome of a single S^2 measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Zero,
    One,
    NoClick,
}

impl Outcome {
    pub fn value(&self) -> Option<u8> {
        match self {
            Outcome::Zero => Some(0),
            Outcome::One => Some(1),
            Outcome::NoClick => None,
        }
    }
}

/// One trial's three results on a triad.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeasurementRecord {
    pub triad_index: usize,
    pub results: [Outcome; 3],
}

impl MeasurementRecord {
    /// Sum of the three results; `None` when any detector failed to click.
    pub fn sum(&self) -> Option<u8> {
        self.results
            .iter()
            .try_fold(0u8, |acc, r| r.value().map(|v| acc + v))
    }
}

/// Cartesian spin-1 generators `(S_k)_{lm} = -i eps_{klm}`, for k = x, y, z.
///
/// Each satisfies `S_k^3 = S_k` with eigenvalues {+1, 0, -1}, and together
/// `S_x^2 + S_y^2 + S_z^2 = 2 I`.
pub fn spin_operators() -> [CMat3; 3] {
    let i = Complex64::i();
    let o = Complex64::ZERO;
    [
        CMat3::new(o, o, o, o, o, -i, o, i, o),
        CMat3::new(o, o, i, o, o, o, -i, o, o),
        CMat3::new(o, -i, o, i, o, o, o, o, o),
    ]
}

/// Spin component along `n`: `n_x S_x + n_y S_y + n_z S_z`.
pub fn spin_along(n: &Direction) -> CMat3 {
    let [sx, sy, sz] = spin_operators();
    sx * Complex64::new(n.x(), 0.0) + sy * Complex64::new(n.y(), 0.0)
        + sz * Complex64::new(n.z(), 0.0)
}

/// Rank-1 projector onto the `S_n^2 = 0` eigenspace: the outer product
/// `n n^T`. Satisfies `S_n^2 = I - P0(n)`.
pub fn zero_projector(n: &Direction) -> CMat3 {
    let v = n.as_vector();
    CMat3::from_fn(|r, c| Complex64::new(v[r] * v[c], 0.0))
}

fn clamp01(p: f64) -> f64 {
    p.clamp(0.0, 1.0)
}

fn outcome_zero_probability(rho: &CMat3, p0: &CMat3) -> f64 {
    clamp01((p0 * rho).trace().re)
}

/// Post-measurement state for the branch with probability `prob`.
fn project_update(rho: &CMat3, projector: &CMat3, prob: f64) -> CMat3 {
    (projector * rho * projector) / Complex64::new(prob, 0.0)
}

/// Exact probabilities of the eight result patterns of three sequential
/// projective `S^2` measurements along `d1`, `d2`, `d3` (in that order),
/// with the projection-update rule between steps.
///
/// Index = `r1 * 4 + r2 * 2 + r3` for pattern `(r1, r2, r3)` in {0,1}^3.
/// The directions need not be orthogonal; the probabilities always sum
/// to 1. Zero-probability branches are not descended.
pub fn branch_probabilities(
    state: &QState,
    d1: &Direction,
    d2: &Direction,
    d3: &Direction,
) -> [f64; 8] {
    let projectors = [zero_projector(d1), zero_projector(d2), zero_projector(d3)];
    let mut out = [0.0; 8];
    descend(&state.density(), &projectors, 0, 0, 1.0, &mut out);
    out
}

fn descend(
    rho: &CMat3,
    projectors: &[CMat3; 3],
    level: usize,
    pattern: usize,
    weight: f64,
    out: &mut [f64; 8],
) {
    if level == 3 {
        out[pattern] = weight;
        return;
    }
    let p0 = &projectors[level];
    let q0 = outcome_zero_probability(rho, p0);
    let q1 = 1.0 - q0;
    if q0 > 0.0 {
        let next = project_update(rho, p0, q0);
        descend(&next, projectors, level + 1, pattern << 1, weight * q0, out);
    }
    if q1 > 0.0 {
        let p1 = CMat3::identity() - p0;
        let next = project_update(rho, &p1, q1);
        descend(&next, projectors, level + 1, (pattern << 1) | 1, weight * q1, out);
    }
}

/// Samples one pattern of the sequential measurement, level by level.
/// Deterministic given the RNG state; `triad_index` is left at 0 for the
/// caller to fill in.
pub fn sequential_measure<R: Rng + ?Sized>(
    state: &QState,
    d1: &Direction,
    d2: &Direction,
    d3: &Direction,
    rng: &mut R,
) -> MeasurementRecord {
    let mut rho = state.density();
    let mut results = [Outcome::One; 3];
    for (level, d) in [d1, d2, d3].into_iter().enumerate() {
        let p0 = zero_projector(d);
        let q0 = outcome_zero_probability(&rho, &p0);
        // u < q0 can only fire when q0 > 0, and u >= q0 only when q0 < 1,
        // so the selected branch always has positive probability.
        let u: f64 = rng.random();
        if u < q0 {
            results[level] = Outcome::Zero;
            rho = project_update(&rho, &p0, q0);
        } else {
            results[level] = Outcome::One;
            let p1 = CMat3::identity() - p0;
            rho = project_update(&rho, &p1, 1.0 - q0);
        }
    }
    MeasurementRecord { triad_index: 0, results }
}

/// Joint projective measurement in an orthonormal frame: outcome `j` has
/// probability `<m_j|rho|m_j>` and yields result 0 along `m_j`, 1 along the
/// other two. The sum is always 2 regardless of how the frame was obtained,
/// which is what makes this model the contrast case: misalignment alone
/// cannot produce a sum-rule failure here.
pub fn joint_measure<R: Rng + ?Sized>(
    state: &QState,
    frame: &[Direction; 3],
    rng: &mut R,
) -> MeasurementRecord {
    let rho = state.density();
    let probs: Vec<f64> = frame
        .iter()
        .map(|m| outcome_zero_probability(&rho, &zero_projector(m)))
        .collect();
    let total: f64 = probs.iter().sum();
    let u: f64 = rng.random::<f64>() * total;
    let mut acc = 0.0;
    let mut chosen = 2;
    for (j, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            chosen = j;
            break;
        }
    }
    let mut results = [Outcome::One; 3];
    results[chosen] = Outcome::Zero;
    MeasurementRecord { triad_index: 0, results }
}

/// Depolarizing channel `rho -> (1 - p) rho + p I/3`.
pub fn depolarize(state: &QState, p: f64) -> QState {
    assert!((0.0..=1.0).contains(&p), "depolarizing p must lie in [0, 1]");
    if p == 0.0 {
        return state.clone();
    }
    let rho = state.density() * Complex64::new(1.0 - p, 0.0)
        + CMat3::identity() * Complex64::new(p / 3.0, 0.0);
    QState::Mixed(rho)
}
