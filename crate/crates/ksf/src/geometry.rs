//! Unit-vector arithmetic for switch positions.
//!
//! Measurement directions are rays: `n` and `-n` describe the same switch
//! position, so every [`Direction`] is stored in a canonical form with its
//! first nonzero component positive. All operations here are pure and take
//! any RNG explicitly.

use nalgebra::Vector3;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Tolerance for the unit-norm invariant.
pub const UNIT_TOL: f64 = 1e-12;
/// Default tolerance for orthogonality tests between rays.
pub const DEFAULT_ORTHO_TOL: f64 = 1e-9;
/// Below this norm a vector is considered degenerate.
const DEGENERACY_TOL: f64 = 1e-9;
/// Components smaller than this are treated as zero when canonicalizing.
const CANON_EPS: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("cannot normalize near-zero vector (|v| = {norm:.3e})")]
    ZeroVector { norm: f64 },
    #[error("directions are near-parallel, no orthogonal completion (|a x b| = {norm:.3e})")]
    DegeneratePair { norm: f64 },
    #[error("directions are linearly dependent within {DEGENERACY_TOL:.0e}, no frame")]
    DegenerateFrame,
}

/// A canonical unit ray in R^3.
///
/// Invariants: unit norm within [`UNIT_TOL`], and the first component larger
/// than `1e-12` in magnitude is positive, so antipodal vectors map to the
/// same value and file round trips are exact.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Direction {
    x: f64,
    y: f64,
    z: f64,
}

impl Direction {
    /// Normalize and canonicalize an arbitrary vector.
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self, GeometryError> {
        normalize(Vector3::new(x, y, z))
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    pub fn z(&self) -> f64 {
        self.z
    }

    pub fn as_vector(&self) -> Vector3<f64> {
        Vector3::new(self.x, self.y, self.z)
    }

    pub fn dot(&self, other: &Direction) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    /// True when both rays agree within `tol` of cosine distance.
    pub fn same_ray(&self, other: &Direction, tol: f64) -> bool {
        1.0 - self.dot(other).abs() <= tol
    }

    /// Positive x axis.
    pub fn x_axis() -> Self {
        Direction { x: 1.0, y: 0.0, z: 0.0 }
    }

    /// Positive y axis.
    pub fn y_axis() -> Self {
        Direction { x: 0.0, y: 1.0, z: 0.0 }
    }

    /// Positive z axis.
    pub fn z_axis() -> Self {
        Direction { x: 0.0, y: 0.0, z: 1.0 }
    }

    /// Two unit vectors spanning the plane orthogonal to `self`.
    fn orthogonal_plane(&self) -> (Vector3<f64>, Vector3<f64>) {
        let n = self.as_vector();
        // Cross against the axis least aligned with n.
        let axes = [Vector3::x(), Vector3::y(), Vector3::z()];
        let pick = axes
            .iter()
            .min_by(|a, b| n.dot(a).abs().partial_cmp(&n.dot(b).abs()).expect("finite"))
            .expect("nonempty");
        let e1 = n.cross(pick).normalize();
        let e2 = n.cross(&e1);
        (e1, e2)
    }
}

/// Normalize `v` to a canonical [`Direction`].
pub fn normalize(v: Vector3<f64>) -> Result<Direction, GeometryError> {
    let norm = v.norm();
    if norm <= CANON_EPS {
        return Err(GeometryError::ZeroVector { norm });
    }
    // Dividing an already-unit vector by its computed norm perturbs the
    // last ulp and would break byte-exact file round trips.
    let u = if (norm - 1.0).abs() <= 1e-15 { v } else { v / norm };
    let sign = [u.x, u.y, u.z]
        .iter()
        .find(|c| c.abs() > CANON_EPS)
        .map_or(1.0, |c| c.signum());
    Ok(Direction {
        x: flush_zero(sign * u.x),
        y: flush_zero(sign * u.y),
        z: flush_zero(sign * u.z),
    })
}

/// Collapse -0.0 so canonical serialization is unique.
fn flush_zero(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x
    }
}

/// True iff `|a . b| <= tol`.
pub fn is_orthogonal(a: &Direction, b: &Direction, tol: f64) -> bool {
    debug_assert!(tol >= 0.0);
    a.dot(b).abs() <= tol
}

/// Rotate `n` by a Gaussian angle about a uniformly random axis in the plane
/// orthogonal to `n`. With `sigma = 0` this is the identity.
///
/// This is the isotropic small-misalignment model used for finite switch
/// precision: the angular deviation is half-normal with mean
/// `sigma * sqrt(2/pi)`.
pub fn jitter<R: Rng + ?Sized>(n: &Direction, sigma: f64, rng: &mut R) -> Direction {
    assert!(sigma >= 0.0, "jitter sigma must be nonnegative");
    if sigma == 0.0 {
        return *n;
    }
    let theta: f64 = Normal::new(0.0, sigma)
        .expect("sigma is positive and finite")
        .sample(rng);
    let phi: f64 = rng.random::<f64>() * std::f64::consts::TAU;
    let (e1, e2) = n.orthogonal_plane();
    let axis = e1 * phi.cos() + e2 * phi.sin();
    // Rodrigues with axis orthogonal to n.
    let v = n.as_vector() * theta.cos() + axis.cross(&n.as_vector()) * theta.sin();
    normalize(v).expect("rotation preserves unit norm")
}

/// Third ray of the triad spanned by an orthogonal pair.
pub fn cross_complete(a: &Direction, b: &Direction) -> Result<Direction, GeometryError> {
    let c = a.as_vector().cross(&b.as_vector());
    let norm = c.norm();
    if norm <= DEGENERACY_TOL {
        return Err(GeometryError::DegeneratePair { norm });
    }
    normalize(c)
}

/// Orthonormal frame agreeing with `(a, b, c)` in switch order.
///
/// The first output is `a` exactly; the others are obtained by projecting
/// out the preceding vectors, so an exactly orthonormal input triad is a
/// fixed point (up to ray canonicalization).
pub fn gram_schmidt_frame(
    a: &Direction,
    b: &Direction,
    c: &Direction,
) -> Result<[Direction; 3], GeometryError> {
    // Projections are applied twice: one classical pass loses orthogonality
    // to cancellation when the inputs are nearly coplanar.
    let reject = |v: Vector3<f64>, basis: &[Vector3<f64>]| {
        let mut out = v;
        for _ in 0..2 {
            for e in basis {
                out -= e * e.dot(&out);
            }
        }
        out
    };
    let u0 = a.as_vector();
    let u1 = reject(b.as_vector(), &[u0]);
    if u1.norm() <= DEGENERACY_TOL {
        return Err(GeometryError::DegenerateFrame);
    }
    let u1 = u1 / u1.norm();
    let u2 = reject(c.as_vector(), &[u0, u1]);
    if u2.norm() <= DEGENERACY_TOL {
        return Err(GeometryError::DegenerateFrame);
    }
    Ok([
        *a,
        normalize(u1).expect("unit by construction"),
        normalize(u2).expect("norm checked above"),
    ])
}

impl Serialize for Direction {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        [self.x, self.y, self.z].serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Direction {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let [x, y, z] = <[f64; 3]>::deserialize(deserializer)?;
        Direction::new(x, y, z).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const SQRT_HALF: f64 = std::f64::consts::FRAC_1_SQRT_2;

    fn assert_dir_eq(d: &Direction, x: f64, y: f64, z: f64) {
        assert!(
            (d.x() - x).abs() < 1e-12 && (d.y() - y).abs() < 1e-12 && (d.z() - z).abs() < 1e-12,
            "got {:?}, want ({x}, {y}, {z})",
            d
        );
    }

    #[test]
    fn normalize_scales() {
        let d = Direction::new(0.0, 0.0, 2.0).unwrap();
        assert_dir_eq(&d, 0.0, 0.0, 1.0);
    }

    #[test]
    fn normalize_canonicalizes_antipodes() {
        let d = Direction::new(0.0, 0.0, -1.0).unwrap();
        assert_dir_eq(&d, 0.0, 0.0, 1.0);
        let d = Direction::new(-1.0, 1.0, 0.0).unwrap();
        assert_dir_eq(&d, SQRT_HALF, -SQRT_HALF, 0.0);
    }

    #[test]
    fn normalize_diagonal() {
        let d = Direction::new(1.0, 1.0, 0.0).unwrap();
        assert_dir_eq(&d, SQRT_HALF, SQRT_HALF, 0.0);
    }

    #[test]
    fn normalize_rejects_zero() {
        assert!(matches!(
            Direction::new(0.0, 0.0, 0.0),
            Err(GeometryError::ZeroVector { .. })
        ));
        assert!(matches!(
            Direction::new(1e-14, 0.0, 0.0),
            Err(GeometryError::ZeroVector { .. })
        ));
    }

    #[test]
    fn orthogonality_examples() {
        let x = Direction::x_axis();
        let y = Direction::y_axis();
        assert!(is_orthogonal(&x, &y, 1e-9));
        let diag = Direction::new(1.0, 1.0, 0.0).unwrap();
        assert!(!is_orthogonal(&x, &diag, 1e-9));
        let a = Direction::new(0.0, 1.0, 1.0).unwrap();
        let b = Direction::new(0.0, 1.0, -1.0).unwrap();
        assert!(is_orthogonal(&a, &b, 1e-9));
    }

    #[test]
    fn jitter_zero_sigma_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = Direction::z_axis();
        assert_eq!(jitter(&n, 0.0, &mut rng), n);
    }

    #[test]
    fn jitter_is_deterministic_given_seed() {
        let n = Direction::new(0.3, -0.4, 0.87).unwrap();
        let mut rng1 = ChaCha8Rng::seed_from_u64(99);
        let mut rng2 = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..32 {
            assert_eq!(jitter(&n, 0.02, &mut rng1), jitter(&n, 0.02, &mut rng2));
        }
    }

    #[test]
    fn jitter_mean_deviation_matches_half_normal() {
        // E|theta| = sigma * sqrt(2/pi) for theta ~ N(0, sigma^2); the ray
        // angle equals |theta| for deviations far below pi/2.
        let sigma = 0.01;
        let samples = 100_000;
        let n = Direction::z_axis();
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let mut sum = 0.0;
        let mut sumsq = 0.0;
        for _ in 0..samples {
            let j = jitter(&n, sigma, &mut rng);
            let angle = j.dot(&n).abs().min(1.0).acos();
            sum += angle;
            sumsq += angle * angle;
        }
        let mean = sum / samples as f64;
        let expected = sigma * (2.0 / std::f64::consts::PI).sqrt();
        // Half-normal: Var = sigma^2 (1 - 2/pi); allow 3 standard errors.
        let var = sumsq / samples as f64 - mean * mean;
        let stderr = (var / samples as f64).sqrt();
        assert!(
            (mean - expected).abs() < 3.0 * stderr,
            "mean {mean:.6e}, expected {expected:.6e}, stderr {stderr:.2e}"
        );
    }

    #[test]
    fn cross_complete_axes() {
        let z = cross_complete(&Direction::x_axis(), &Direction::y_axis()).unwrap();
        assert_dir_eq(&z, 0.0, 0.0, 1.0);
    }

    #[test]
    fn cross_complete_tilted_pair() {
        let a = Direction::new(0.0, 1.0, 1.0).unwrap();
        let b = Direction::x_axis();
        let c = cross_complete(&a, &b).unwrap();
        assert_dir_eq(&c, 0.0, SQRT_HALF, -SQRT_HALF);
    }

    #[test]
    fn cross_complete_rejects_parallel() {
        let x = Direction::x_axis();
        assert!(matches!(
            cross_complete(&x, &x),
            Err(GeometryError::DegeneratePair { .. })
        ));
    }

    #[test]
    fn gram_schmidt_fixed_point_on_orthonormal_triad() {
        let frame = gram_schmidt_frame(
            &Direction::x_axis(),
            &Direction::y_axis(),
            &Direction::z_axis(),
        )
        .unwrap();
        assert_eq!(frame[0], Direction::x_axis());
        assert_eq!(frame[1], Direction::y_axis());
        assert_eq!(frame[2], Direction::z_axis());
    }

    #[test]
    fn gram_schmidt_tilted_third_axis() {
        // z tilted by 0.1 rad in the x-z plane; projecting out x restores z.
        let theta: f64 = 0.1;
        let tilted = Direction::new(theta.sin(), 0.0, theta.cos()).unwrap();
        let frame =
            gram_schmidt_frame(&Direction::x_axis(), &Direction::y_axis(), &tilted).unwrap();
        assert_eq!(frame[0], Direction::x_axis());
        assert_dir_eq(&frame[1], 0.0, 1.0, 0.0);
        assert_dir_eq(&frame[2], 0.0, 0.0, 1.0);
    }

    #[test]
    fn gram_schmidt_rejects_dependent_input() {
        let x = Direction::x_axis();
        assert!(matches!(
            gram_schmidt_frame(&x, &x, &Direction::y_axis()),
            Err(GeometryError::DegenerateFrame)
        ));
    }

    #[test]
    fn direction_serde_round_trip() {
        let d = Direction::new(1.0, 2.0, -2.0).unwrap();
        let json = serde_json::to_string(&d).unwrap();
        let back: Direction = serde_json::from_str(&json).unwrap();
        assert_eq!(d, back);
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn arb_direction() -> impl Strategy<Value = Direction> {
            (-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0)
                .prop_filter_map("nonzero", |(x, y, z)| Direction::new(x, y, z).ok())
        }

        proptest! {
            #[test]
            fn directions_are_unit(d in arb_direction()) {
                prop_assert!((d.as_vector().norm() - 1.0).abs() <= UNIT_TOL);
            }

            #[test]
            fn cross_complete_is_orthogonal(d in arb_direction(), seed in any::<u64>()) {
                // Build a random orthogonal partner, then complete the pair.
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let (e1, e2) = d.orthogonal_plane();
                let phi = rng.random::<f64>() * std::f64::consts::TAU;
                let partner = normalize(e1 * phi.cos() + e2 * phi.sin()).unwrap();
                let third = cross_complete(&d, &partner).unwrap();
                prop_assert!(third.dot(&d).abs() <= 1e-10);
                prop_assert!(third.dot(&partner).abs() <= 1e-10);
                prop_assert!((third.as_vector().norm() - 1.0).abs() <= UNIT_TOL);
            }

            #[test]
            fn jittered_directions_stay_unit(d in arb_direction(), seed in any::<u64>()) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let j = jitter(&d, 0.3, &mut rng);
                prop_assert!((j.as_vector().norm() - 1.0).abs() <= UNIT_TOL);
            }

            #[test]
            fn gram_schmidt_frames_are_orthonormal(
                a in arb_direction(),
                b in arb_direction(),
                c in arb_direction(),
            ) {
                if let Ok(frame) = gram_schmidt_frame(&a, &b, &c) {
                    for i in 0..3 {
                        prop_assert!((frame[i].as_vector().norm() - 1.0).abs() <= UNIT_TOL);
                        for j in (i + 1)..3 {
                            prop_assert!(frame[i].dot(&frame[j]).abs() <= 1e-12);
                        }
                    }
                    let det = nalgebra::Matrix3::from_columns(&[
                        frame[0].as_vector(),
                        frame[1].as_vector(),
                        frame[2].as_vector(),
                    ])
                    .determinant();
                    prop_assert!((det.abs() - 1.0).abs() <= 1e-9);
                }
            }
        }
    }
}
