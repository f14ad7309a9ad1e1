//! The 33-ray Peres construction.

use super::{KSSet, KsError};
use crate::geometry::Direction;
use nalgebra::Vector3;

/// Orbits of the seed rays (0,0,1), (0,1,1), (0,1,sqrt2), (1,1,sqrt2) under
/// all 48 signed coordinate permutations, deduplicated as rays.
///
/// Yields exactly 33 directions (asserted): the 3 axes, 6 face diagonals,
/// and 24 rays mixing 1 and sqrt(2) components.
pub fn generate_peres_directions() -> Vec<Direction> {
    let sqrt2 = std::f64::consts::SQRT_2;
    let seeds = [
        [0.0, 0.0, 1.0],
        [0.0, 1.0, 1.0],
        [0.0, 1.0, sqrt2],
        [1.0, 1.0, sqrt2],
    ];
    let perms: [[usize; 3]; 6] = [
        [0, 1, 2],
        [0, 2, 1],
        [1, 0, 2],
        [1, 2, 0],
        [2, 0, 1],
        [2, 1, 0],
    ];
    let mut rays: Vec<Direction> = Vec::new();
    for seed in &seeds {
        for perm in &perms {
            for sign_bits in 0u8..8 {
                let v = Vector3::new(
                    sign(sign_bits, 0) * seed[perm[0]],
                    sign(sign_bits, 1) * seed[perm[1]],
                    sign(sign_bits, 2) * seed[perm[2]],
                );
                let dir = crate::geometry::normalize(v).expect("seeds are nonzero");
                if !rays.iter().any(|r| r.same_ray(&dir, 1e-9)) {
                    rays.push(dir);
                }
            }
        }
    }
    assert_eq!(rays.len(), 33, "Peres orbit enumeration must yield 33 rays");
    rays
}

fn sign(bits: u8, idx: usize) -> f64 {
    if bits >> idx & 1 == 1 {
        -1.0
    } else {
        1.0
    }
}

/// The Peres directions as a [`KSSet`] with derived triads.
pub fn peres_set(tolerance: f64) -> Result<KSSet, KsError> {
    KSSet::new("peres33", tolerance, generate_peres_directions(), None)
}
