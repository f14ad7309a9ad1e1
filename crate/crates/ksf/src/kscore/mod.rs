//! Kochen-Specker sets and the machinery of the uncolorability argument.
//!
//! A [`KSSet`] holds canonical direction rays plus the index triples that are
//! pairwise orthogonal within its tolerance. Uncolorability (no {0,1}
//! assignment with exactly one 0 per triad) is established by the solver in
//! [`solver`], cross-checked by the independent clause encoding in [`sat`].
//! For an uncolorable set of `N` triads, every deterministic hidden-variable
//! point violates at least one triad, so the per-triad failure measures
//! `eps_k` obey `sum_k eps_k >= 1` and non-contextual models are excluded as
//! soon as the worst observed failure rate stays below `1/N`.

mod peres;
mod sat;
mod solver;

pub use peres::{generate_peres_directions, peres_set};
pub use sat::clause_encoding_colorable;
pub use solver::{is_colorable, min_violated_triads};

use crate::geometry::{self, Direction, GeometryError};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KsError {
    #[error("directions {i} and {j} are the same ray within tolerance")]
    DuplicateDirection { i: usize, j: usize },
    #[error("triad {triad:?} listed more than once")]
    DuplicateTriad { triad: [usize; 3] },
    #[error("triad {triad:?} has repeated or out-of-range indices (set has {n_directions} directions)")]
    BadTriadIndices { triad: [usize; 3], n_directions: usize },
    #[error("triad {triad:?} is not pairwise orthogonal within {tolerance:.3e} (worst |dot| = {worst_dot:.3e})")]
    NonOrthogonalTriad { triad: [usize; 3], tolerance: f64, worst_dot: f64 },
    #[error("set is colorable; the 1/N exclusion threshold is undefined")]
    ColorableSet,
    #[error("model point {point} assigns {got} values but the set has {expected} directions")]
    IncompleteModel { point: usize, expected: usize, got: usize },
    #[error("model weights must be nonnegative and sum to 1 (sum = {sum})")]
    BadWeights { sum: f64 },
    #[error("model values must be 0 or 1 (point {point} has {value})")]
    BadModelValue { point: usize, value: u8 },
    #[error("model has no points")]
    EmptyModel,
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Canonically ordered index triple `i < j < k` into a direction list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Triad {
    i: usize,
    j: usize,
    k: usize,
}

impl Triad {
    /// Sorts the indices; they must be pairwise distinct.
    pub fn new(a: usize, b: usize, c: usize) -> Option<Self> {
        let mut m = [a, b, c];
        m.sort_unstable();
        if m[0] == m[1] || m[1] == m[2] {
            return None;
        }
        Some(Triad { i: m[0], j: m[1], k: m[2] })
    }

    pub fn members(&self) -> [usize; 3] {
        [self.i, self.j, self.k]
    }
}

impl Serialize for Triad {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.members().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Triad {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let [a, b, c] = <[usize; 3]>::deserialize(d)?;
        Triad::new(a, b, c).ok_or_else(|| {
            serde::de::Error::custom(format!("triad [{a}, {b}, {c}] has repeated indices"))
        })
    }
}

/// A named set of direction rays with its orthogonal triads.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KSSet {
    name: String,
    tolerance: f64,
    directions: Vec<Direction>,
    triads: Vec<Triad>,
}

impl KSSet {
    /// Validates directions and triads; derives the triads by exhaustive
    /// search when `triads` is `None`.
    pub fn new(
        name: impl Into<String>,
        tolerance: f64,
        directions: Vec<Direction>,
        triads: Option<Vec<Triad>>,
    ) -> Result<Self, KsError> {
        for i in 0..directions.len() {
            for j in (i + 1)..directions.len() {
                if directions[i].same_ray(&directions[j], tolerance) {
                    return Err(KsError::DuplicateDirection { i, j });
                }
            }
        }
        let mut triads = match triads {
            Some(ts) => ts,
            None => find_triads(&directions, tolerance),
        };
        triads.sort_unstable();
        for (idx, t) in triads.iter().enumerate() {
            let [i, j, k] = t.members();
            if k >= directions.len() {
                return Err(KsError::BadTriadIndices {
                    triad: [i, j, k],
                    n_directions: directions.len(),
                });
            }
            if idx > 0 && triads[idx - 1] == *t {
                return Err(KsError::DuplicateTriad { triad: [i, j, k] });
            }
            let worst = [(i, j), (i, k), (j, k)]
                .iter()
                .map(|&(a, b)| directions[a].dot(&directions[b]).abs())
                .fold(0.0, f64::max);
            if worst > tolerance {
                return Err(KsError::NonOrthogonalTriad {
                    triad: [i, j, k],
                    tolerance,
                    worst_dot: worst,
                });
            }
        }
        Ok(KSSet { name: name.into(), tolerance, directions, triads })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn directions(&self) -> &[Direction] {
        &self.directions
    }

    pub fn triads(&self) -> &[Triad] {
        &self.triads
    }

    /// Number of triads, the `N` of the `1/N` threshold.
    pub fn n_triads(&self) -> usize {
        self.triads.len()
    }

    /// True when some direction appears in at least two triads. A set with
    /// no shared switch positions can never be uncolorable.
    pub fn has_shared_direction(&self) -> bool {
        let mut seen = vec![0u32; self.directions.len()];
        for t in &self.triads {
            for m in t.members() {
                seen[m] += 1;
                if seen[m] >= 2 {
                    return true;
                }
            }
        }
        false
    }
}

impl<'de> Deserialize<'de> for KSSet {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Doc {
            name: String,
            tolerance: f64,
            directions: Vec<Direction>,
            #[serde(default)]
            triads: Option<Vec<Triad>>,
        }
        let doc = Doc::deserialize(d)?;
        KSSet::new(doc.name, doc.tolerance, doc.directions, doc.triads)
            .map_err(serde::de::Error::custom)
    }
}

/// All index triples whose members are pairwise orthogonal within `tol`,
/// in lexicographic order.
pub fn find_triads(directions: &[Direction], tol: f64) -> Vec<Triad> {
    let n = directions.len();
    let mut out = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if !geometry::is_orthogonal(&directions[i], &directions[j], tol) {
                continue;
            }
            for k in (j + 1)..n {
                if geometry::is_orthogonal(&directions[i], &directions[k], tol)
                    && geometry::is_orthogonal(&directions[j], &directions[k], tol)
                {
                    out.push(Triad::new(i, j, k).expect("indices are distinct"));
                }
            }
        }
    }
    out
}

/// Closes a set under triad completion: every orthogonal pair that is not in
/// a common triad gains its cross-product third ray and the resulting triad.
///
/// Converts pair constraints ("not both 0") into triad constraints, so the
/// solver and the experiment only ever deal with triads. Iterates until no
/// pair is uncovered, hence idempotent; the input's directions and triads
/// are preserved as a prefix/subset. Note the completion raises `N`, which
/// tightens the `1/N` threshold.
pub fn triad_complete(set: &KSSet) -> Result<KSSet, KsError> {
    let tol = set.tolerance;
    let mut directions = set.directions.clone();
    let mut triads = set.triads.clone();
    loop {
        let mut covered = std::collections::HashSet::new();
        for t in &triads {
            let [i, j, k] = t.members();
            covered.insert((i, j));
            covered.insert((i, k));
            covered.insert((j, k));
        }
        let mut added = false;
        let n = directions.len();
        for i in 0..n {
            for j in (i + 1)..n {
                if covered.contains(&(i, j))
                    || !geometry::is_orthogonal(&directions[i], &directions[j], tol)
                {
                    continue;
                }
                let third = geometry::cross_complete(&directions[i], &directions[j])?;
                let idx = match directions.iter().position(|d| d.same_ray(&third, tol)) {
                    Some(idx) => idx,
                    None => {
                        directions.push(third);
                        directions.len() - 1
                    }
                };
                let triad = Triad::new(i, j, idx).expect("three distinct indices");
                if !triads.contains(&triad) {
                    triads.push(triad);
                    let [a, b, c] = triad.members();
                    covered.insert((a, b));
                    covered.insert((a, c));
                    covered.insert((b, c));
                    added = true;
                }
            }
        }
        if !added {
            break;
        }
    }
    KSSet::new(set.name.clone(), tol, directions, Some(triads))
}

/// The exclusion threshold `1/N` of an uncolorable set.
pub fn epsilon_threshold(set: &KSSet) -> Result<f64, KsError> {
    match is_colorable(set).status {
        ColorStatus::Colorable { .. } => Err(KsError::ColorableSet),
        ColorStatus::Uncolorable => Ok(1.0 / set.n_triads() as f64),
    }
}

/// Lower bound `max(0, 1 - sum(eps_k))` on the measure of the intersection
/// of the per-triad success sets; with uniform `eps` this is `1 - N eps`.
pub fn union_bound_lower(eps_per_triad: &[f64]) -> f64 {
    for &e in eps_per_triad {
        assert!((0.0..=1.0).contains(&e), "eps must lie in [0, 1], got {e}");
    }
    (1.0 - eps_per_triad.iter().sum::<f64>()).max(0.0)
}

/// A {0,1}-valuation of every direction of a set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Assignment {
    values: Vec<u8>,
}

impl Assignment {
    pub fn new(values: Vec<u8>) -> Self {
        debug_assert!(values.iter().all(|&v| v <= 1));
        Assignment { values }
    }

    pub fn value(&self, direction: usize) -> u8 {
        self.values[direction]
    }

    pub fn values(&self) -> &[u8] {
        &self.values
    }

    /// True when triad members carry exactly one 0.
    pub fn satisfies(&self, triad: &Triad) -> bool {
        let zeros = triad
            .members()
            .iter()
            .filter(|&&m| self.values[m] == 0)
            .count();
        zeros == 1
    }
}

/// One deterministic hidden-variable point: a weight and a value per
/// direction. System and apparatus variables are merged; only the joint
/// point ever enters the argument.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HVPoint {
    pub weight: f64,
    pub values: Vec<u8>,
}

/// A finite non-contextual hidden-variable model: a probability mixture of
/// deterministic assignments.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct HVModel {
    points: Vec<HVPoint>,
}

impl HVModel {
    pub fn new(points: Vec<HVPoint>) -> Result<Self, KsError> {
        if points.is_empty() {
            return Err(KsError::EmptyModel);
        }
        let mut sum = 0.0;
        for (idx, p) in points.iter().enumerate() {
            if p.weight < 0.0 || !p.weight.is_finite() {
                return Err(KsError::BadWeights { sum: p.weight });
            }
            sum += p.weight;
            if let Some(&v) = p.values.iter().find(|&&v| v > 1) {
                return Err(KsError::BadModelValue { point: idx, value: v });
            }
        }
        if (sum - 1.0).abs() > 1e-12 {
            return Err(KsError::BadWeights { sum });
        }
        Ok(HVModel { points })
    }

    pub fn points(&self) -> &[HVPoint] {
        &self.points
    }

    /// Cumulative weights for inverse-CDF sampling.
    pub fn cumulative_weights(&self) -> Vec<f64> {
        let mut acc = 0.0;
        self.points
            .iter()
            .map(|p| {
                acc += p.weight;
                acc
            })
            .collect()
    }

    /// Every point must assign a value to every direction of `set`.
    pub fn check_complete(&self, set: &KSSet) -> Result<(), KsError> {
        let expected = set.directions().len();
        for (idx, p) in self.points.iter().enumerate() {
            if p.values.len() < expected {
                return Err(KsError::IncompleteModel {
                    point: idx,
                    expected,
                    got: p.values.len(),
                });
            }
        }
        Ok(())
    }
}

impl<'de> Deserialize<'de> for HVModel {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let points = Vec::<HVPoint>::deserialize(d)?;
        HVModel::new(points).map_err(serde::de::Error::custom)
    }
}

/// Per-triad failure measures `eps_k`: the total weight of model points
/// whose values violate exactly-one-zero on triad `k`.
pub fn nchv_failure_probs(model: &HVModel, set: &KSSet) -> Result<Vec<f64>, KsError> {
    model.check_complete(set)?;
    let mut eps = vec![0.0; set.n_triads()];
    for point in model.points() {
        let assignment = Assignment::new(point.values.clone());
        for (k, triad) in set.triads().iter().enumerate() {
            if !assignment.satisfies(triad) {
                eps[k] += point.weight;
            }
        }
    }
    // Weight sums are probabilities; keep rounding from pushing past 1.
    for e in &mut eps {
        *e = e.min(1.0);
    }
    Ok(eps)
}

/// Solver verdict together with search statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColorabilityReport {
    pub status: ColorStatus,
    pub nodes_explored: u64,
    pub elapsed_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColorStatus {
    Colorable { witness: Assignment },
    Uncolorable,
}

impl ColorStatus {
    pub fn is_colorable(&self) -> bool {
        matches!(self, ColorStatus::Colorable { .. })
    }
}
