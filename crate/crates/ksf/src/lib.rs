//! Executable hidden-variable tests for imperfect experiments.
//!
//! A spin-1 measurement along direction `n` ideally realizes the squared spin
//! component, whose outcomes are 0 or 1 and which sums to 2 over any triad of
//! mutually orthogonal directions. A Kochen-Specker set is a finite family of
//! `N` such triads (sharing directions) that admits no global {0,1} assignment
//! with exactly one 0 per triad. Non-contextual hidden variables then force at
//! least one triad to fail per hidden-variable point, so if every triad's
//! observed failure rate stays below `1/N`, non-contextual models are excluded
//! even though a real apparatus has finite precision: the observables are
//! identified by their switch positions, not by what is "really" measured.
//!
//! The crate provides, in order of the pipeline:
//!
//! - [`geometry`]: canonical unit rays, orthogonality tests, angular jitter,
//!   frame orthonormalization.
//! - [`kscore`]: Kochen-Specker sets, triad enumeration and completion, the
//!   backtracking uncolorability solver with an independent clause-based
//!   cross-check, the `1/N` threshold, and finite hidden-variable models.
//! - [`quantum`]: spin-1 operators and projectors in the Cartesian
//!   representation, exact sequential-measurement branch probabilities, and
//!   sampled measurements.
//! - [`experiment`]: the Monte Carlo harness with jitter, depolarization and
//!   detection losses, Clopper-Pearson upper bounds, and the exclusion
//!   verdict.
//! - [`ghz`]: the local-hidden-variable analog built on three-qubit GHZ
//!   parity contexts (`N = 4`, threshold `1/4`).
//! - [`cli`]: the `ksf` command-line front end and file formats.
//!
//! Everything is deterministic given a seed; trial generation is chunked into
//! independent RNG streams so reports are byte-identical regardless of worker
//! thread count. See the `examples/` directory for one runnable program per
//! capability.

pub mod canon;
pub mod cli;
pub mod experiment;
pub mod geometry;
pub mod ghz;
pub mod kscore;
pub mod quantum;

pub use experiment::{
    analyze_counts, clopper_pearson_upper, run_experiment, run_statistics, verdict,
    ExperimentConfig, ExperimentReport, NoiseModel, Verdict,
};
pub use geometry::Direction;
pub use kscore::{
    epsilon_threshold, find_triads, generate_peres_directions, is_colorable, min_violated_triads,
    nchv_failure_probs, triad_complete, union_bound_lower, Assignment, ColorabilityReport, HVModel,
    KSSet, Triad,
};
pub use quantum::{branch_probabilities, sequential_measure, QState};
