//! Local-hidden-variable analog built on three-qubit GHZ parity contexts.
//!
//! Four measurement contexts — XXX, XYY, YXY, YYX — have definite parities
//! on the GHZ state (+1, -1, -1, -1; computed, never hardcoded, so a sign
//! convention slip cannot silently fake the contradiction). Any local
//! assignment of +-1 values to the six (particle, setting) slots satisfies
//! at most 3 of the 4 contexts: the product of the four context parities is
//! algebraically +1 for local values (each slot appears squared) but -1 for
//! the quantum targets. With `N = 4` the union-bound argument gives the
//! exclusion threshold `1/4`, and the experiment machinery is reused by
//! treating each context as a pseudo-triad whose trial succeeds when the
//! observed parity matches the target (results are stored as bits with
//! -1 mapped to 0 and +1 to 1).

use crate::canon;
use crate::experiment::{
    chunk_jobs, chunk_rng, summarize, verdict, ExperimentError, ExperimentReport, FailureRule,
    NoClickPolicy, TrialCounts, TriadReport,
};
use nalgebra::{DMatrix, DVector, Matrix2, Vector2};
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GhzError {
    #[error("state must be an 8-dimensional unit vector (dim = {dim}, norm = {norm})")]
    InvalidState { dim: usize, norm: f64 },
}

/// Single-qubit measurement setting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Setting {
    X,
    Y,
}

impl Setting {
    /// The standard Pauli observable for this setting.
    pub fn observable(&self) -> Matrix2<Complex64> {
        let o = Complex64::ZERO;
        let one = Complex64::ONE;
        let i = Complex64::i();
        match self {
            Setting::X => Matrix2::new(o, one, one, o),
            Setting::Y => Matrix2::new(o, -i, i, o),
        }
    }

    /// Eigenvector for outcome `sign` (+1 or -1).
    fn eigenvector(&self, sign: i8) -> Vector2<Complex64> {
        let s = Complex64::new(f64::from(sign), 0.0);
        let f = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        match self {
            Setting::X => Vector2::new(f, s * f),
            Setting::Y => Vector2::new(f, s * Complex64::i() * f),
        }
    }

    fn label(&self) -> char {
        match self {
            Setting::X => 'X',
            Setting::Y => 'Y',
        }
    }
}

/// One three-particle measurement context and its GHZ-state parity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GhzContext {
    pub settings: [Setting; 3],
    pub target_parity: i8,
}

impl GhzContext {
    pub fn label(&self) -> String {
        self.settings.iter().map(Setting::label).collect()
    }
}

/// The state (|000> + |111>)/sqrt(2) as an 8-dimensional vector, basis
/// index `b1 * 4 + b2 * 2 + b3`.
pub fn ghz_state() -> DVector<Complex64> {
    let mut v = DVector::zeros(8);
    let amp = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    v[0] = amp;
    v[7] = amp;
    v
}

fn settings_parity(state: &DVector<Complex64>, settings: [Setting; 3]) -> Result<f64, GhzError> {
    if state.len() != 8 {
        return Err(GhzError::InvalidState { dim: state.len(), norm: state.norm() });
    }
    let norm = state.norm();
    if (norm - 1.0).abs() > 1e-12 {
        return Err(GhzError::InvalidState { dim: 8, norm });
    }
    let to_dyn = |m: Matrix2<Complex64>| {
        DMatrix::from_fn(2, 2, |r, c| m[(r, c)])
    };
    let op = to_dyn(settings[0].observable())
        .kronecker(&to_dyn(settings[1].observable()))
        .kronecker(&to_dyn(settings[2].observable()));
    let expectation = (state.adjoint() * &op * state)[(0, 0)];
    debug_assert!(expectation.im.abs() < 1e-12, "Hermitian product must be real");
    Ok(expectation.re)
}

/// Expectation value of the tensor-product observable of `context` in
/// `state`, real for Hermitian products.
pub fn context_parity(state: &DVector<Complex64>, context: &GhzContext) -> Result<f64, GhzError> {
    settings_parity(state, context.settings)
}

/// The four contexts XXX, XYY, YXY, YYX with target parities equal to the
/// GHZ-state eigenvalues.
pub fn ghz_contexts() -> [GhzContext; 4] {
    use Setting::{X, Y};
    let state = ghz_state();
    [[X, X, X], [X, Y, Y], [Y, X, Y], [Y, Y, X]].map(|settings| {
        let raw = settings_parity(&state, settings).expect("GHZ state is a unit 8-vector");
        let target = raw.round() as i8;
        assert!(
            (raw - f64::from(target)).abs() < 1e-9 && target.abs() == 1,
            "GHZ parity for {settings:?} is not a definite +-1: {raw}"
        );
        GhzContext { settings, target_parity: target }
    })
}

/// Local predetermined results: one value in {+1, -1} per particle and
/// setting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LhvAssignment {
    /// Indexed by particle, then setting (0 = X, 1 = Y).
    pub values: [[i8; 2]; 3],
}

impl LhvAssignment {
    fn from_index(index: u8) -> Self {
        let mut values = [[1i8; 2]; 3];
        for particle in 0..3 {
            for setting in 0..2 {
                let bit = (index >> (2 * particle + setting)) & 1;
                values[particle][setting] = if bit == 0 { 1 } else { -1 };
            }
        }
        LhvAssignment { values }
    }

    pub fn value(&self, particle: usize, setting: Setting) -> i8 {
        let s = match setting {
            Setting::X => 0,
            Setting::Y => 1,
        };
        self.values[particle][s]
    }

    /// True when the product of the three local values equals the target.
    pub fn satisfies(&self, context: &GhzContext) -> bool {
        let product: i8 = (0..3)
            .map(|p| self.value(p, context.settings[p]))
            .product();
        product == context.target_parity
    }
}

/// Brute force over all 2^6 = 64 local assignments: the maximum number of
/// contexts any of them satisfies (3 of 4), one maximizing witness, and the
/// union-bound threshold 1/4.
pub fn lhv_max_satisfiable() -> (usize, LhvAssignment, f64) {
    let contexts = ghz_contexts();
    let mut best_count = 0;
    let mut best = LhvAssignment::from_index(0);
    for index in 0..64u8 {
        let assignment = LhvAssignment::from_index(index);
        let count = contexts.iter().filter(|c| assignment.satisfies(c)).count();
        if count > best_count {
            best_count = count;
            best = assignment;
        }
    }
    (best_count, best, 1.0 / contexts.len() as f64)
}

/// GHZ experiment parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GhzConfig {
    pub trials_per_context: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
}

fn default_alpha() -> f64 {
    0.01
}

/// Samples each context's outcome distribution on a perfect GHZ source and
/// runs the standard statistics pipeline: per-context failure = parity
/// mismatch, Bonferroni-corrected Clopper-Pearson bounds, threshold 1/4.
pub fn run_ghz_experiment(config: &GhzConfig) -> Result<ExperimentReport, ExperimentError> {
    if config.trials_per_context < 1 {
        return Err(ExperimentError::InvalidConfig(
            "trials_per_context must be at least 1".to_string(),
        ));
    }
    if !(config.alpha > 0.0 && config.alpha < 1.0) {
        return Err(ExperimentError::InvalidConfig("alpha must lie in (0, 1)".to_string()));
    }
    let contexts = ghz_contexts();
    let n = contexts.len();
    let (max_satisfiable, _, _) = lhv_max_satisfiable();
    assert!(max_satisfiable < n, "local assignments must not satisfy every context");

    let state = ghz_state();
    // Outcome distribution over the 8 sign patterns, per context.
    let distributions: Vec<[f64; 8]> = contexts
        .iter()
        .map(|ctx| outcome_distribution(&state, ctx.settings))
        .collect();

    let mut per_context = vec![TrialCounts::default(); n];
    let jobs = chunk_jobs(n, config.trials_per_context);
    for job in &jobs {
        let mut rng = chunk_rng(config.seed, job.triad, job.chunk);
        let dist = &distributions[job.triad];
        for _ in 0..job.len {
            let u: f64 = rng.random();
            let mut acc = 0.0;
            let mut pattern = 7;
            for (idx, p) in dist.iter().enumerate() {
                acc += p;
                if u < acc {
                    pattern = idx;
                    break;
                }
            }
            let sum = (pattern & 1) + ((pattern >> 1) & 1) + ((pattern >> 2) & 1);
            per_context[job.triad].record(Some(sum as u8));
        }
    }

    let digest = canon::config_digest(config)
        .map_err(|e| ExperimentError::Serialization(e.to_string()))?;
    let alpha_per = config.alpha / n as f64;
    let rows: Vec<TriadReport> = per_context
        .iter()
        .zip(&contexts)
        .enumerate()
        .map(|(k, (counts, ctx))| {
            let rule = FailureRule::ParityMismatch { target: ctx.target_parity };
            let s = summarize(counts, rule, NoClickPolicy::CountAsFailure, alpha_per);
            TriadReport {
                index: k,
                members: None,
                context: Some(ctx.label()),
                target_parity: Some(ctx.target_parity),
                counts: counts.sums,
                no_click: counts.no_click,
                trials: s.trials,
                failures: s.failures,
                eps_hat: s.eps_hat,
                upper: s.upper,
            }
        })
        .collect();
    let uppers: Vec<f64> = rows.iter().map(|r| r.upper).collect();
    Ok(ExperimentReport {
        mode: "ghz".to_string(),
        set_name: "ghz-contexts".to_string(),
        n_triads: n,
        threshold: 1.0 / n as f64,
        alpha: config.alpha,
        seed: Some(config.seed),
        trials_per_triad: Some(config.trials_per_context),
        config_digest: digest,
        epsilon_max: rows.iter().map(|r| r.eps_hat).fold(0.0, f64::max),
        u_max: uppers.iter().cloned().fold(0.0, f64::max),
        per_triad: rows,
        verdict: verdict(&uppers, n),
    })
}

/// Probability of each sign pattern (bit 1 = outcome +1), indexed by
/// `r1 * 4 + r2 * 2 + r3`.
fn outcome_distribution(state: &DVector<Complex64>, settings: [Setting; 3]) -> [f64; 8] {
    let mut out = [0.0; 8];
    for (pattern, slot) in out.iter_mut().enumerate() {
        let signs = [
            if pattern >> 2 & 1 == 1 { 1i8 } else { -1 },
            if pattern >> 1 & 1 == 1 { 1i8 } else { -1 },
            if pattern & 1 == 1 { 1i8 } else { -1 },
        ];
        let vectors: Vec<Vector2<Complex64>> = settings
            .iter()
            .zip(signs)
            .map(|(s, sign)| s.eigenvector(sign))
            .collect();
        let mut amplitude = Complex64::ZERO;
        for basis in 0..8usize {
            let bits = [basis >> 2 & 1, basis >> 1 & 1, basis & 1];
            let product = vectors
                .iter()
                .zip(bits)
                .map(|(v, b)| v[b].conj())
                .product::<Complex64>();
            amplitude += product * state[basis];
        }
        *slot = amplitude.norm_sqr();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::Verdict;

    #[test]
    fn quantum_parities_are_computed_eigenvalues() {
        let contexts = ghz_contexts();
        assert_eq!(contexts.len(), 4);
        let targets: Vec<i8> = contexts.iter().map(|c| c.target_parity).collect();
        assert_eq!(targets, vec![1, -1, -1, -1]);
        let state = ghz_state();
        for ctx in &contexts {
            let parity = context_parity(&state, ctx).unwrap();
            assert!((parity - f64::from(ctx.target_parity)).abs() < 1e-12);
        }
    }

    #[test]
    fn product_state_has_zero_parity() {
        use Setting::X;
        let mut product = DVector::zeros(8);
        product[0] = Complex64::ONE; // |000>
        let ctx = GhzContext { settings: [X, X, X], target_parity: 1 };
        let parity = context_parity(&product, &ctx).unwrap();
        assert!(parity.abs() < 1e-12);
    }

    #[test]
    fn invalid_states_are_rejected() {
        use Setting::X;
        let ctx = GhzContext { settings: [X, X, X], target_parity: 1 };
        let short = DVector::zeros(4);
        assert!(matches!(
            context_parity(&short, &ctx),
            Err(GhzError::InvalidState { dim: 4, .. })
        ));
        let unnormalized = DVector::from_element(8, Complex64::ONE);
        assert!(matches!(
            context_parity(&unnormalized, &ctx),
            Err(GhzError::InvalidState { dim: 8, .. })
        ));
    }

    #[test]
    fn algebraic_obstruction() {
        // The product of the four quantum targets is -1, while the product
        // of the four context parities of any local assignment is +1.
        let contexts = ghz_contexts();
        let target_product: i32 = contexts.iter().map(|c| i32::from(c.target_parity)).product();
        assert_eq!(target_product, -1);
        for index in 0..64u8 {
            let a = LhvAssignment::from_index(index);
            let product: i32 = contexts
                .iter()
                .map(|c| {
                    (0..3)
                        .map(|p| i32::from(a.value(p, c.settings[p])))
                        .product::<i32>()
                })
                .product();
            assert_eq!(product, 1);
        }
    }

    #[test]
    fn lhv_brute_force() {
        let (max_count, witness, threshold) = lhv_max_satisfiable();
        assert_eq!(max_count, 3);
        assert_eq!(threshold, 0.25);
        let contexts = ghz_contexts();
        let satisfied = contexts.iter().filter(|c| witness.satisfies(c)).count();
        assert_eq!(satisfied, max_count);
    }

    #[test]
    fn outcome_distributions_are_parity_pure() {
        let state = ghz_state();
        for ctx in ghz_contexts() {
            let dist = outcome_distribution(&state, ctx.settings);
            let total: f64 = dist.iter().sum();
            assert!((total - 1.0).abs() < 1e-12);
            for (pattern, p) in dist.iter().enumerate() {
                let minus_count = 3 - (pattern & 1) - (pattern >> 1 & 1) - (pattern >> 2 & 1);
                let parity = if minus_count % 2 == 0 { 1 } else { -1 };
                if parity == i32::from(ctx.target_parity) {
                    assert!((p - 0.25).abs() < 1e-12, "{pattern:03b}: {p}");
                } else {
                    assert!(*p < 1e-12, "{pattern:03b}: {p}");
                }
            }
        }
    }

    #[test]
    fn perfect_ghz_run_is_excluded() {
        let config = GhzConfig { trials_per_context: 2000, seed: 11, alpha: 0.01 };
        let report = run_ghz_experiment(&config).unwrap();
        assert_eq!(report.mode, "ghz");
        assert_eq!(report.n_triads, 4);
        assert_eq!(report.threshold, 0.25);
        assert_eq!(report.epsilon_max, 0.0);
        assert_eq!(report.verdict, Verdict::Excluded);
        for row in &report.per_triad {
            assert!(row.context.is_some());
            assert_eq!(row.failures, 0);
        }
    }

    #[test]
    fn ghz_runs_are_deterministic() {
        let config = GhzConfig { trials_per_context: 500, seed: 3, alpha: 0.05 };
        let a = run_ghz_experiment(&config).unwrap();
        let b = run_ghz_experiment(&config).unwrap();
        assert_eq!(a.canonical_json(), b.canonical_json());
    }
}
