//! Monte Carlo experiment harness and external-data ingestion.
//!
//! For each triad the harness runs independent trials: jitter the three
//! switch directions, prepare the (possibly depolarized) state, measure
//! according to the source model, and apply detection losses. A trial fails
//! when the result sum differs from 2. Failure fractions get exact
//! Clopper-Pearson upper bounds at the Bonferroni-corrected level
//! `alpha / N`, and the verdict is `Excluded` when the worst bound stays
//! strictly below `1/N`.
//!
//! Trials are chunked; each chunk's RNG stream is derived from
//! `(seed, triad index, chunk index)`, and chunk results are merged in a
//! fixed order, so reports are byte-identical for any worker thread count.

mod report;
mod stats;

pub use report::{ExperimentReport, TriadReport};
pub use stats::{
    clopper_pearson_upper, summarize, verdict, FailureRule, NoClickPolicy, RowStats, TrialCounts,
    Verdict,
};

use crate::canon;
use crate::geometry::{self, Direction, GeometryError};
use crate::kscore::{self, HVModel, KSSet, KsError};
use crate::quantum::{self, Outcome, QState, QuantumError};
use nalgebra::Vector3;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::BufRead;
use thiserror::Error;

/// Trials per RNG stream; fixed so that reports do not depend on the
/// number of worker threads.
pub const TRIAL_CHUNK: u64 = 4096;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("set is colorable; no exclusion verdict is possible")]
    ColorableSet,
    #[error("line {line}: malformed row: {reason}")]
    MalformedRow { line: usize, reason: String },
    #[error("line {line}: unknown triad index {triad} (set has {n_triads} triads)")]
    UnknownTriad { line: usize, triad: usize, n_triads: usize },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Quantum(#[from] QuantumError),
    #[error(transparent)]
    Model(#[from] KsError),
    #[error("serialization failed: {0}")]
    Serialization(String),
}

/// Imperfection parameters of one experimental run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    /// Std deviation (radians) of the per-trial, per-switch misalignment.
    #[serde(default)]
    pub jitter_sigma: f64,
    /// Probability that a single S^2 measurement produces a click.
    #[serde(default = "one")]
    pub detection_efficiency: f64,
    #[serde(default)]
    pub no_click_policy: NoClickPolicy,
    /// Depolarizing weight applied to the prepared state.
    #[serde(default)]
    pub depolarizing_p: f64,
}

fn one() -> f64 {
    1.0
}

impl Default for NoiseModel {
    fn default() -> Self {
        NoiseModel {
            jitter_sigma: 0.0,
            detection_efficiency: 1.0,
            no_click_policy: NoClickPolicy::CountAsFailure,
            depolarizing_p: 0.0,
        }
    }
}

impl NoiseModel {
    fn validate(&self) -> Result<(), ExperimentError> {
        let bad = |msg: &str| Err(ExperimentError::InvalidConfig(msg.to_string()));
        if !(self.jitter_sigma >= 0.0 && self.jitter_sigma.is_finite()) {
            return bad("jitter_sigma must be finite and nonnegative");
        }
        if !(0.0..=1.0).contains(&self.detection_efficiency) {
            return bad("detection_efficiency must lie in [0, 1]");
        }
        if !(0.0..=1.0).contains(&self.depolarizing_p) {
            return bad("depolarizing_p must lie in [0, 1]");
        }
        Ok(())
    }
}

/// Pure-state vector in the config file: three reals, or three [re, im]
/// pairs for a general complex state. Normalized on load.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PureStateVec {
    Real([f64; 3]),
    Complex([[f64; 2]; 3]),
}

impl PureStateVec {
    pub fn to_state(&self) -> Result<QState, ExperimentError> {
        let v = match self {
            PureStateVec::Real([x, y, z]) => {
                Vector3::new(*x, *y, *z).map(|c| Complex64::new(c, 0.0))
            }
            PureStateVec::Complex(pairs) => Vector3::new(
                Complex64::new(pairs[0][0], pairs[0][1]),
                Complex64::new(pairs[1][0], pairs[1][1]),
                Complex64::new(pairs[2][0], pairs[2][1]),
            ),
        };
        let norm = v.norm();
        if !(norm > 1e-12 && norm.is_finite()) {
            return Err(ExperimentError::InvalidConfig(
                "pure state vector must be nonzero and finite".to_string(),
            ));
        }
        QState::pure(v / Complex64::new(norm, 0.0)).map_err(ExperimentError::from)
    }
}

/// What the source emits each trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StateSpec {
    /// I/3; the default, since the argument is state-independent.
    MaximallyMixed,
    Pure(PureStateVec),
    RandomPerTrial,
}

impl Default for StateSpec {
    fn default() -> Self {
        StateSpec::MaximallyMixed
    }
}

/// Quantum measurement apparatus model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasurementModel {
    /// Three projective S^2 measurements with projection update between
    /// them; jittered directions need not commute, so failures can occur.
    Sequential,
    /// One joint measurement in the orthonormalized frame; the sum is
    /// always 2, the contrast case.
    Joint,
}

/// Trial source: quantum mechanics or a non-contextual hidden-variable
/// model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Quantum { model: MeasurementModel },
    HiddenVariable { model: HVModel },
}

impl Default for Source {
    fn default() -> Self {
        Source::Quantum { model: MeasurementModel::Sequential }
    }
}

/// Fully resolved experiment description; the canonical JSON of this value
/// is hashed into the report's `config_digest`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub set: KSSet,
    #[serde(default)]
    pub state: StateSpec,
    #[serde(default)]
    pub noise: NoiseModel,
    pub trials_per_triad: u64,
    pub seed: u64,
    pub alpha: f64,
    #[serde(default)]
    pub source: Source,
}

impl ExperimentConfig {
    fn validate(&self) -> Result<(), ExperimentError> {
        if self.trials_per_triad < 1 {
            return Err(ExperimentError::InvalidConfig(
                "trials_per_triad must be at least 1".to_string(),
            ));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(ExperimentError::InvalidConfig("alpha must lie in (0, 1)".to_string()));
        }
        if self.set.n_triads() == 0 {
            return Err(ExperimentError::InvalidConfig("set has no triads".to_string()));
        }
        self.noise.validate()?;
        if let Source::HiddenVariable { model } = &self.source {
            model.check_complete(&self.set)?;
        }
        Ok(())
    }
}

/// Worker thread cap: the `KSF_THREADS` environment variable when set,
/// otherwise the hardware parallelism.
pub fn worker_threads() -> usize {
    std::env::var("KSF_THREADS")
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
        .filter(|&n| n >= 1)
        .unwrap_or_else(|| {
            std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
        })
}

/// Runs the configured experiment with [`worker_threads`] workers.
///
/// This entry point requests an exclusion verdict, so the set must be
/// uncolorable; use [`run_statistics`] to collect failure rates on sets
/// that have a coloring (the verdict is then forced to `Inconclusive`,
/// since a colorable set can never disprove anything).
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport, ExperimentError> {
    run_experiment_with_threads(config, worker_threads())
}

/// Same trial pipeline without the uncolorability gate.
pub fn run_statistics(config: &ExperimentConfig) -> Result<ExperimentReport, ExperimentError> {
    run_pipeline(config, worker_threads(), false)
}

/// One RNG stream per (triad, chunk) pair.
pub(crate) fn chunk_rng(seed: u64, triad: usize, chunk: u64) -> ChaCha8Rng {
    debug_assert!(triad < (1 << 32) && chunk < (1 << 32));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((triad as u64) << 32) | chunk);
    rng
}

pub(crate) struct ChunkJob {
    pub triad: usize,
    pub chunk: u64,
    pub len: u64,
}

pub(crate) fn chunk_jobs(n_triads: usize, trials: u64) -> Vec<ChunkJob> {
    let mut jobs = Vec::new();
    for triad in 0..n_triads {
        let mut remaining = trials;
        let mut chunk = 0u64;
        while remaining > 0 {
            let len = remaining.min(TRIAL_CHUNK);
            jobs.push(ChunkJob { triad, chunk, len });
            remaining -= len;
            chunk += 1;
        }
    }
    jobs
}

enum PreparedSource {
    Quantum {
        model: MeasurementModel,
        /// `None` means a fresh Haar-random pure state per trial.
        base_state: Option<QState>,
        depolarizing_p: f64,
    },
    Hidden {
        cumulative: Vec<f64>,
    },
}

struct TriadRunner<'a> {
    dirs: [Direction; 3],
    members: [usize; 3],
    sigma: f64,
    eta: f64,
    source: &'a PreparedSource,
    hv_model: Option<&'a HVModel>,
}

impl TriadRunner<'_> {
    fn run(&self, rng: &mut ChaCha8Rng, n: u64) -> Result<TrialCounts, ExperimentError> {
        let mut counts = TrialCounts::default();
        for _ in 0..n {
            let mut results = match self.source {
                PreparedSource::Quantum { model, base_state, depolarizing_p } => {
                    let [d1, d2, d3] = if self.sigma > 0.0 {
                        [
                            geometry::jitter(&self.dirs[0], self.sigma, rng),
                            geometry::jitter(&self.dirs[1], self.sigma, rng),
                            geometry::jitter(&self.dirs[2], self.sigma, rng),
                        ]
                    } else {
                        self.dirs
                    };
                    let state = match base_state {
                        Some(s) => s.clone(),
                        None => {
                            let fresh = QState::random_pure(rng);
                            if *depolarizing_p > 0.0 {
                                quantum::depolarize(&fresh, *depolarizing_p)
                            } else {
                                fresh
                            }
                        }
                    };
                    match model {
                        MeasurementModel::Sequential => {
                            quantum::sequential_measure(&state, &d1, &d2, &d3, rng).results
                        }
                        MeasurementModel::Joint => {
                            let frame = geometry::gram_schmidt_frame(&d1, &d2, &d3)?;
                            quantum::joint_measure(&state, &frame, rng).results
                        }
                    }
                }
                PreparedSource::Hidden { cumulative } => {
                    let model = self.hv_model.expect("hidden source has a model");
                    let u: f64 = rng.random();
                    let idx = cumulative
                        .partition_point(|&w| w <= u)
                        .min(model.points().len() - 1);
                    let values = &model.points()[idx].values;
                    self.members.map(|m| {
                        if values[m] == 0 {
                            Outcome::Zero
                        } else {
                            Outcome::One
                        }
                    })
                }
            };
            if self.eta < 1.0 {
                for r in &mut results {
                    if rng.random::<f64>() >= self.eta {
                        *r = Outcome::NoClick;
                    }
                }
            }
            let sum = results
                .iter()
                .try_fold(0u8, |acc, r| r.value().map(|v| acc + v));
            counts.record(sum);
        }
        Ok(counts)
    }
}

/// Same as [`run_experiment`] with an explicit worker count; the report is
/// byte-identical for every `threads` value.
pub fn run_experiment_with_threads(
    config: &ExperimentConfig,
    threads: usize,
) -> Result<ExperimentReport, ExperimentError> {
    run_pipeline(config, threads, true)
}

fn run_pipeline(
    config: &ExperimentConfig,
    threads: usize,
    require_uncolorable: bool,
) -> Result<ExperimentReport, ExperimentError> {
    config.validate()?;
    let colorable = kscore::is_colorable(&config.set).status.is_colorable();
    if colorable && require_uncolorable {
        return Err(ExperimentError::ColorableSet);
    }
    let digest =
        canon::config_digest(config).map_err(|e| ExperimentError::Serialization(e.to_string()))?;

    let base_state = match &config.state {
        StateSpec::MaximallyMixed => Some(QState::maximally_mixed()),
        StateSpec::Pure(v) => Some(v.to_state()?),
        StateSpec::RandomPerTrial => None,
    };
    let p = config.noise.depolarizing_p;
    let base_state = base_state.map(|s| if p > 0.0 { quantum::depolarize(&s, p) } else { s });

    let (source, hv_model) = match &config.source {
        Source::Quantum { model } => (
            PreparedSource::Quantum { model: *model, base_state, depolarizing_p: p },
            None,
        ),
        Source::HiddenVariable { model } => (
            PreparedSource::Hidden { cumulative: model.cumulative_weights() },
            Some(model),
        ),
    };

    let set = &config.set;
    let n = set.n_triads();
    let jobs = chunk_jobs(n, config.trials_per_triad);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| ExperimentError::InvalidConfig(format!("thread pool: {e}")))?;
    let chunk_counts: Result<Vec<TrialCounts>, ExperimentError> = pool.install(|| {
        jobs.par_iter()
            .map(|job| {
                let members = set.triads()[job.triad].members();
                let runner = TriadRunner {
                    dirs: members.map(|m| set.directions()[m]),
                    members,
                    sigma: config.noise.jitter_sigma,
                    eta: config.noise.detection_efficiency,
                    source: &source,
                    hv_model,
                };
                let mut rng = chunk_rng(config.seed, job.triad, job.chunk);
                runner.run(&mut rng, job.len)
            })
            .collect()
    });
    let chunk_counts = chunk_counts?;

    let mut per_triad = vec![TrialCounts::default(); n];
    for (job, counts) in jobs.iter().zip(&chunk_counts) {
        per_triad[job.triad].merge(counts);
    }

    let mut report = assemble_report(
        "ks",
        set,
        &per_triad,
        FailureRule::SumNotTwo,
        config.noise.no_click_policy,
        config.alpha,
        Some(config.seed),
        Some(config.trials_per_triad),
        digest,
    );
    if colorable {
        // A colorable set supports no exclusion claim, whatever the bounds.
        report.verdict = Verdict::Inconclusive;
    }
    Ok(report)
}

/// Builds the report rows and verdict from per-triad tallies; shared with
/// the ingestion path and (with a parity rule) the GHZ pipeline.
#[allow(clippy::too_many_arguments)]
pub(crate) fn assemble_report(
    mode: &str,
    set: &KSSet,
    per_triad: &[TrialCounts],
    rule: FailureRule,
    policy: NoClickPolicy,
    alpha: f64,
    seed: Option<u64>,
    trials_per_triad: Option<u64>,
    digest: String,
) -> ExperimentReport {
    let n = set.n_triads();
    let alpha_per = alpha / n as f64;
    let rows: Vec<TriadReport> = per_triad
        .iter()
        .enumerate()
        .map(|(k, counts)| {
            let s = summarize(counts, rule, policy, alpha_per);
            TriadReport {
                index: k,
                members: Some(set.triads()[k].members()),
                context: None,
                target_parity: None,
                counts: counts.sums,
                no_click: counts.no_click,
                trials: s.trials,
                failures: s.failures,
                eps_hat: s.eps_hat,
                upper: s.upper,
            }
        })
        .collect();
    let epsilon_max = rows.iter().map(|r| r.eps_hat).fold(0.0, f64::max);
    let uppers: Vec<f64> = rows.iter().map(|r| r.upper).collect();
    let u_max = uppers.iter().cloned().fold(0.0, f64::max);
    ExperimentReport {
        mode: mode.to_string(),
        set_name: set.name().to_string(),
        n_triads: n,
        threshold: 1.0 / n as f64,
        alpha,
        seed,
        trials_per_triad,
        config_digest: digest,
        per_triad: rows,
        epsilon_max,
        u_max,
        verdict: verdict(&uppers, n),
    }
}

#[derive(Serialize)]
struct AnalyzeDigest<'a> {
    mode: &'static str,
    alpha: f64,
    no_click_policy: NoClickPolicy,
    set: &'a KSSet,
}

/// Ingests externally recorded trials (CSV `trial,triad,r1,r2,r3`, result
/// values 0, 1 or -1 for no click) and applies the same statistics pipeline
/// as [`run_experiment`].
pub fn analyze_counts<R: BufRead>(
    reader: R,
    set: &KSSet,
    alpha: f64,
    policy: NoClickPolicy,
) -> Result<ExperimentReport, ExperimentError> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(ExperimentError::InvalidConfig("alpha must lie in (0, 1)".to_string()));
    }
    if set.n_triads() == 0 {
        return Err(ExperimentError::InvalidConfig("set has no triads".to_string()));
    }
    let malformed = |line: usize, reason: String| ExperimentError::MalformedRow { line, reason };
    let mut per_triad = vec![TrialCounts::default(); set.n_triads()];
    let mut lines = reader.lines().enumerate();

    let header = match lines.next() {
        Some((_, Ok(h))) => h,
        Some((_, Err(e))) => return Err(malformed(1, e.to_string())),
        None => return Err(malformed(1, "empty file, expected header".to_string())),
    };
    let normalized: Vec<String> = header
        .trim()
        .split(',')
        .map(|f| f.trim().to_ascii_lowercase())
        .collect();
    if normalized != ["trial", "triad", "r1", "r2", "r3"] {
        return Err(malformed(1, format!("expected header trial,triad,r1,r2,r3, got {header:?}")));
    }

    for (idx, line) in lines {
        let line_no = idx + 1;
        let line = line.map_err(|e| malformed(line_no, e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 5 {
            return Err(malformed(line_no, format!("expected 5 fields, got {}", fields.len())));
        }
        fields[0]
            .parse::<u64>()
            .map_err(|_| malformed(line_no, format!("bad trial id {:?}", fields[0])))?;
        let triad: usize = fields[1]
            .parse()
            .map_err(|_| malformed(line_no, format!("bad triad index {:?}", fields[1])))?;
        if triad >= set.n_triads() {
            return Err(ExperimentError::UnknownTriad {
                line: line_no,
                triad,
                n_triads: set.n_triads(),
            });
        }
        let mut sum = Some(0u8);
        for field in &fields[2..5] {
            let r: i8 = field
                .parse()
                .map_err(|_| malformed(line_no, format!("bad result {field:?}")))?;
            sum = match r {
                -1 => None,
                0 => sum,
                1 => sum.map(|s| s + 1),
                other => {
                    return Err(malformed(
                        line_no,
                        format!("result must be -1, 0 or 1, got {other}"),
                    ))
                }
            };
        }
        per_triad[triad].record(sum);
    }

    let digest = canon::config_digest(&AnalyzeDigest {
        mode: "analyze",
        alpha,
        no_click_policy: policy,
        set,
    })
    .map_err(|e| ExperimentError::Serialization(e.to_string()))?;

    Ok(assemble_report(
        "ks",
        set,
        &per_triad,
        FailureRule::SumNotTwo,
        policy,
        alpha,
        None,
        None,
        digest,
    ))
}
