//! Command-line front end: file parsing, subcommand dispatch, report
//! emission.
//!
//! Subcommands: `generate` (emit the built-in Peres set), `verify`
//! (colorability plus threshold), `simulate` (Monte Carlo run from a config
//! JSON), `analyze` (ingest a trial CSV), `ghz` (the parity pipeline).
//! Reports go to stdout or `--out` as canonical JSON with an embedded run
//! manifest. Verdicts are data, never exit status: exit 0 on a successful
//! run, 2 on input errors, 3 on internal numerical failures. The
//! `KSF_THREADS` environment variable caps simulation worker threads.

use crate::canon;
use crate::experiment::{
    analyze_counts, run_experiment, ExperimentConfig, ExperimentError, MeasurementModel,
    NoClickPolicy, NoiseModel, Source, StateSpec,
};
use crate::geometry::DEFAULT_ORTHO_TOL;
use crate::ghz::{lhv_max_satisfiable, run_ghz_experiment, GhzConfig};
use crate::kscore::{
    clause_encoding_colorable, is_colorable, peres_set, triad_complete, ColorStatus, KSSet,
};
use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: line {line}, column {column}: {message}")]
    Parse { path: PathBuf, line: usize, column: usize, message: String },
    #[error("{0}")]
    Input(String),
    #[error("internal numerical failure: {0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io { .. } | CliError::Parse { .. } | CliError::Input(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

fn from_experiment(err: ExperimentError) -> CliError {
    match err {
        ExperimentError::InvalidConfig(_)
        | ExperimentError::ColorableSet
        | ExperimentError::MalformedRow { .. }
        | ExperimentError::UnknownTriad { .. }
        | ExperimentError::Model(_) => CliError::Input(err.to_string()),
        ExperimentError::Geometry(_)
        | ExperimentError::Quantum(_)
        | ExperimentError::Serialization(_) => CliError::Numerical(err.to_string()),
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "ksf",
    version,
    about = "Finite-precision Kochen-Specker and GHZ hidden-variable tests"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Emit the built-in 33-ray Peres set as a set JSON document.
    Generate {
        /// Close the set under triad completion first.
        #[arg(long)]
        complete: bool,
        /// Write to this path instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve colorability and report the 1/N threshold.
    Verify {
        /// KS-set JSON document.
        #[arg(long)]
        set: PathBuf,
        /// Apply triad completion before solving.
        #[arg(long)]
        complete: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a Monte Carlo experiment described by a config JSON.
    Simulate {
        /// Experiment config JSON.
        #[arg(long)]
        config: PathBuf,
        /// KS-set JSON document; overrides the config's embedded set.
        #[arg(long)]
        set: Option<PathBuf>,
        /// Override the config seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override trials per triad.
        #[arg(long)]
        trials: Option<u64>,
        /// Override the confidence level.
        #[arg(long)]
        alpha: Option<f64>,
        /// Override the quantum measurement model.
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        /// Apply triad completion to the resolved set.
        #[arg(long)]
        complete: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compute the report from externally recorded trials.
    Analyze {
        /// KS-set JSON document.
        #[arg(long)]
        set: PathBuf,
        /// Trial CSV with header trial,triad,r1,r2,r3 (-1 = no click).
        #[arg(long)]
        counts: PathBuf,
        /// Confidence level (default 0.01).
        #[arg(long)]
        alpha: Option<f64>,
        /// Discard no-click trials instead of counting them as failures.
        #[arg(long)]
        discard_no_click: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// GHZ pipeline: contexts, parities, LHV bound, simulated verdict.
    Ghz {
        /// Trials per context (default 10000).
        #[arg(long)]
        trials: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    Sequential,
    Joint,
}

impl From<ModeArg> for MeasurementModel {
    fn from(mode: ModeArg) -> Self {
        match mode {
            ModeArg::Sequential => MeasurementModel::Sequential,
            ModeArg::Joint => MeasurementModel::Joint,
        }
    }
}

/// Simulation config file. The set may be embedded; when absent the
/// triad-completed Peres set is used.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SimulateFileConfig {
    #[serde(default)]
    set: Option<KSSet>,
    #[serde(default)]
    complete: bool,
    #[serde(default)]
    state: StateSpec,
    #[serde(default)]
    noise: NoiseModel,
    trials_per_triad: u64,
    #[serde(default)]
    seed: u64,
    #[serde(default = "default_alpha")]
    alpha: f64,
    #[serde(default)]
    source: Source,
}

fn default_alpha() -> f64 {
    0.01
}

/// Provenance block embedded in every report.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub inputs: Vec<String>,
    pub resolved_config: serde_json::Value,
    pub tool_version: String,
    pub started: String,
    pub finished: String,
}

/// Executes the parsed command line; returns the process exit code.
pub fn run(cli: Cli) -> u8 {
    match dispatch(cli) {
        Ok(()) => 0,
        Err(err) => {
            eprintln!("ksf: {err}");
            err.exit_code()
        }
    }
}

fn now_rfc3339() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

/// Parses and validates a KS-set JSON document. Orthogonality is checked
/// against the document's tolerance; triads are derived when absent.
pub fn parse_ks_file(path: &Path) -> Result<KSSet, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
    serde_json::from_str(&text).map_err(|e| CliError::Parse {
        path: path.to_path_buf(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

fn write_output(doc: &serde_json::Value, out: Option<&Path>) -> Result<(), CliError> {
    let mut text = canon::to_canonical_json(doc)
        .map_err(|e| CliError::Numerical(format!("serialization: {e}")))?;
    text.push('\n');
    match out {
        Some(path) => fs::write(path, text)
            .map_err(|source| CliError::Io { path: path.to_path_buf(), source }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn with_manifest(report: serde_json::Value, manifest: RunManifest) -> serde_json::Value {
    let mut doc = report;
    doc.as_object_mut()
        .expect("reports are JSON objects")
        .insert(
            "manifest".to_string(),
            serde_json::to_value(manifest).expect("manifest serializes"),
        );
    doc
}

fn to_value<T: Serialize>(value: &T) -> Result<serde_json::Value, CliError> {
    serde_json::to_value(value).map_err(|e| CliError::Numerical(format!("serialization: {e}")))
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Generate { complete, out } => generate(complete, out.as_deref()),
        Command::Verify { set, complete, out } => verify(&set, complete, out.as_deref()),
        Command::Simulate { config, set, seed, trials, alpha, mode, complete, out } => simulate(
            &config,
            set.as_deref(),
            seed,
            trials,
            alpha,
            mode,
            complete,
            out.as_deref(),
        ),
        Command::Analyze { set, counts, alpha, discard_no_click, out } => {
            analyze(&set, &counts, alpha, discard_no_click, out.as_deref())
        }
        Command::Ghz { trials, seed, alpha, out } => ghz(trials, seed, alpha, out.as_deref()),
    }
}

fn builtin_set(complete: bool) -> Result<KSSet, CliError> {
    let base = peres_set(DEFAULT_ORTHO_TOL).map_err(|e| CliError::Numerical(e.to_string()))?;
    if !complete {
        return Ok(base);
    }
    let completed = triad_complete(&base).map_err(|e| CliError::Numerical(e.to_string()))?;
    // Rename so generated files are self-describing; revalidates cheaply.
    KSSet::new(
        "peres33-completed",
        completed.tolerance(),
        completed.directions().to_vec(),
        Some(completed.triads().to_vec()),
    )
    .map_err(|e| CliError::Numerical(e.to_string()))
}

fn generate(complete: bool, out: Option<&Path>) -> Result<(), CliError> {
    let set = builtin_set(complete)?;
    write_output(&to_value(&set)?, out)
}

#[derive(Serialize)]
struct VerifyReport {
    set_name: String,
    n_directions: usize,
    n_triads: usize,
    has_shared_direction: bool,
    status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    witness: Option<Vec<u8>>,
    nodes_explored: u64,
    elapsed_seconds: f64,
    clause_check_agrees: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    threshold: Option<f64>,
}

fn verify(set_path: &Path, complete: bool, out: Option<&Path>) -> Result<(), CliError> {
    let started = now_rfc3339();
    let mut set = parse_ks_file(set_path)?;
    if complete {
        set = triad_complete(&set).map_err(|e| CliError::Input(e.to_string()))?;
    }
    let report = is_colorable(&set);
    let clause_colorable = clause_encoding_colorable(&set);
    if clause_colorable != report.status.is_colorable() {
        return Err(CliError::Numerical(format!(
            "solver and clause encoding disagree on {}: {} vs {}",
            set.name(),
            report.status.is_colorable(),
            clause_colorable
        )));
    }
    let (status, witness, threshold) = match &report.status {
        ColorStatus::Colorable { witness } => ("colorable", Some(witness.values().to_vec()), None),
        ColorStatus::Uncolorable => {
            ("uncolorable", None, Some(1.0 / set.n_triads() as f64))
        }
    };
    let verify_report = VerifyReport {
        set_name: set.name().to_string(),
        n_directions: set.directions().len(),
        n_triads: set.n_triads(),
        has_shared_direction: set.has_shared_direction(),
        status,
        witness,
        nodes_explored: report.nodes_explored,
        elapsed_seconds: report.elapsed_seconds,
        clause_check_agrees: true,
        threshold,
    };
    let manifest = RunManifest {
        subcommand: "verify".to_string(),
        inputs: vec![set_path.display().to_string()],
        resolved_config: serde_json::json!({
            "set": set_path.display().to_string(),
            "complete": complete,
        }),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        started,
        finished: now_rfc3339(),
    };
    write_output(&with_manifest(to_value(&verify_report)?, manifest), out)
}

#[allow(clippy::too_many_arguments)]
fn simulate(
    config_path: &Path,
    set_path: Option<&Path>,
    seed: Option<u64>,
    trials: Option<u64>,
    alpha: Option<f64>,
    mode: Option<ModeArg>,
    complete: bool,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let started = now_rfc3339();
    let text = fs::read_to_string(config_path)
        .map_err(|source| CliError::Io { path: config_path.to_path_buf(), source })?;
    let file_config: SimulateFileConfig =
        serde_json::from_str(&text).map_err(|e| CliError::Parse {
            path: config_path.to_path_buf(),
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;

    let mut set = match set_path {
        Some(path) => parse_ks_file(path)?,
        None => match file_config.set {
            Some(set) => set,
            None => builtin_set(true)?,
        },
    };
    if complete || file_config.complete {
        set = triad_complete(&set).map_err(|e| CliError::Input(e.to_string()))?;
    }

    let mut source = file_config.source;
    if let Some(mode) = mode {
        match &mut source {
            Source::Quantum { model } => *model = mode.into(),
            Source::HiddenVariable { .. } => {
                return Err(CliError::Input(
                    "--mode only applies to quantum sources".to_string(),
                ))
            }
        }
    }

    let config = ExperimentConfig {
        set,
        state: file_config.state,
        noise: file_config.noise,
        trials_per_triad: trials.unwrap_or(file_config.trials_per_triad),
        seed: seed.unwrap_or(file_config.seed),
        alpha: alpha.unwrap_or(file_config.alpha),
        source,
    };
    let report = run_experiment(&config).map_err(from_experiment)?;
    let mut inputs = vec![config_path.display().to_string()];
    if let Some(path) = set_path {
        inputs.push(path.display().to_string());
    }
    let manifest = RunManifest {
        subcommand: "simulate".to_string(),
        inputs,
        resolved_config: to_value(&config)?,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        started,
        finished: now_rfc3339(),
    };
    write_output(&with_manifest(to_value(&report)?, manifest), out)
}

fn analyze(
    set_path: &Path,
    counts_path: &Path,
    alpha: Option<f64>,
    discard_no_click: bool,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let started = now_rfc3339();
    let set = parse_ks_file(set_path)?;
    let file = fs::File::open(counts_path)
        .map_err(|source| CliError::Io { path: counts_path.to_path_buf(), source })?;
    let alpha = alpha.unwrap_or(0.01);
    let policy = if discard_no_click {
        NoClickPolicy::Discard
    } else {
        NoClickPolicy::CountAsFailure
    };
    let report =
        analyze_counts(BufReader::new(file), &set, alpha, policy).map_err(from_experiment)?;
    let manifest = RunManifest {
        subcommand: "analyze".to_string(),
        inputs: vec![set_path.display().to_string(), counts_path.display().to_string()],
        resolved_config: serde_json::json!({
            "alpha": alpha,
            "no_click_policy": policy,
            "set": set_path.display().to_string(),
            "counts": counts_path.display().to_string(),
        }),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        started,
        finished: now_rfc3339(),
    };
    write_output(&with_manifest(to_value(&report)?, manifest), out)
}

fn ghz(
    trials: Option<u64>,
    seed: Option<u64>,
    alpha: Option<f64>,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let started = now_rfc3339();
    let config = GhzConfig {
        trials_per_context: trials.unwrap_or(10_000),
        seed: seed.unwrap_or(0),
        alpha: alpha.unwrap_or(0.01),
    };
    let report = run_ghz_experiment(&config).map_err(from_experiment)?;
    let (max_satisfiable, witness, threshold) = lhv_max_satisfiable();
    let mut doc = to_value(&report)?;
    doc.as_object_mut().expect("report is an object").insert(
        "lhv".to_string(),
        serde_json::json!({
            "max_satisfiable": max_satisfiable,
            "witness": witness,
            "threshold": threshold,
        }),
    );
    let manifest = RunManifest {
        subcommand: "ghz".to_string(),
        inputs: vec![],
        resolved_config: to_value(&config)?,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        started,
        finished: now_rfc3339(),
    };
    write_output(&with_manifest(doc, manifest), out)
}
