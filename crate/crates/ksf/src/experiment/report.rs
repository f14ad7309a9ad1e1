//! Report structures shared by the simulation, ingestion and GHZ pipelines.

use super::stats::Verdict;
use crate::canon;
use serde::{Deserialize, Serialize};

/// Statistics for one triad (or one GHZ context in `"ghz"` mode).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TriadReport {
    pub index: usize,
    /// Direction indices, absent in GHZ mode.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub members: Option<[usize; 3]>,
    /// Setting labels like "XYY", present only in GHZ mode.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub context: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub target_parity: Option<i8>,
    /// How many trials produced each result sum 0..3.
    pub counts: [u64; 4],
    pub no_click: u64,
    /// Denominator after the no-click policy.
    pub trials: u64,
    pub failures: u64,
    pub eps_hat: f64,
    pub upper: f64,
}

/// Full experiment outcome: per-triad failure statistics, the worst point
/// estimate and upper bound, the `1/N` threshold and the verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    /// "ks" for triad experiments, "ghz" for the parity analog.
    pub mode: String,
    pub set_name: String,
    pub n_triads: usize,
    pub threshold: f64,
    pub alpha: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub trials_per_triad: Option<u64>,
    /// SHA-256 of the canonicalized configuration.
    pub config_digest: String,
    pub per_triad: Vec<TriadReport>,
    pub epsilon_max: f64,
    pub u_max: f64,
    pub verdict: Verdict,
}

impl ExperimentReport {
    /// Canonical JSON bytes; identical configs and seeds yield identical
    /// strings regardless of worker thread count.
    pub fn canonical_json(&self) -> String {
        canon::to_canonical_json(self).expect("report serialization cannot fail")
    }
}
