//! End-to-end zero-noise run: simulate the completed Peres set, bound every
//! per-triad failure rate, and reach the exclusion verdict.
//!
//! ```bash
//! cargo run --release --example exclusion_pipeline
//! ```

use ksf::experiment::{run_experiment, ExperimentConfig, NoiseModel, Source, StateSpec};
use ksf::kscore::{peres_set, triad_complete};

fn main() {
    let set = triad_complete(&peres_set(1e-9).unwrap()).unwrap();
    let n = set.n_triads() as f64;
    let alpha = 0.01;

    // With zero observed failures the Clopper-Pearson bound at level
    // alpha/N is 1 - (alpha/N)^(1/n), so the smallest excluding trial count
    // per triad is ceil(ln(alpha/N) / ln(1 - 1/N)).
    let minimum = ((alpha / n).ln() / (1.0 - 1.0 / n).ln()).ceil() as u64;
    println!("N = {} triads, threshold 1/N = {:.4}", set.n_triads(), 1.0 / n);
    println!("minimum trials per triad for exclusion at alpha = {alpha}: {minimum}");

    let config = ExperimentConfig {
        set,
        state: StateSpec::MaximallyMixed,
        noise: NoiseModel::default(),
        trials_per_triad: 10_000,
        seed: 2024,
        alpha,
        source: Source::default(),
    };
    let report = run_experiment(&config).expect("config is valid and set uncolorable");

    println!(
        "ran {} trials/triad: eps_max = {}, u_max = {:.2e}",
        config.trials_per_triad, report.epsilon_max, report.u_max
    );
    println!("verdict: {:?} (u_max < 1/N = {})", report.verdict, report.threshold);
    println!("config digest: {}", report.config_digest);
    println!("rerun with the same seed to reproduce this report byte for byte");
}
