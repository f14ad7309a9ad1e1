//! How much misalignment can the experiment tolerate? Sweep the per-switch
//! jitter and watch the worst failure rate approach the 1/N threshold under
//! the sequential model, while the joint-frame model never fails at all.
//!
//! ```bash
//! cargo run --release --example finite_precision_sweep
//! ```

use ksf::experiment::{
    run_experiment, ExperimentConfig, MeasurementModel, NoiseModel, Source, StateSpec, Verdict,
};
use ksf::kscore::{peres_set, triad_complete};

fn main() {
    let set = triad_complete(&peres_set(1e-9).unwrap()).unwrap();
    let threshold = 1.0 / set.n_triads() as f64;
    println!("N = {}, threshold 1/N = {threshold:.4}", set.n_triads());
    println!();
    println!("sigma [rad]   sequential eps_max   u_max      verdict      joint eps_max");

    for step in 0..8 {
        let sigma = 0.005 * f64::from(step) * f64::from(step);
        let mut config = ExperimentConfig {
            set: set.clone(),
            state: StateSpec::MaximallyMixed,
            noise: NoiseModel { jitter_sigma: sigma, ..NoiseModel::default() },
            trials_per_triad: 4000,
            seed: 99,
            alpha: 0.01,
            source: Source::Quantum { model: MeasurementModel::Sequential },
        };
        let sequential = run_experiment(&config).unwrap();
        config.source = Source::Quantum { model: MeasurementModel::Joint };
        let joint = run_experiment(&config).unwrap();
        let verdict = match sequential.verdict {
            Verdict::Excluded => "Excluded",
            Verdict::Inconclusive => "Inconclusive",
        };
        println!(
            "{sigma:>10.3}   {:>18.5}   {:>8.5}   {verdict:<12} {:>13.5}",
            sequential.epsilon_max, sequential.u_max, joint.epsilon_max
        );
    }

    println!();
    println!("sequential S^2 measurements of jittered, non-commuting directions");
    println!("produce sum != 2 at a rate growing with sigma^2; a joint projective");
    println!("measurement in the orthonormalized frame can never miss the sum rule,");
    println!("so misalignment alone does not mimic contextuality there.");
}
