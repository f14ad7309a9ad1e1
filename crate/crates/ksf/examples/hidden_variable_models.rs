//! Try to beat the threshold with non-contextual hidden variables. Every
//! finite model, however weighted, fails some triad with probability at
//! least 1/N on an uncolorable set.
//!
//! ```bash
//! cargo run --release --example hidden_variable_models
//! ```

use ksf::experiment::{run_experiment, ExperimentConfig, NoiseModel, Source, StateSpec};
use ksf::kscore::{
    nchv_failure_probs, peres_set, triad_complete, union_bound_lower, HVModel, HVPoint,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_model(n_dirs: usize, n_points: usize, rng: &mut impl Rng) -> HVModel {
    let mut weights: Vec<f64> = (0..n_points).map(|_| rng.random::<f64>()).collect();
    let total: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= total;
    }
    weights[0] += 1.0 - weights.iter().sum::<f64>();
    HVModel::new(
        weights
            .into_iter()
            .map(|weight| HVPoint {
                weight,
                values: (0..n_dirs).map(|_| rng.random_range(0..=1u8)).collect(),
            })
            .collect(),
    )
    .unwrap()
}

fn main() {
    let set = triad_complete(&peres_set(1e-9).unwrap()).unwrap();
    let n = set.n_triads();
    let threshold = 1.0 / n as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(17);

    println!("completed Peres set: N = {n}, threshold = {threshold}");
    println!();
    println!("model    points   max eps_k   sum eps_k   union bound 1 - sum");

    let mut best = f64::INFINITY;
    for idx in 0..10 {
        let model = random_model(set.directions().len(), 1 + 3 * idx, &mut rng);
        let eps = nchv_failure_probs(&model, &set).unwrap();
        let max = eps.iter().cloned().fold(0.0, f64::max);
        let sum: f64 = eps.iter().sum();
        best = best.min(max);
        println!(
            "{idx:>5}    {:>6}   {max:>9.4}   {sum:>9.4}   {:>19.4}",
            model.points().len(),
            union_bound_lower(&eps)
        );
    }
    println!();
    println!("best max eps_k over the random models: {best:.4} (never below {threshold})");
    println!("sum_k eps_k >= 1 always: each deterministic point violates some triad.");

    // The same impossibility, statistically: simulate the best-effort model
    // as a trial source and look at the measured upper bounds.
    let model = random_model(set.directions().len(), 16, &mut rng);
    let config = ExperimentConfig {
        set,
        state: StateSpec::MaximallyMixed,
        noise: NoiseModel::default(),
        trials_per_triad: 20_000,
        seed: 4,
        alpha: 0.01,
        source: Source::HiddenVariable { model },
    };
    let report = run_experiment(&config).unwrap();
    println!();
    println!(
        "simulated 16-point model at {} trials/triad: u_max = {:.4} >= {threshold}, verdict {:?}",
        config.trials_per_triad, report.u_max, report.verdict
    );
}
