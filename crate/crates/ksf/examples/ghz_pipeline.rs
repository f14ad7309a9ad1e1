//! The local-hidden-variable analog: four GHZ parity contexts, of which any
//! local value assignment satisfies at most three, against a quantum state
//! that satisfies all four.
//!
//! ```bash
//! cargo run --release --example ghz_pipeline
//! ```

use ksf::ghz::{context_parity, ghz_contexts, ghz_state, lhv_max_satisfiable, run_ghz_experiment, GhzConfig};

fn main() {
    let state = ghz_state();
    println!("context   target   <O1 x O2 x O3> on (|000> + |111>)/sqrt(2)");
    for ctx in ghz_contexts() {
        let parity = context_parity(&state, &ctx).unwrap();
        println!("  {}      {:>3}      {parity:+.12}", ctx.label(), ctx.target_parity);
    }

    let (max_satisfiable, witness, threshold) = lhv_max_satisfiable();
    println!();
    println!("brute force over all 64 local assignments: at most {max_satisfiable} of 4 contexts hold");
    println!("one maximizer: {:?}", witness.values);
    println!("union-bound threshold with N = 4: {threshold}");

    let config = GhzConfig { trials_per_context: 50_000, seed: 8, alpha: 0.01 };
    let report = run_ghz_experiment(&config).unwrap();
    println!();
    println!(
        "perfect GHZ source at {} trials/context: eps_max = {}, u_max = {:.2e}",
        config.trials_per_context, report.epsilon_max, report.u_max
    );
    println!("verdict: {:?} (local hidden variables)", report.verdict);
}
