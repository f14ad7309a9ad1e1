//! Ingest externally recorded trials from CSV, including lost counts, and
//! compare the conservative and fair-sampling treatments of no-click
//! trials.
//!
//! ```bash
//! cargo run --release --example analyze_trials
//! ```

use ksf::experiment::{analyze_counts, NoClickPolicy};
use ksf::geometry::Direction;
use ksf::kscore::KSSet;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::io::Cursor;

fn main() {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let set = KSSet::new(
        "two-triads",
        1e-9,
        vec![
            Direction::x_axis(),
            Direction::y_axis(),
            Direction::z_axis(),
            Direction::new(s, s, 0.0).unwrap(),
            Direction::new(-s, s, 0.0).unwrap(),
        ],
        None,
    )
    .unwrap();
    println!("set: {} directions, {} triads", set.directions().len(), set.n_triads());

    // Fake a detector log: mostly (1,1,0) successes, 2% miscounts, 5% lost
    // clicks (recorded as -1).
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    let mut csv = String::from("trial,triad,r1,r2,r3\n");
    for trial in 0..4000u32 {
        let triad = trial % 2;
        let roll: f64 = rng.random();
        let row = if roll < 0.02 {
            "1,1,1"
        } else if roll < 0.07 {
            "1,-1,0"
        } else {
            "1,1,0"
        };
        csv.push_str(&format!("{trial},{triad},{row}\n"));
    }

    for policy in [NoClickPolicy::CountAsFailure, NoClickPolicy::Discard] {
        let report = analyze_counts(Cursor::new(csv.as_bytes()), &set, 0.05, policy).unwrap();
        println!();
        println!("policy {policy:?}:");
        for row in &report.per_triad {
            println!(
                "  triad {} {:?}: {} trials, {} failures, eps_hat = {:.4}, upper = {:.4}",
                row.index,
                row.members.unwrap(),
                row.trials,
                row.failures,
                row.eps_hat,
                row.upper
            );
        }
        println!(
            "  eps_max = {:.4}, u_max = {:.4}, threshold = {}, verdict {:?}",
            report.epsilon_max, report.u_max, report.threshold, report.verdict
        );
    }

    println!();
    println!("counting lost clicks as failures is the conservative default; discarding");
    println!("them assumes fair sampling and always lowers the estimated failure rate.");
    println!("note: this two-triad set is colorable, so its verdict carries no weight;");
    println!("run `ksf verify` first, exclusion only means something for uncolorable sets.");
}
