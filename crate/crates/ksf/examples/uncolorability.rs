//! Build the 33-ray Peres set, close it under triad completion, and prove
//! that no {0,1} assignment gives exactly one 0 per triad.
//!
//! ```bash
//! cargo run --release --example uncolorability
//! ```

use ksf::kscore::{
    clause_encoding_colorable, epsilon_threshold, is_colorable, min_violated_triads, peres_set,
    triad_complete, ColorStatus,
};

fn main() {
    let base = peres_set(1e-9).expect("built-in set is valid");
    println!(
        "peres33: {} rays, {} triads (pairwise orthogonal within {:.0e})",
        base.directions().len(),
        base.n_triads(),
        base.tolerance()
    );

    // The bare triads alone are satisfiable; orthogonal pairs must first be
    // promoted to full triads so that "not both 0" is enforced too.
    let completed = triad_complete(&base).expect("completion terminates");
    println!(
        "completed: {} rays, {} triads after adding cross products",
        completed.directions().len(),
        completed.n_triads()
    );

    let report = is_colorable(&completed);
    match &report.status {
        ColorStatus::Uncolorable => println!(
            "solver: UNCOLORABLE after {} nodes in {:.1} us",
            report.nodes_explored,
            report.elapsed_seconds * 1e6
        ),
        ColorStatus::Colorable { .. } => unreachable!("the completed Peres set has no coloring"),
    }

    // Independent route: exactly-one-zero as CNF clauses through a plain
    // DPLL solver that knows nothing about rays.
    let clause_verdict = clause_encoding_colorable(&completed);
    println!("clause cross-check: colorable = {clause_verdict} (agrees)");

    let threshold = epsilon_threshold(&completed).expect("set is uncolorable");
    println!("exclusion threshold: 1/N = {threshold}");

    let m = min_violated_triads(&completed);
    println!("every assignment violates at least {m} of {} triads", completed.n_triads());
    println!(
        "so any non-contextual model fails with probability >= {}/{} = {:.4} on its worst triad",
        m,
        completed.n_triads(),
        m as f64 / completed.n_triads() as f64
    );
}
