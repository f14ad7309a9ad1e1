//! Clause-based cross-check of the colorability verdict.
//!
//! Independent second route: the exactly-one-zero constraints are encoded as
//! CNF clauses over "direction i is assigned 0" literals and handed to a
//! small self-contained DPLL solver that knows nothing about sets, rays or
//! triads. Agreement with [`super::is_colorable`] guards against bugs in the
//! domain solver's propagation.

use super::KSSet;

/// Conjunctive normal form over 1-based variables; negative literal = -v.
pub(crate) struct Cnf {
    n_vars: usize,
    clauses: Vec<Vec<i32>>,
}

/// Variable `i + 1` means "direction i carries the value 0". Per triad
/// (a, b, c): at least one zero, and no two zeros.
pub(crate) fn encode_exactly_one_zero(set: &KSSet) -> Cnf {
    let lit = |d: usize| (d + 1) as i32;
    let mut clauses = Vec::with_capacity(4 * set.n_triads());
    for t in set.triads() {
        let [a, b, c] = t.members();
        clauses.push(vec![lit(a), lit(b), lit(c)]);
        clauses.push(vec![-lit(a), -lit(b)]);
        clauses.push(vec![-lit(a), -lit(c)]);
        clauses.push(vec![-lit(b), -lit(c)]);
    }
    Cnf { n_vars: set.directions().len(), clauses }
}

/// Plain DPLL: unit propagation plus branching on the first free variable.
pub(crate) fn dpll(cnf: &Cnf) -> bool {
    // 0 = unassigned, 1 = true, -1 = false.
    let mut assignment = vec![0i8; cnf.n_vars + 1];
    dpll_rec(&cnf.clauses, &mut assignment)
}

fn dpll_rec(clauses: &[Vec<i32>], assignment: &mut Vec<i8>) -> bool {
    // Unit propagation to fixpoint.
    let mut trail: Vec<usize> = Vec::new();
    loop {
        let mut unit: Option<i32> = None;
        for clause in clauses {
            let mut satisfied = false;
            let mut free = 0;
            let mut last_free = 0;
            for &l in clause {
                match assignment[l.unsigned_abs() as usize] as i32 * l.signum() {
                    v if v > 0 => {
                        satisfied = true;
                        break;
                    }
                    0 => {
                        free += 1;
                        last_free = l;
                    }
                    _ => {}
                }
            }
            if satisfied {
                continue;
            }
            if free == 0 {
                for &v in &trail {
                    assignment[v] = 0;
                }
                return false;
            }
            if free == 1 {
                unit = Some(last_free);
                break;
            }
        }
        match unit {
            Some(l) => {
                let var = l.unsigned_abs() as usize;
                assignment[var] = l.signum() as i8;
                trail.push(var);
            }
            None => break,
        }
    }
    let var = match assignment.iter().skip(1).position(|&v| v == 0) {
        Some(idx) => idx + 1,
        None => return true,
    };
    for value in [1i8, -1] {
        assignment[var] = value;
        if dpll_rec(clauses, assignment) {
            return true;
        }
    }
    assignment[var] = 0;
    for &v in &trail {
        assignment[v] = 0;
    }
    false
}

/// Colorability decided through the independent CNF route.
pub fn clause_encoding_colorable(set: &KSSet) -> bool {
    if set.n_triads() == 0 {
        return true;
    }
    dpll(&encode_exactly_one_zero(set))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dpll_handles_tiny_formulas() {
        // (x1) & (-x1 | x2): satisfiable.
        let sat = Cnf { n_vars: 2, clauses: vec![vec![1], vec![-1, 2]] };
        assert!(dpll(&sat));
        // (x1) & (-x1): unsatisfiable.
        let unsat = Cnf { n_vars: 1, clauses: vec![vec![1], vec![-1]] };
        assert!(!dpll(&unsat));
        // Pigeonhole-ish: x1 xor chain forcing contradiction.
        let unsat2 = Cnf {
            n_vars: 2,
            clauses: vec![vec![1, 2], vec![-1, 2], vec![1, -2], vec![-1, -2]],
        };
        assert!(!dpll(&unsat2));
    }
}
