//! Backtracking search for {0,1} colorings with exactly one 0 per triad.
//!
//! Branching follows decreasing triad-membership degree; forced values are
//! propagated (a 0 forces its triad partners to 1, two 1s force the third
//! member to 0). The search is complete: `Uncolorable` is only reported
//! after the space is exhausted, and every returned witness is re-verified
//! by direct evaluation.

use super::{Assignment, ColorStatus, ColorabilityReport, KSSet, Triad};
use std::time::Instant;

const UNASSIGNED: i8 = -1;

struct SearchState<'a> {
    triads: &'a [Triad],
    /// Triad indices touching each direction.
    membership: Vec<Vec<u32>>,
    /// Branching order: directions by decreasing degree.
    order: Vec<usize>,
    values: Vec<i8>,
    nodes: u64,
}

impl<'a> SearchState<'a> {
    fn new(set: &'a KSSet) -> Self {
        let n = set.directions().len();
        let mut membership = vec![Vec::new(); n];
        for (t_idx, t) in set.triads().iter().enumerate() {
            for m in t.members() {
                membership[m].push(t_idx as u32);
            }
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&i| std::cmp::Reverse(membership[i].len()));
        SearchState {
            triads: set.triads(),
            membership,
            order,
            values: vec![UNASSIGNED; n],
            nodes: 0,
        }
    }

    /// Assigns forced values reachable from `start`; on contradiction
    /// returns false. All assignments (including `start`) go on `trail`.
    fn assign_and_propagate(&mut self, start: usize, value: i8, trail: &mut Vec<usize>) -> bool {
        self.values[start] = value;
        trail.push(start);
        let mut queue_idx = trail.len() - 1;
        while queue_idx < trail.len() {
            let dir = trail[queue_idx];
            queue_idx += 1;
            for ti in 0..self.membership[dir].len() {
                let t = self.triads[self.membership[dir][ti] as usize].members();
                let mut zeros = 0;
                let mut unassigned = [usize::MAX; 3];
                let mut n_unassigned = 0;
                for &m in &t {
                    match self.values[m] {
                        0 => zeros += 1,
                        UNASSIGNED => {
                            unassigned[n_unassigned] = m;
                            n_unassigned += 1;
                        }
                        _ => {}
                    }
                }
                if zeros > 1 || (zeros == 0 && n_unassigned == 0) {
                    return false;
                }
                if zeros == 1 {
                    // Remaining members must be 1.
                    for &m in unassigned.iter().take(n_unassigned) {
                        self.values[m] = 1;
                        trail.push(m);
                    }
                } else if zeros == 0 && n_unassigned == 1 {
                    self.values[unassigned[0]] = 0;
                    trail.push(unassigned[0]);
                }
            }
        }
        true
    }

    fn undo(&mut self, trail: &[usize]) {
        for &dir in trail {
            self.values[dir] = UNASSIGNED;
        }
    }

    fn search(&mut self) -> bool {
        self.nodes += 1;
        let pick = match self.order.iter().find(|&&i| self.values[i] == UNASSIGNED) {
            Some(&i) => i,
            None => return true,
        };
        for value in [0, 1] {
            let mut trail = Vec::new();
            if self.assign_and_propagate(pick, value, &mut trail) && self.search() {
                return true;
            }
            self.undo(&trail);
        }
        false
    }
}

/// Complete search for an assignment with exactly one 0 per triad.
pub fn is_colorable(set: &KSSet) -> ColorabilityReport {
    let started = Instant::now();
    let mut state = SearchState::new(set);
    let status = if state.search() {
        let witness = Assignment::new(state.values.iter().map(|&v| v.max(0) as u8).collect());
        for t in set.triads() {
            assert!(witness.satisfies(t), "witness failed verification on {:?}", t.members());
        }
        ColorStatus::Colorable { witness }
    } else {
        ColorStatus::Uncolorable
    };
    ColorabilityReport {
        status,
        nodes_explored: state.nodes,
        elapsed_seconds: started.elapsed().as_secs_f64(),
    }
}

/// Minimum, over all assignments, of the number of triads violating
/// exactly-one-zero. Zero iff the set is colorable.
///
/// Branch and bound on the same degree ordering: a triad is counted once it
/// can no longer be satisfied by any completion (two members 0, or all
/// three assigned without a single 0), and the count only grows along a
/// branch, so pruning against the incumbent is sound.
pub fn min_violated_triads(set: &KSSet) -> usize {
    let n = set.directions().len();
    let mut membership = vec![Vec::new(); n];
    for (t_idx, t) in set.triads().iter().enumerate() {
        for m in t.members() {
            membership[m].push(t_idx as u32);
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| std::cmp::Reverse(membership[i].len()));

    struct Bb<'a> {
        triads: &'a [Triad],
        membership: Vec<Vec<u32>>,
        order: Vec<usize>,
        values: Vec<i8>,
        best: usize,
    }

    impl Bb<'_> {
        fn doomed(&self, triad: &Triad) -> bool {
            let mut zeros = 0;
            let mut unassigned = 0;
            for &m in &triad.members() {
                match self.values[m] {
                    0 => zeros += 1,
                    UNASSIGNED => unassigned += 1,
                    _ => {}
                }
            }
            zeros > 1 || (zeros == 0 && unassigned == 0)
        }

        fn recurse(&mut self, depth: usize, doomed_count: usize) {
            if doomed_count >= self.best {
                return;
            }
            if depth == self.order.len() {
                self.best = doomed_count;
                return;
            }
            let dir = self.order[depth];
            for value in [1, 0] {
                // Only triads touching `dir` can newly become doomed; count
                // each exactly once, at the assignment that dooms it.
                let mut newly_doomed = 0;
                for idx in 0..self.membership[dir].len() {
                    let t = self.triads[self.membership[dir][idx] as usize];
                    self.values[dir] = UNASSIGNED;
                    let was = self.doomed(&t);
                    self.values[dir] = value;
                    if !was && self.doomed(&t) {
                        newly_doomed += 1;
                    }
                }
                self.values[dir] = value;
                self.recurse(depth + 1, doomed_count + newly_doomed);
            }
            self.values[dir] = UNASSIGNED;
        }
    }

    let mut bb = Bb {
        triads: set.triads(),
        membership,
        order,
        values: vec![UNASSIGNED; n],
        best: set.n_triads() + 1,
    };
    // An all-ones assignment violates every triad, so the loop always
    // tightens; start above that so empty sets return 0.
    bb.recurse(0, 0);
    bb.best.min(set.n_triads())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Direction;
    use crate::kscore::{clause_encoding_colorable, peres_set, triad_complete, KSSet};

    fn axes_set() -> KSSet {
        KSSet::new(
            "axes",
            1e-9,
            vec![Direction::x_axis(), Direction::y_axis(), Direction::z_axis()],
            None,
        )
        .unwrap()
    }

    /// Axes plus the x-y frame rotated 45 degrees about z: two triads
    /// sharing the z direction.
    fn shared_z_set() -> KSSet {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let dirs = vec![
            Direction::x_axis(),
            Direction::y_axis(),
            Direction::z_axis(),
            Direction::new(s, s, 0.0).unwrap(),
            Direction::new(-s, s, 0.0).unwrap(),
        ];
        KSSet::new("shared-z", 1e-9, dirs, None).unwrap()
    }

    #[test]
    fn single_triad_is_colorable() {
        let report = is_colorable(&axes_set());
        match report.status {
            ColorStatus::Colorable { witness } => {
                let zeros = witness.values().iter().filter(|&&v| v == 0).count();
                assert_eq!(zeros, 1);
            }
            ColorStatus::Uncolorable => panic!("single triad must be colorable"),
        }
    }

    #[test]
    fn shared_direction_set_is_colorable() {
        let set = shared_z_set();
        assert_eq!(set.n_triads(), 2);
        assert!(set.has_shared_direction());
        let report = is_colorable(&set);
        match report.status {
            // z = 0 and everything else 1 is the canonical witness; the
            // solver may find any valid one.
            ColorStatus::Colorable { witness } => {
                for t in set.triads() {
                    assert!(witness.satisfies(t));
                }
            }
            ColorStatus::Uncolorable => panic!("shared-z control set must be colorable"),
        }
    }

    #[test]
    fn completed_peres_is_uncolorable() {
        let completed = triad_complete(&peres_set(1e-9).unwrap()).unwrap();
        let report = is_colorable(&completed);
        assert_eq!(report.status, ColorStatus::Uncolorable);
        assert!(report.nodes_explored > 0);
        // Independent clause-based route agrees.
        assert!(!clause_encoding_colorable(&completed));
    }

    #[test]
    fn uncompleted_peres_is_triad_colorable() {
        // Without pair completion the 16 bare triads alone still admit a
        // coloring; the solver and the clause route must agree on that too.
        let set = peres_set(1e-9).unwrap();
        let report = is_colorable(&set);
        assert!(report.status.is_colorable());
        assert!(clause_encoding_colorable(&set));
    }

    #[test]
    fn min_violated_zero_iff_colorable() {
        assert_eq!(min_violated_triads(&axes_set()), 0);
        assert_eq!(min_violated_triads(&shared_z_set()), 0);
    }

    #[test]
    fn min_violated_two_disjoint_triads() {
        let c = std::f64::consts::FRAC_PI_6.cos();
        let s = std::f64::consts::FRAC_PI_6.sin();
        let dirs = vec![
            Direction::x_axis(),
            Direction::y_axis(),
            Direction::z_axis(),
            Direction::new(c, s, 0.0).unwrap(),
            Direction::new(-s, c, 0.0).unwrap(),
        ];
        // Triads (0,1,2) and (2,3,4) share z but are independently satisfiable.
        let set = KSSet::new("two", 1e-9, dirs, None).unwrap();
        assert_eq!(set.n_triads(), 2);
        assert_eq!(min_violated_triads(&set), 0);
    }

    #[test]
    fn min_violated_on_completed_peres() {
        let completed = triad_complete(&peres_set(1e-9).unwrap()).unwrap();
        assert_eq!(min_violated_triads(&completed), 1);
    }

    /// Exhaustive enumeration oracle for small sets.
    fn brute_force_min_violated(set: &KSSet) -> usize {
        let n = set.directions().len();
        assert!(n <= 20, "brute force limited to small sets");
        let mut best = usize::MAX;
        for mask in 0u32..(1 << n) {
            let values: Vec<u8> = (0..n).map(|i| ((mask >> i) & 1) as u8).collect();
            let a = Assignment::new(values);
            let violated = set.triads().iter().filter(|t| !a.satisfies(t)).count();
            best = best.min(violated);
        }
        best
    }

    #[test]
    fn branch_and_bound_matches_brute_force_on_reduced_sets() {
        // A chain of triads sharing directions, built from rotations about z.
        let mut dirs = vec![Direction::z_axis()];
        for step in 0..5 {
            let phi = 0.3 * step as f64;
            dirs.push(Direction::new(phi.cos(), phi.sin(), 0.0).unwrap());
            dirs.push(Direction::new(-phi.sin(), phi.cos(), 0.0).unwrap());
        }
        let chain = KSSet::new("chain", 1e-9, dirs, None).unwrap();
        assert!(chain.n_triads() >= 5);
        assert_eq!(min_violated_triads(&chain), brute_force_min_violated(&chain));
        assert_eq!(
            is_colorable(&chain).status.is_colorable(),
            brute_force_min_violated(&chain) == 0
        );

        let axes = axes_set();
        assert_eq!(min_violated_triads(&axes), brute_force_min_violated(&axes));
    }
}
