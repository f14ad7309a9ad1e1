//! Failure counting, exact binomial upper bounds, and the exclusion rule.

use serde::{Deserialize, Serialize};
use statrs::function::beta::beta_reg;

/// What to do with trials where a detector failed to click.
///
/// `CountAsFailure` is the conservative default: detection losses fold into
/// the failure rate, so they count against exclusion unless a fair-sampling
/// assumption is explicitly invoked via `Discard`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoClickPolicy {
    #[default]
    CountAsFailure,
    Discard,
}

/// Exclusion decision: `Excluded` iff every Bonferroni-corrected upper
/// bound stays strictly below the `1/N` threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Excluded,
    Inconclusive,
}

/// Which result sums count as failures for a context.
#[derive(Debug, Clone, Copy)]
pub enum FailureRule {
    /// Kochen-Specker triads: the sum of the three results must be 2.
    SumNotTwo,
    /// GHZ contexts: the +-1 product (with 0 mapped to -1 and 1 to +1)
    /// must equal the target parity.
    ParityMismatch { target: i8 },
}

impl FailureRule {
    pub fn is_failure(&self, sum: u8) -> bool {
        match self {
            FailureRule::SumNotTwo => sum != 2,
            FailureRule::ParityMismatch { target } => {
                let zeros = 3 - i32::from(sum);
                let product = if zeros % 2 == 0 { 1 } else { -1 };
                product != i32::from(*target)
            }
        }
    }
}

/// Per-triad tally of result sums and no-click trials.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TrialCounts {
    pub sums: [u64; 4],
    pub no_click: u64,
}

impl TrialCounts {
    pub fn record(&mut self, sum: Option<u8>) {
        match sum {
            Some(s) => self.sums[usize::from(s)] += 1,
            None => self.no_click += 1,
        }
    }

    pub fn merge(&mut self, other: &TrialCounts) {
        for (a, b) in self.sums.iter_mut().zip(other.sums) {
            *a += b;
        }
        self.no_click += other.no_click;
    }

    pub fn total(&self) -> u64 {
        self.sums.iter().sum::<u64>() + self.no_click
    }
}

/// Failure fraction and upper confidence bound for one triad.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RowStats {
    pub trials: u64,
    pub failures: u64,
    pub eps_hat: f64,
    pub upper: f64,
}

/// Applies the no-click policy and the Clopper-Pearson bound at the
/// (already Bonferroni-corrected) per-triad level `alpha_per_triad`.
/// A triad with an empty denominator carries no information: `eps_hat = 0`
/// but `upper = 1`, so it can never support exclusion.
pub fn summarize(
    counts: &TrialCounts,
    rule: FailureRule,
    policy: NoClickPolicy,
    alpha_per_triad: f64,
) -> RowStats {
    let click_failures: u64 = (0..4u8)
        .filter(|&s| rule.is_failure(s))
        .map(|s| counts.sums[usize::from(s)])
        .sum();
    let (failures, denominator) = match policy {
        NoClickPolicy::CountAsFailure => (click_failures + counts.no_click, counts.total()),
        NoClickPolicy::Discard => (click_failures, counts.total() - counts.no_click),
    };
    if denominator == 0 {
        return RowStats { trials: 0, failures: 0, eps_hat: 0.0, upper: 1.0 };
    }
    RowStats {
        trials: denominator,
        failures,
        eps_hat: failures as f64 / denominator as f64,
        upper: clopper_pearson_upper(failures, denominator, alpha_per_triad),
    }
}

/// Exact one-sided binomial upper confidence bound at level `1 - alpha`:
/// the largest failure probability still consistent with seeing at most
/// `failures` failures, i.e. the `u` solving `P(X <= failures | u) = alpha`.
///
/// Computed by bisection on the regularized incomplete beta function via
/// the identity `P(X <= k | u) = 1 - I_u(k + 1, n - k)`.
pub fn clopper_pearson_upper(failures: u64, trials: u64, alpha: f64) -> f64 {
    assert!(trials >= 1, "need at least one trial");
    assert!(failures <= trials, "failures cannot exceed trials");
    assert!(alpha > 0.0 && alpha < 1.0, "alpha must lie in (0, 1)");
    if failures == trials {
        return 1.0;
    }
    let a = failures as f64 + 1.0;
    let b = (trials - failures) as f64;
    let target = 1.0 - alpha;
    let mut lo = 0.0;
    let mut hi = 1.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if beta_reg(a, b, mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// `Excluded` iff `max_k u_k < 1/N`, strictly. The bounds must already be
/// computed at the per-triad level `alpha / N`.
pub fn verdict(upper_bounds: &[f64], n_triads: usize) -> Verdict {
    if n_triads == 0 || upper_bounds.is_empty() {
        return Verdict::Inconclusive;
    }
    let u_max = upper_bounds.iter().cloned().fold(f64::MIN, f64::max);
    if u_max < 1.0 / n_triads as f64 {
        Verdict::Excluded
    } else {
        Verdict::Inconclusive
    }
}
