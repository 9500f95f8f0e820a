//! Brute-force verifiers.
//!
//! These enumerators are correctness instruments, not solvers: they work in
//! plain probability space (products, not logs) so they cannot share a bug
//! with the log-space knapsack path they audit. Tie-breaking is fixed so
//! results are reproducible fixtures.

use crate::error::{Error, Result};
use crate::prefix::{build_family, CandidateFamily};
use crate::stats::FeatureStats;

/// Largest feature the subset oracle will enumerate (2^m subsets).
pub const SUBSET_ORACLE_MAX_TYPES: usize = 20;
/// Largest prefix-combination count the combo oracle will enumerate.
pub const COMBO_ORACLE_MAX_COMBINATIONS: u128 = 10_000_000;

/// Result of an exhaustive enumeration.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    /// Exact maximum over the enumerated space (a lift, linear units).
    pub best_objective: f64,
    /// For [`subset_oracle`]: sorted type indices of the best subset.
    /// For [`combo_oracle`]: chosen prefix length per family.
    pub best_selection: Vec<usize>,
    /// Filled when the audited algorithm disagrees with the enumeration.
    pub discrepancy: Option<Discrepancy>,
}

/// Record of the audited algorithm falling short of the enumerated optimum.
#[derive(Debug, Clone, PartialEq)]
pub struct Discrepancy {
    pub algorithm_objective: f64,
    pub algorithm_selection: Vec<usize>,
    /// `(best - algorithm) / best`.
    pub relative_gap: f64,
}

/// Enumerates every non-empty subset of one feature's types with
/// `Σq >= l_floor` and returns the maximum-lift subset. Ties go to the
/// smallest cardinality, then to the lexicographically smallest member
/// list. Subsets with `Σq = 0` cover nobody and are skipped.
///
/// The greedy prefix answer for the same floor is computed alongside and a
/// [`Discrepancy`] is recorded whenever the enumeration beats it by more
/// than 1e-9 relative; this audits the claim that the greedy prefix is
/// globally optimal over all subsets.
pub fn subset_oracle(feature: &FeatureStats, l_floor: f64) -> Result<OracleResult> {
    let m = feature.types.len();
    if m > SUBSET_ORACLE_MAX_TYPES {
        return Err(Error::TooLarge(format!(
            "subset oracle enumerates 2^m subsets; m = {m} exceeds {SUBSET_ORACLE_MAX_TYPES}"
        )));
    }

    let mut best: Option<(f64, Vec<usize>)> = None;
    for mask in 1u32..(1 << m) {
        let mut cum_q = 0.0;
        let mut cum_p = 0.0;
        for (i, t) in feature.types.iter().enumerate() {
            if mask >> i & 1 == 1 {
                cum_q += t.q;
                cum_p += t.p;
            }
        }
        if cum_q == 0.0 || cum_q < l_floor {
            continue;
        }
        let lift = cum_p / cum_q;
        let better = match &best {
            None => true,
            Some((best_lift, best_members)) => {
                lift > *best_lift
                    || (lift == *best_lift && {
                        let cardinality = mask.count_ones() as usize;
                        cardinality < best_members.len()
                            || (cardinality == best_members.len()
                                && members_of(mask, m) < *best_members)
                    })
            }
        };
        if better {
            best = Some((lift, members_of(mask, m)));
        }
    }
    let (best_objective, best_selection) =
        best.expect("the full set always satisfies any floor <= 1");

    let greedy = build_family(feature, 0);
    let greedy_pick = greedy.shortest_covering(l_floor);
    let relative_gap = (best_objective - greedy_pick.lift) / best_objective;
    let discrepancy = (relative_gap > 1e-9).then(|| {
        let mut algorithm_selection = greedy_pick.members.clone();
        algorithm_selection.sort_unstable();
        Discrepancy {
            algorithm_objective: greedy_pick.lift,
            algorithm_selection,
            relative_gap,
        }
    });

    Ok(OracleResult {
        best_objective,
        best_selection,
        discrepancy,
    })
}

fn members_of(mask: u32, m: usize) -> Vec<usize> {
    (0..m).filter(|i| mask >> i & 1 == 1).collect()
}

/// Enumerates one prefix per family over all combinations, keeping those
/// with coverage `Π cum_q >= l_floor`, and returns the maximum `Π lift`.
/// Ties keep the lexicographically smallest `(k_1, ..., k_n)`.
pub fn combo_oracle(families: &[CandidateFamily], l_floor: f64) -> Result<OracleResult> {
    let combinations = families
        .iter()
        .map(|f| f.type_count() as u128)
        .try_fold(1u128, |acc, m| {
            let total = acc.checked_mul(m)?;
            (total <= COMBO_ORACLE_MAX_COMBINATIONS).then_some(total)
        })
        .ok_or_else(|| {
            Error::TooLarge(format!(
                "combo oracle enumerates Π m_i combinations; limit is {COMBO_ORACLE_MAX_COMBINATIONS}"
            ))
        })?;
    let _ = combinations;

    let n = families.len();
    let mut ks = vec![1usize; n];
    let mut best: Option<(f64, Vec<usize>)> = None;
    loop {
        let mut coverage = 1.0;
        let mut objective = 1.0;
        for (family, &k) in families.iter().zip(&ks) {
            let c = &family.candidates[k - 1];
            coverage *= c.cum_q;
            objective *= c.lift;
        }
        if coverage >= l_floor {
            let better = match &best {
                None => true,
                Some((best_objective, _)) => objective > *best_objective,
            };
            if better {
                best = Some((objective, ks.clone()));
            }
        }
        // Odometer: the last index moves fastest, so combinations arrive in
        // lexicographic order and the first maximum wins ties.
        let mut pos = n;
        loop {
            if pos == 0 {
                let (best_objective, best_selection) =
                    best.expect("the all-full combination always has coverage 1");
                return Ok(OracleResult {
                    best_objective,
                    best_selection,
                    discrepancy: None,
                });
            }
            pos -= 1;
            if ks[pos] < families[pos].type_count() {
                ks[pos] += 1;
                break;
            }
            ks[pos] = 1;
        }
    }
}
