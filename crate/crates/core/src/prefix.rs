//! Ratio-greedy prefix candidates.
//!
//! For a single feature, the best selection covering a floor `L_i` is found
//! greedily: sort the types by non-increasing buy-lift ratio `p/q` and take
//! the shortest prefix whose cumulative audience share reaches `L_i`. Since
//! the floor cannot be fixed per feature in advance, [`build_family`]
//! records all `m_i` prefixes; the knapsack stage then picks one prefix per
//! feature globally.
//!
//! By the mediant inequality, appending a lower-ratio type can only pull
//! the cumulative ratio down, so the prefix lifts are non-increasing in the
//! prefix length and end at exactly 1 for the full feature. Every prefix
//! therefore has lift >= 1 on a renormalized feature.

use crate::stats::FeatureStats;

/// Snap tolerance for sums that are mathematically exact but carry float
/// rounding: final cumulative sums to 1, and lifts from just below 1.
const SNAP_EPS: f64 = 1e-9;

/// The first `len` types of a feature under the ratio ranking, with exact
/// cumulative shares.
#[derive(Debug, Clone, PartialEq)]
pub struct PrefixCandidate {
    pub feature_index: usize,
    /// Prefix length `k`, in `[1, m_i]`.
    pub len: usize,
    /// Original type indices of the members, in ranking order.
    pub members: Vec<usize>,
    /// Cumulative buyer share of the members.
    pub cum_p: f64,
    /// Cumulative audience share of the members.
    pub cum_q: f64,
    /// `cum_p / cum_q`.
    pub lift: f64,
}

/// All `m_i` nested prefixes of one feature.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateFamily {
    pub feature_index: usize,
    /// Permutation of the original type indices, best ratio first.
    pub ranking: Vec<usize>,
    /// Prefixes for `k = 1..=m_i`, in order.
    pub candidates: Vec<PrefixCandidate>,
}

impl CandidateFamily {
    /// Number of types of the underlying feature.
    pub fn type_count(&self) -> usize {
        self.candidates.len()
    }

    /// The full-feature prefix (`k = m_i`): lift exactly 1 once validated.
    pub fn full(&self) -> &PrefixCandidate {
        self.candidates.last().expect("family is never empty")
    }

    /// The shortest prefix with `cum_q >= l_floor`; this is the greedy
    /// optimum for the single-feature subproblem. Falls back to the full
    /// prefix, which always covers any `l_floor <= 1`.
    pub fn shortest_covering(&self, l_floor: f64) -> &PrefixCandidate {
        self.candidates
            .iter()
            .find(|c| c.cum_q >= l_floor)
            .unwrap_or_else(|| self.full())
    }
}

/// Orders type indices by non-increasing ratio `p/q`.
///
/// Ties keep the original input order; types with `p = q = 0` carry ratio 0
/// by convention and land after everything else (they never change a
/// cumulative sum). Expects a validated feature, so `p > 0, q = 0` does not
/// occur.
pub fn rank_types(feature: &FeatureStats) -> Vec<usize> {
    let ratio = |i: usize| -> f64 {
        let t = &feature.types[i];
        if t.q > 0.0 {
            t.p / t.q
        } else if t.p > 0.0 {
            f64::INFINITY
        } else {
            0.0
        }
    };
    let degenerate = |i: usize| {
        let t = &feature.types[i];
        t.p == 0.0 && t.q == 0.0
    };
    let mut order: Vec<usize> = (0..feature.types.len()).collect();
    order.sort_by(|&a, &b| {
        ratio(b)
            .partial_cmp(&ratio(a))
            .expect("ratios are never NaN")
            .then(degenerate(a).cmp(&degenerate(b)))
            .then(a.cmp(&b))
    });
    order
}

/// Builds the nested prefix family of a validated feature.
pub fn build_family(feature: &FeatureStats, feature_index: usize) -> CandidateFamily {
    let ranking = rank_types(feature);
    let m = ranking.len();
    let mut candidates = Vec::with_capacity(m);
    let mut cum_p = 0.0;
    let mut cum_q = 0.0;
    for (k, &type_index) in ranking.iter().enumerate() {
        cum_p += feature.types[type_index].p;
        cum_q += feature.types[type_index].q;
        let (mut prefix_p, mut prefix_q) = (cum_p, cum_q);
        if k + 1 == m {
            // MECE: the full prefix covers everyone. Absorb rounding so the
            // knapsack's zero item is exactly (0, 0).
            if (prefix_p - 1.0).abs() <= SNAP_EPS {
                prefix_p = 1.0;
            }
            if (prefix_q - 1.0).abs() <= SNAP_EPS {
                prefix_q = 1.0;
            }
        }
        let raw_lift = prefix_p / prefix_q;
        let lift = if raw_lift < 1.0 && raw_lift > 1.0 - SNAP_EPS {
            1.0
        } else {
            raw_lift
        };
        candidates.push(PrefixCandidate {
            feature_index,
            len: k + 1,
            members: ranking[..=k].to_vec(),
            cum_p: prefix_p,
            cum_q: prefix_q,
            lift,
        });
    }
    CandidateFamily {
        feature_index,
        ranking,
        candidates,
    }
}

/// Greedy single-feature subproblem: the shortest prefix covering `l_floor`.
///
/// `l_floor = 0` yields the `k = 1` prefix; `l_floor = 1` the full prefix.
pub fn greedy_subproblem(feature: &FeatureStats, l_floor: f64) -> PrefixCandidate {
    build_family(feature, 0).shortest_covering(l_floor).clone()
}
