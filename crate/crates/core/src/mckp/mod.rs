//! Log-space multiple-choice knapsack over prefix candidate families.
//!
//! Taking logarithms turns the product objective `Π lift` and the coverage
//! constraint `Π cum_q >= L` into a knapsack: item `(i, k)` has value
//! `log(lift_ik)` and weight `-log(cum_q_ik)`, the capacity is `-log L`,
//! and exactly one item per class (feature) is chosen. Every class
//! contains its zero item — the full prefix, value 0 and weight 0 — so
//! choosing "one per class" also covers leaving a feature inactive, and
//! the instance is always feasible.
//!
//! Solving is the classic hybrid: a greedy over convex-hull increments
//! yields the LP relaxation bound, which drives a depth-first
//! branch-and-bound to the exact optimum. [`fast_path`] short-circuits the
//! search when the unconstrained maximum (all top prefixes) already meets
//! the coverage floor.

mod bb;
mod lp;

pub use bb::solve_exact;
pub use lp::{solve_lp, LpChoice, LpSolution};

use crate::error::{Error, Result};
use crate::prefix::{CandidateFamily, PrefixCandidate};

/// Tolerance for bound pruning: a node survives only if its LP bound
/// exceeds the incumbent by more than this.
pub(crate) const BOUND_EPS: f64 = 1e-9;

/// One selectable item: a prefix of one feature, in log space.
#[derive(Debug, Clone, PartialEq)]
pub struct MckpItem {
    /// Class (= feature) this item belongs to.
    pub class_index: usize,
    /// Prefix length `k`; identifies the candidate within its family.
    pub prefix_len: usize,
    /// `log(lift)`, non-negative for validated families.
    pub value: f64,
    /// `-log(cum_q)`, non-negative; zero exactly for the full prefix.
    pub weight: f64,
    /// Set by [`prune`]: whether the item lies on the upper convex hull of
    /// its class. Only hull items contribute LP slopes; off-hull items are
    /// still branch candidates for the exact search.
    pub on_lp_hull: bool,
}

/// A full instance: one class per feature plus the capacity `-log L`.
#[derive(Debug, Clone, PartialEq)]
pub struct MckpInstance {
    pub classes: Vec<Vec<MckpItem>>,
    /// `-log L`; `f64::INFINITY` encodes `L = 0` (no constraint).
    pub capacity: f64,
    /// `log B`, carried for reporting only; never enters the objective.
    pub beta: Option<f64>,
    /// Back-map: `candidates[i][k - 1]` is the prefix behind item `(i, k)`.
    pub candidates: Vec<Vec<PrefixCandidate>>,
    /// Whether [`prune`] has run.
    pub pruned: bool,
}

impl MckpInstance {
    /// The prefix candidate behind an item.
    pub fn candidate(&self, item: &MckpItem) -> &PrefixCandidate {
        &self.candidates[item.class_index][item.prefix_len - 1]
    }

    /// Debug dump: classes as arrays of `{k, value, weight}` plus the
    /// capacity, every number with 17 significant digits so the dump
    /// round-trips exactly. An unconstrained instance dumps `null`
    /// capacity.
    pub fn dump_json(&self) -> String {
        fn num(x: f64) -> String {
            format!("{x:.16e}")
        }
        let mut out = String::from("{\"capacity\": ");
        if self.capacity.is_finite() {
            out.push_str(&num(self.capacity));
        } else {
            out.push_str("null");
        }
        out.push_str(", \"classes\": [");
        for (ci, class) in self.classes.iter().enumerate() {
            if ci > 0 {
                out.push_str(", ");
            }
            out.push('[');
            for (ii, item) in class.iter().enumerate() {
                if ii > 0 {
                    out.push_str(", ");
                }
                out.push_str(&format!(
                    "{{\"k\": {}, \"value\": {}, \"weight\": {}}}",
                    item.prefix_len,
                    num(item.value),
                    num(item.weight)
                ));
            }
            out.push(']');
        }
        out.push_str("]}\n");
        out
    }
}

/// A selection of one item per class.
#[derive(Debug, Clone, PartialEq)]
pub struct MckpSolution {
    /// Chosen item index per class, into `instance.classes[i]`.
    pub chosen: Vec<usize>,
    /// Sum of chosen values, in log-lift units (`beta` excluded).
    pub objective: f64,
    /// Sum of chosen weights; `<= capacity`.
    pub total_weight: f64,
    /// Whether the selection is provably optimal.
    pub optimal: bool,
    /// LP relaxation bound of the instance.
    pub lp_bound: f64,
}

impl MckpSolution {
    pub(crate) fn from_selection(
        instance: &MckpInstance,
        chosen: Vec<usize>,
        lp_bound: f64,
    ) -> Self {
        let mut objective = 0.0;
        let mut total_weight = 0.0;
        for (class, &item_index) in instance.classes.iter().zip(&chosen) {
            objective += class[item_index].value;
            total_weight += class[item_index].weight;
        }
        MckpSolution {
            chosen,
            objective,
            total_weight,
            optimal: true,
            lp_bound,
        }
    }

    /// The chosen items themselves.
    pub fn items<'a>(&self, instance: &'a MckpInstance) -> Vec<&'a MckpItem> {
        self.chosen
            .iter()
            .enumerate()
            .map(|(class, &item_index)| &instance.classes[class][item_index])
            .collect()
    }
}

fn log_weight(cum_q: f64) -> f64 {
    let w = -cum_q.ln();
    if w == 0.0 { 0.0 } else { w } // normalize -0.0
}

/// Builds the log-space instance for a coverage floor `l_floor = L`.
///
/// `L = 0` maps to infinite capacity (the constraint is vacuous);
/// `L = 1` to capacity 0, where only full prefixes fit. Families must come
/// from validated features so that every lift is >= 1.
pub fn build_instance(
    families: &[CandidateFamily],
    l_floor: f64,
    buy_rate: Option<f64>,
) -> Result<MckpInstance> {
    if !(0.0..=1.0).contains(&l_floor) {
        return Err(Error::Domain(format!("L = {l_floor} must lie in [0,1]")));
    }
    let capacity = if l_floor == 0.0 {
        f64::INFINITY
    } else {
        log_weight(l_floor)
    };
    let classes = families
        .iter()
        .enumerate()
        .map(|(class_index, family)| {
            family
                .candidates
                .iter()
                .map(|c| MckpItem {
                    class_index,
                    prefix_len: c.len,
                    value: c.lift.ln(),
                    weight: log_weight(c.cum_q),
                    on_lp_hull: false,
                })
                .collect()
        })
        .collect();
    Ok(MckpInstance {
        classes,
        capacity,
        beta: buy_rate.map(f64::ln),
        candidates: families.iter().map(|f| f.candidates.clone()).collect(),
        pruned: false,
    })
}

/// Dominance pruning plus LP-hull marking.
///
/// Within each class, items are sorted by non-decreasing weight and an item
/// is dropped when another item weighs no more and is worth no less
/// (simple dominance). Items of the form `(weight 0, value 0)` are never
/// dropped, so the zero item survives. Dropping a dominated item never
/// changes the exact optimum. Finally every item is flagged with its
/// upper-convex-hull membership; only hull items carry LP slopes.
pub fn prune(instance: &MckpInstance) -> MckpInstance {
    let mut pruned = instance.clone();
    for class in &mut pruned.classes {
        class.sort_by(|a, b| {
            a.weight
                .partial_cmp(&b.weight)
                .expect("weights are never NaN")
                .then(b.value.partial_cmp(&a.value).expect("values are never NaN"))
                .then(b.prefix_len.cmp(&a.prefix_len))
        });
        let mut kept: Vec<MckpItem> = Vec::with_capacity(class.len());
        let mut best_value = f64::NEG_INFINITY;
        for item in class.drain(..) {
            let is_zero_item = item.weight == 0.0 && item.value == 0.0;
            if kept.is_empty() || item.value > best_value || is_zero_item {
                best_value = best_value.max(item.value);
                kept.push(item);
            }
        }
        for (index, on_hull) in lp::hull_flags(&kept) {
            kept[index].on_lp_hull = on_hull;
        }
        *class = kept;
    }
    pruned.pruned = true;
    pruned
}

/// The unconstrained optimum, when feasible: each class at its
/// maximum-value item (the `k = 1` prefix for prefix-built classes). Fires
/// iff the combined weight fits the capacity, i.e. `Π top cum_q >= L`; the
/// result is then trivially optimal.
pub fn fast_path(instance: &MckpInstance) -> Option<MckpSolution> {
    let mut chosen = Vec::with_capacity(instance.classes.len());
    let mut total_weight = 0.0;
    for class in &instance.classes {
        let best = class
            .iter()
            .enumerate()
            .max_by(|(_, a), (_, b)| {
                a.value
                    .partial_cmp(&b.value)
                    .expect("values are never NaN")
                    .then(
                        b.weight
                            .partial_cmp(&a.weight)
                            .expect("weights are never NaN"),
                    )
                    // Full (value, weight) ties resolve to the longer
                    // prefix, so inactive features stay inactive.
                    .then(a.prefix_len.cmp(&b.prefix_len))
            })
            .map(|(index, _)| index)
            .expect("classes are never empty");
        total_weight += class[best].weight;
        chosen.push(best);
    }
    if total_weight <= instance.capacity {
        let solution = MckpSolution::from_selection(instance, chosen, f64::NAN);
        let lp_bound = solution.objective;
        Some(MckpSolution {
            lp_bound,
            ..solution
        })
    } else {
        None
    }
}
