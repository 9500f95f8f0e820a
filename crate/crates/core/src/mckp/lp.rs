//! LP relaxation of the multiple-choice knapsack.
//!
//! The continuous relaxation is solved by the standard greedy: start every
//! class at its minimum-weight point (the zero item), list the incremental
//! moves along each class's upper convex hull, and apply them globally in
//! order of decreasing efficiency `Δvalue / Δweight` until the capacity is
//! exhausted, splitting at most one move fractionally. Hull slopes are
//! strictly decreasing within a class, so the global order never applies a
//! move before its predecessor.

use super::{MckpInstance, MckpItem};

/// One vertex of a class's upper convex hull.
#[derive(Debug, Clone)]
pub(crate) struct HullPoint {
    /// Index of the backing item within its class.
    pub item: usize,
    pub weight: f64,
    pub value: f64,
}

/// Upper convex hull of one class, min-weight point first; weights, values,
/// and slopes are strictly monotone along `points`.
#[derive(Debug, Clone)]
pub(crate) struct ClassHull {
    pub points: Vec<HullPoint>,
}

/// An incremental move from hull point `to_point - 1` to `to_point`.
#[derive(Debug, Clone)]
pub(crate) struct HullMove {
    pub class: usize,
    pub to_point: usize,
    pub dw: f64,
    pub dv: f64,
    pub efficiency: f64,
}

/// Computes the upper convex hull of a class, in any input order.
pub(crate) fn class_hull(class: &[MckpItem]) -> ClassHull {
    let mut order: Vec<usize> = (0..class.len()).collect();
    order.sort_by(|&a, &b| {
        class[a]
            .weight
            .partial_cmp(&class[b].weight)
            .expect("weights are never NaN")
            .then(
                class[b]
                    .value
                    .partial_cmp(&class[a].value)
                    .expect("values are never NaN"),
            )
            .then(class[b].prefix_len.cmp(&class[a].prefix_len))
    });
    let mut points: Vec<HullPoint> = Vec::new();
    for index in order {
        let item = &class[index];
        if let Some(last) = points.last() {
            // Pareto filter: equal weights keep the first (highest value);
            // a point no more valuable than the staircase top is interior.
            if item.weight == last.weight || item.value <= last.value {
                continue;
            }
        }
        while points.len() >= 2 {
            let below = &points[points.len() - 2];
            let top = &points[points.len() - 1];
            let slope_kept = (top.value - below.value) / (top.weight - below.weight);
            let slope_new = (item.value - below.value) / (item.weight - below.weight);
            if slope_new >= slope_kept {
                points.pop();
            } else {
                break;
            }
        }
        points.push(HullPoint {
            item: index,
            weight: item.weight,
            value: item.value,
        });
    }
    ClassHull { points }
}

/// Hull membership per item index of a class (for [`super::prune`]'s marks).
pub(crate) fn hull_flags(class: &[MckpItem]) -> Vec<(usize, bool)> {
    let hull = class_hull(class);
    let mut flags = vec![false; class.len()];
    for point in &hull.points {
        flags[point.item] = true;
    }
    flags.into_iter().enumerate().collect()
}

/// All hull moves, sorted by decreasing efficiency; ties resolve by class
/// then position so the order is total.
pub(crate) fn sorted_moves(hulls: &[ClassHull]) -> Vec<HullMove> {
    let mut moves = Vec::new();
    for (class, hull) in hulls.iter().enumerate() {
        for to_point in 1..hull.points.len() {
            let dw = hull.points[to_point].weight - hull.points[to_point - 1].weight;
            let dv = hull.points[to_point].value - hull.points[to_point - 1].value;
            moves.push(HullMove {
                class,
                to_point,
                dw,
                dv,
                efficiency: dv / dw,
            });
        }
    }
    moves.sort_by(|a, b| {
        b.efficiency
            .partial_cmp(&a.efficiency)
            .expect("efficiencies are never NaN")
            .then(a.class.cmp(&b.class))
            .then(a.to_point.cmp(&b.to_point))
    });
    moves
}

/// Raw LP outcome over the classes marked free.
#[derive(Debug, Clone)]
pub(crate) struct LpOutcome {
    pub bound: f64,
    /// Hull point position per free class (fixed classes stay at 0).
    pub positions: Vec<usize>,
    pub split: Option<LpSplit>,
}

#[derive(Debug, Clone)]
pub(crate) struct LpSplit {
    pub class: usize,
    pub lower_point: usize,
    pub upper_point: usize,
    pub upper_fraction: f64,
}

/// Greedy LP over the free classes with the given remaining capacity.
pub(crate) fn lp_over(
    hulls: &[ClassHull],
    moves: &[HullMove],
    free: &[bool],
    capacity: f64,
) -> LpOutcome {
    let mut positions = vec![0usize; hulls.len()];
    let mut bound = 0.0;
    let mut used = 0.0;
    for (class, hull) in hulls.iter().enumerate() {
        if free[class] {
            bound += hull.points[0].value;
            used += hull.points[0].weight;
        }
    }
    if used > capacity {
        // Unreachable for instances whose classes hold their zero items.
        return LpOutcome {
            bound: f64::NEG_INFINITY,
            positions,
            split: None,
        };
    }
    let mut split = None;
    for mv in moves {
        if !free[mv.class] {
            continue;
        }
        let remaining = capacity - used;
        if remaining <= 0.0 {
            break;
        }
        if mv.dw <= remaining {
            used += mv.dw;
            bound += mv.dv;
            positions[mv.class] = mv.to_point;
        } else {
            let upper_fraction = remaining / mv.dw;
            bound += upper_fraction * mv.dv;
            split = Some(LpSplit {
                class: mv.class,
                lower_point: mv.to_point - 1,
                upper_point: mv.to_point,
                upper_fraction,
            });
            break;
        }
    }
    LpOutcome {
        bound,
        positions,
        split,
    }
}

/// Per-class outcome of the LP relaxation.
#[derive(Debug, Clone, PartialEq)]
pub enum LpChoice {
    /// The class sits integrally on one item.
    Integral { item: usize },
    /// The class splits between two items: `upper_fraction` of `upper`,
    /// the rest on `lower`. At most one class per solution splits.
    Split {
        lower: usize,
        upper: usize,
        upper_fraction: f64,
    },
}

/// Optimum of the continuous relaxation.
#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    /// Upper bound on every integer-feasible objective.
    pub bound: f64,
    /// One choice per class.
    pub choices: Vec<LpChoice>,
}

/// Solves the LP relaxation of a (pruned) instance.
pub fn solve_lp(instance: &MckpInstance) -> LpSolution {
    let hulls: Vec<ClassHull> = instance.classes.iter().map(|c| class_hull(c)).collect();
    let moves = sorted_moves(&hulls);
    let free = vec![true; instance.classes.len()];
    let outcome = lp_over(&hulls, &moves, &free, instance.capacity);
    let choices = hulls
        .iter()
        .enumerate()
        .map(|(class, hull)| match &outcome.split {
            Some(split) if split.class == class => LpChoice::Split {
                lower: hull.points[split.lower_point].item,
                upper: hull.points[split.upper_point].item,
                upper_fraction: split.upper_fraction,
            },
            _ => LpChoice::Integral {
                item: hull.points[outcome.positions[class]].item,
            },
        })
        .collect();
    LpSolution {
        bound: outcome.bound,
        choices,
    }
}
