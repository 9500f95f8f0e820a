//! Exact depth-first branch-and-bound.
//!
//! The LP relaxation leaves at most one class fractional. Branching fixes
//! that class to each of its items in turn (descending value), and every
//! child is bounded by the residual LP over the still-free classes. The
//! rounded-down root LP — fractional class dropped to its zero item —
//! seeds the incumbent. Node order is fully deterministic, so identical
//! instances always return identical selections.

use super::lp::{class_hull, lp_over, sorted_moves, ClassHull, HullMove};
use super::{MckpInstance, MckpSolution, BOUND_EPS};

/// Solves the instance to proven optimality.
pub fn solve_exact(instance: &MckpInstance) -> MckpSolution {
    let class_count = instance.classes.len();
    let hulls: Vec<ClassHull> = instance.classes.iter().map(|c| class_hull(c)).collect();
    let moves = sorted_moves(&hulls);

    let all_free = vec![true; class_count];
    let root = lp_over(&hulls, &moves, &all_free, instance.capacity);

    let Some(root_split) = &root.split else {
        // Integral relaxation: already optimal.
        let chosen = items_at(&hulls, &root.positions);
        return MckpSolution::from_selection(instance, chosen, root.bound);
    };

    let mut incumbent = items_at(&hulls, &root.positions);
    incumbent[root_split.class] = hulls[root_split.class].points[0].item;
    let incumbent_obj = objective_of(instance, &incumbent);

    // Branch order within a class: best value first, then lighter weight,
    // then longer prefix.
    let branch_order: Vec<Vec<usize>> = instance
        .classes
        .iter()
        .map(|class| {
            let mut order: Vec<usize> = (0..class.len()).collect();
            order.sort_by(|&a, &b| {
                class[b]
                    .value
                    .partial_cmp(&class[a].value)
                    .expect("values are never NaN")
                    .then(
                        class[a]
                            .weight
                            .partial_cmp(&class[b].weight)
                            .expect("weights are never NaN"),
                    )
                    .then(class[b].prefix_len.cmp(&class[a].prefix_len))
            });
            order
        })
        .collect();

    let mut search = Search {
        instance,
        hulls: &hulls,
        moves: &moves,
        branch_order: &branch_order,
        free: all_free,
        fixed_items: vec![0; class_count],
        incumbent,
        incumbent_obj,
    };
    search.dfs(0.0, 0.0);

    MckpSolution::from_selection(instance, search.incumbent, root.bound)
}

struct Search<'a> {
    instance: &'a MckpInstance,
    hulls: &'a [ClassHull],
    moves: &'a [HullMove],
    branch_order: &'a [Vec<usize>],
    free: Vec<bool>,
    fixed_items: Vec<usize>,
    incumbent: Vec<usize>,
    incumbent_obj: f64,
}

impl Search<'_> {
    fn dfs(&mut self, used_weight: f64, fixed_value: f64) {
        let lp = lp_over(
            self.hulls,
            self.moves,
            &self.free,
            self.instance.capacity - used_weight,
        );
        if fixed_value + lp.bound <= self.incumbent_obj + BOUND_EPS {
            return;
        }
        let Some(split) = lp.split else {
            // Integral completion of the free classes.
            let mut selection = self.fixed_items.clone();
            for (class, position) in lp.positions.iter().enumerate() {
                if self.free[class] {
                    selection[class] = self.hulls[class].points[*position].item;
                }
            }
            let objective = objective_of(self.instance, &selection);
            if objective > self.incumbent_obj {
                self.incumbent_obj = objective;
                self.incumbent = selection;
            }
            return;
        };

        let class = split.class;
        self.free[class] = false;
        for &item_index in &self.branch_order[class] {
            let item = &self.instance.classes[class][item_index];
            if used_weight + item.weight <= self.instance.capacity {
                self.fixed_items[class] = item_index;
                self.dfs(used_weight + item.weight, fixed_value + item.value);
            }
        }
        self.free[class] = true;
    }
}

fn items_at(hulls: &[ClassHull], positions: &[usize]) -> Vec<usize> {
    hulls
        .iter()
        .zip(positions)
        .map(|(hull, &position)| hull.points[position].item)
        .collect()
}

fn objective_of(instance: &MckpInstance, selection: &[usize]) -> f64 {
    instance
        .classes
        .iter()
        .zip(selection)
        .map(|(class, &item)| class[item].value)
        .sum()
}
