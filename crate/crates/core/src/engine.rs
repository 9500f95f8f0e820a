//! End-to-end strategy pipeline: dataset → candidate families → knapsack →
//! optimal strategy, plus coverage sweeps, profit metrics, and
//! correlated-feature reports.
//!
//! All entry points expect a *validated* dataset — the renormalized copy
//! returned by [`crate::stats::validate`] — so that per-feature shares sum
//! to exactly 1.

use std::collections::HashSet;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mckp::{build_instance, fast_path, prune, solve_exact};
use crate::prefix::{build_family, CandidateFamily};
use crate::stats::StatsDataset;

/// What one feature contributes to a strategy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSelection {
    pub feature: String,
    /// A feature is active when its selected set is a strict subset of its
    /// types; an inactive feature accepts everyone.
    pub active: bool,
    /// Prefix length `k` of the selection.
    pub prefix_len: usize,
    /// Total number of types `m_i`.
    pub type_count: usize,
    /// Labels of the selected types, best ratio first.
    pub selected: Vec<String>,
    pub cum_p: f64,
    pub cum_q: f64,
    pub lift: f64,
}

/// Economic metrics; fields stay `None` when their inputs are absent, in
/// which case the result is only known in units of the base rate `B`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Metrics {
    /// `lift · B`: conversion probability inside the target group.
    pub conditional_buy_prob: Option<f64>,
    /// `N · B · lift · coverage`: expected number of sales.
    pub expected_sales: Option<f64>,
    /// `expected_sales · (price − unit_cost) − budget`.
    pub profit: Option<f64>,
    /// Model-consistency warnings; never fatal.
    pub warnings: Vec<String>,
}

/// One optimized targeting strategy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Strategy {
    /// The coverage floor `L` this strategy was optimized for.
    pub l_floor: f64,
    /// `Π` of the per-feature lifts; the factor applied to the base rate.
    pub lift: f64,
    /// `Π cum_q`: probability that a random audience member matches.
    pub coverage: f64,
    /// Solver objective, `log(lift)` up to rounding.
    pub log_lift: f64,
    pub selections: Vec<FeatureSelection>,
    pub metrics: Metrics,
}

impl Strategy {
    pub fn active_count(&self) -> usize {
        self.selections.iter().filter(|s| s.active).count()
    }

    /// `"0"`/`"1"` per feature, dataset order.
    pub fn active_mask(&self) -> String {
        self.selections
            .iter()
            .map(|s| if s.active { '1' } else { '0' })
            .collect()
    }
}

/// Count of sweep points where a feature is active.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyEntry {
    pub feature: String,
    pub count: usize,
}

/// Strategies and metrics across a grid of coverage floors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub grid: Vec<f64>,
    pub points: Vec<Strategy>,
    pub frequency: Vec<FrequencyEntry>,
}

/// Assessment of one user-declared correlated-feature group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupReport {
    pub group: Vec<String>,
    /// Members simultaneously active with another member at some point:
    /// the independence assumption is at risk for these.
    pub co_active: Vec<String>,
    pub violation: bool,
    /// When violated: the member with the highest active frequency.
    pub keep: Option<String>,
    /// When violated: the remaining members, recommended for exclusion.
    pub exclude: Vec<String>,
}

/// The default sweep grid: `n` evenly spaced floors on `[0, 1]` inclusive.
pub fn default_grid(n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..n).map(|j| j as f64 / (n - 1) as f64).collect(),
    }
}

/// Computes the optimal strategy for one coverage floor.
///
/// Excluded features are forced inactive (full prefix, lift 1, coverage
/// factor 1), which is equivalent to removing them from the model.
pub fn optimize(dataset: &StatsDataset, l_floor: f64, exclusions: &[String]) -> Result<Strategy> {
    let families = build_families(dataset);
    let excluded = resolve_exclusions(dataset, exclusions)?;
    optimize_point(dataset, &families, l_floor, &excluded)
}

fn build_families(dataset: &StatsDataset) -> Vec<CandidateFamily> {
    dataset
        .features
        .iter()
        .enumerate()
        .map(|(index, feature)| build_family(feature, index))
        .collect()
}

fn resolve_exclusions(dataset: &StatsDataset, exclusions: &[String]) -> Result<HashSet<usize>> {
    exclusions
        .iter()
        .map(|name| {
            dataset
                .features
                .iter()
                .position(|f| &f.name == name)
                .ok_or_else(|| Error::Domain(format!("unknown feature in exclusions: {name:?}")))
        })
        .collect()
}

fn optimize_point(
    dataset: &StatsDataset,
    families: &[CandidateFamily],
    l_floor: f64,
    excluded: &HashSet<usize>,
) -> Result<Strategy> {
    let mut instance = build_instance(families, l_floor, dataset.buy_rate)?;
    for &class in excluded {
        let full_len = families[class].type_count();
        instance.classes[class].retain(|item| item.prefix_len == full_len);
    }
    let instance = prune(&instance);
    let solution = fast_path(&instance).unwrap_or_else(|| solve_exact(&instance));

    let mut coverage = 1.0;
    let mut lift = 1.0;
    let selections = solution
        .items(&instance)
        .iter()
        .map(|item| {
            let candidate = instance.candidate(item);
            let feature = &dataset.features[item.class_index];
            coverage *= candidate.cum_q;
            lift *= candidate.lift;
            FeatureSelection {
                feature: feature.name.clone(),
                active: candidate.len < feature.type_count(),
                prefix_len: candidate.len,
                type_count: feature.type_count(),
                selected: candidate
                    .members
                    .iter()
                    .map(|&t| feature.types[t].label.clone())
                    .collect(),
                cum_p: candidate.cum_p,
                cum_q: candidate.cum_q,
                lift: candidate.lift,
            }
        })
        .collect();

    Ok(Strategy {
        l_floor,
        lift,
        coverage,
        log_lift: solution.objective,
        selections,
        metrics: Metrics::default(),
    })
}

/// Fills in the economic metrics that the dataset's parameters allow.
///
/// A `lift · B > 1` is reported as a warning — the independence assumptions
/// produced an impossible probability — but the metrics are still filled.
pub fn evaluate(strategy: &Strategy, dataset: &StatsDataset) -> Strategy {
    let mut out = strategy.clone();
    let mut metrics = Metrics::default();
    if let Some(b) = dataset.buy_rate {
        let conditional = strategy.lift * b;
        if conditional > 1.0 {
            metrics.warnings.push(format!(
                "conditional buy probability {conditional} exceeds 1; the independence \
                 assumptions are inconsistent for this dataset"
            ));
        }
        metrics.conditional_buy_prob = Some(conditional);
        if let Some(n) = dataset.audience_count {
            let sales = n as f64 * b * strategy.lift * strategy.coverage;
            metrics.expected_sales = Some(sales);
            if let (Some(price), Some(cost), Some(budget)) =
                (dataset.price, dataset.unit_cost, dataset.budget)
            {
                metrics.profit = Some(sales * (price - cost) - budget);
            }
        }
    }
    out.metrics = metrics;
    out
}

/// Runs [`optimize`] and [`evaluate`] at every grid point. Points are
/// independent; `jobs > 1` fans them out to a thread pool, with results
/// merged in grid order either way.
pub fn sweep(
    dataset: &StatsDataset,
    grid: &[f64],
    exclusions: &[String],
    jobs: usize,
) -> Result<SweepResult> {
    for &l_floor in grid {
        if !(0.0..=1.0).contains(&l_floor) {
            return Err(Error::Domain(format!("L = {l_floor} must lie in [0,1]")));
        }
    }
    let families = build_families(dataset);
    let excluded = resolve_exclusions(dataset, exclusions)?;
    let point = |l_floor: f64| -> Result<Strategy> {
        let strategy = optimize_point(dataset, &families, l_floor, &excluded)?;
        Ok(evaluate(&strategy, dataset))
    };

    let points: Vec<Strategy> = if jobs <= 1 || grid.len() <= 1 {
        grid.iter().map(|&l| point(l)).collect::<Result<_>>()?
    } else {
        let next = AtomicUsize::new(0);
        let collected: Mutex<Vec<(usize, Result<Strategy>)>> =
            Mutex::new(Vec::with_capacity(grid.len()));
        std::thread::scope(|scope| {
            for _ in 0..jobs.min(grid.len()) {
                scope.spawn(|| loop {
                    let index = next.fetch_add(1, Ordering::Relaxed);
                    if index >= grid.len() {
                        break;
                    }
                    let result = point(grid[index]);
                    collected.lock().unwrap().push((index, result));
                });
            }
        });
        let mut indexed = collected.into_inner().unwrap();
        indexed.sort_by_key(|(index, _)| *index);
        indexed
            .into_iter()
            .map(|(_, result)| result)
            .collect::<Result<_>>()?
    };

    let frequency = dataset
        .features
        .iter()
        .enumerate()
        .map(|(index, feature)| FrequencyEntry {
            feature: feature.name.clone(),
            count: points
                .iter()
                .filter(|strategy| strategy.selections[index].active)
                .count(),
        })
        .collect();

    Ok(SweepResult {
        grid: grid.to_vec(),
        points,
        frequency,
    })
}

/// Checks user-declared correlated groups against a sweep: members that
/// are simultaneously active at any point risk violating the feature
/// independence assumption. The recommendation mirrors the manual
/// refinement: keep the member most frequently active, exclude the rest.
pub fn correlation_report(sweep: &SweepResult, groups: &[Vec<String>]) -> Result<Vec<GroupReport>> {
    let feature_order: Vec<&str> = sweep
        .frequency
        .iter()
        .map(|entry| entry.feature.as_str())
        .collect();
    groups
        .iter()
        .map(|group| {
            for name in group {
                if !feature_order.contains(&name.as_str()) {
                    return Err(Error::Domain(format!(
                        "unknown feature in correlation group: {name:?}"
                    )));
                }
            }
            if group.len() < 2 {
                return Ok(GroupReport {
                    group: group.clone(),
                    co_active: Vec::new(),
                    violation: false,
                    keep: None,
                    exclude: Vec::new(),
                });
            }
            let mut co_active_set: HashSet<&str> = HashSet::new();
            for strategy in &sweep.points {
                let active_members: Vec<&str> = strategy
                    .selections
                    .iter()
                    .filter(|s| s.active && group.contains(&s.feature))
                    .map(|s| s.feature.as_str())
                    .collect();
                if active_members.len() >= 2 {
                    co_active_set.extend(active_members);
                }
            }
            let co_active: Vec<String> = feature_order
                .iter()
                .filter(|name| co_active_set.contains(**name))
                .map(|name| name.to_string())
                .collect();
            let violation = !co_active.is_empty();
            let (keep, exclude) = if violation {
                let keep = sweep
                    .frequency
                    .iter()
                    .filter(|entry| group.contains(&entry.feature))
                    .max_by(|a, b| a.count.cmp(&b.count))
                    .map(|entry| entry.feature.clone())
                    .expect("group is non-empty");
                let exclude = feature_order
                    .iter()
                    .filter(|name| group.iter().any(|g| g == **name) && **name != keep)
                    .map(|name| name.to_string())
                    .collect();
                (Some(keep), exclude)
            } else {
                (None, Vec::new())
            };
            Ok(GroupReport {
                group: group.clone(),
                co_active,
                violation,
                keep,
                exclude,
            })
        })
        .collect()
}

fn push_strategy_row(writer: &mut csv::Writer<Vec<u8>>, strategy: &Strategy) {
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    writer
        .write_record([
            strategy.l_floor.to_string(),
            strategy.lift.to_string(),
            strategy.coverage.to_string(),
            strategy.log_lift.to_string(),
            strategy.active_count().to_string(),
            strategy.active_mask(),
            opt(strategy.metrics.conditional_buy_prob),
            opt(strategy.metrics.expected_sales),
            opt(strategy.metrics.profit),
        ])
        .expect("csv row");
}

const STRATEGY_CSV_HEADER: [&str; 9] = [
    "l_floor",
    "lift",
    "coverage",
    "log_lift",
    "active_count",
    "active_mask",
    "conditional_buy_prob",
    "expected_sales",
    "profit",
];

/// One-row CSV rendering of a strategy.
pub fn strategy_csv(strategy: &Strategy) -> String {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(STRATEGY_CSV_HEADER).expect("csv header");
    push_strategy_row(&mut writer, strategy);
    finish_csv(writer)
}

/// One row per sweep point.
pub fn sweep_csv(sweep: &SweepResult) -> String {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(STRATEGY_CSV_HEADER).expect("csv header");
    for strategy in &sweep.points {
        push_strategy_row(&mut writer, strategy);
    }
    finish_csv(writer)
}

/// Plot-ready activity matrix: rows = features, columns = grid floors,
/// cells 0/1.
pub fn active_matrix_csv(sweep: &SweepResult) -> String {
    let mut writer = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["feature".to_string()];
    header.extend(sweep.grid.iter().map(|l| l.to_string()));
    writer.write_record(&header).expect("csv header");
    for (index, entry) in sweep.frequency.iter().enumerate() {
        let mut row = vec![entry.feature.clone()];
        row.extend(sweep.points.iter().map(|strategy| {
            if strategy.selections[index].active {
                "1".to_string()
            } else {
                "0".to_string()
            }
        }));
        writer.write_record(&row).expect("csv row");
    }
    finish_csv(writer)
}

fn finish_csv(writer: csv::Writer<Vec<u8>>) -> String {
    String::from_utf8(writer.into_inner().expect("csv flush")).expect("csv utf8")
}
