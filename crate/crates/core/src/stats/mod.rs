//! Per-feature audience/customer statistics: the input to the whole pipeline.
//!
//! A [`FeatureStats`] holds one targeting feature with its types and the
//! paired shares `q` (fraction of all audiences of that type) and `p`
//! (fraction of buyers of that type). Types of one feature are assumed
//! mutually exclusive and collectively exhaustive, so both vectors must sum
//! to 1; [`validate`] checks that and hands back a renormalized copy so the
//! downstream math sees exact unit sums.

mod io;
mod synth;

pub use io::{load_csv, load_dataset, load_json, to_csv, to_json, Format, Unit};
pub use synth::{appendix_schema, generate_synthetic};

use crate::error::{Error, Result};

/// One type of a feature with its audience share `q` and buyer share `p`.
#[derive(Debug, Clone, PartialEq)]
pub struct TypeStat {
    pub label: String,
    /// Share of all audiences of this type, in `[0,1]`.
    pub q: f64,
    /// Share of buyers of this type, in `[0,1]`.
    pub p: f64,
}

/// One targeting feature and its types.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureStats {
    pub name: String,
    pub types: Vec<TypeStat>,
}

impl FeatureStats {
    /// Number of types (`m_i`).
    pub fn type_count(&self) -> usize {
        self.types.len()
    }
}

/// A full dataset: the features plus optional economic parameters.
///
/// Shares are always stored as fractions; percent inputs are converted at
/// load time. `None` economic fields simply leave the dependent metrics
/// unreported downstream.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct StatsDataset {
    pub features: Vec<FeatureStats>,
    /// Total number of audiences `N`.
    pub audience_count: Option<u64>,
    /// Base conversion rate `B = P(Buy)`.
    pub buy_rate: Option<f64>,
    /// Unit price of the product.
    pub price: Option<f64>,
    /// Unit production cost.
    pub unit_cost: Option<f64>,
    /// Advertising expenditure budget.
    pub budget: Option<f64>,
}

impl StatsDataset {
    pub fn feature_count(&self) -> usize {
        self.features.len()
    }

    pub fn feature_names(&self) -> impl Iterator<Item = &str> {
        self.features.iter().map(|f| f.name.as_str())
    }

    /// Checks the structural domain invariants that loaders enforce:
    /// non-empty features with unique names, unique type labels, shares in
    /// `[0,1]`, and consistent economic parameters.
    ///
    /// MECE sums are *not* checked here; that is [`validate`]'s job.
    pub fn check_domain(&self) -> Result<()> {
        if self.features.is_empty() {
            return Err(Error::Domain("dataset has no features".into()));
        }
        let mut names = std::collections::HashSet::new();
        for feature in &self.features {
            if !names.insert(feature.name.as_str()) {
                return Err(Error::Domain(format!(
                    "duplicate feature name {:?}",
                    feature.name
                )));
            }
            if feature.types.is_empty() {
                return Err(Error::Domain(format!(
                    "feature {:?} has no types",
                    feature.name
                )));
            }
            let mut labels = std::collections::HashSet::new();
            for t in &feature.types {
                if !labels.insert(t.label.as_str()) {
                    return Err(Error::Domain(format!(
                        "feature {:?}: duplicate type label {:?}",
                        feature.name, t.label
                    )));
                }
                for (value, what) in [(t.q, "q"), (t.p, "p")] {
                    if !(0.0..=1.0).contains(&value) {
                        return Err(Error::Domain(format!(
                            "feature {:?}, type {:?}: {what} = {value} is not a probability in [0,1]",
                            feature.name, t.label
                        )));
                    }
                }
            }
        }
        if let Some(b) = self.buy_rate
            && !(0.0..=1.0).contains(&b)
        {
            return Err(Error::Domain(format!(
                "buy_rate = {b} is not a probability in [0,1]"
            )));
        }
        if self.audience_count == Some(0) {
            return Err(Error::Domain("audience_count must be positive".into()));
        }
        for (value, what) in [
            (self.price, "price"),
            (self.unit_cost, "unit_cost"),
            (self.budget, "budget"),
        ] {
            if let Some(v) = value
                && !(v.is_finite() && v >= 0.0)
            {
                return Err(Error::Domain(format!("{what} = {v} must be >= 0")));
            }
        }
        if let (Some(p), Some(c)) = (self.price, self.unit_cost)
            && p <= c
        {
            return Err(Error::Domain(format!(
                "price ({p}) must exceed unit_cost ({c})"
            )));
        }
        Ok(())
    }
}

/// The kind of MECE violation found by [`validate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    /// The feature's q values do not sum to 1 within tolerance.
    QSum,
    /// The feature's p values do not sum to 1 within tolerance.
    PSum,
    /// A type has buyer share p > 0 but audience share q = 0.
    BuyerWithoutAudience,
}

/// One violation, reported as data rather than as an error.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub feature: String,
    pub kind: ViolationKind,
    pub detail: String,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.feature, self.detail)
    }
}

/// Outcome of [`validate`]: all violations found, plus a renormalized copy
/// of the dataset when there were none.
#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    /// Present iff `violations` is empty: the dataset with every feature's
    /// q and p vectors divided by their observed sums.
    pub normalized: Option<StatsDataset>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Default sum tolerance for real exported data. Platforms display rounded
/// percentages, so printed tables rarely sum to exactly 1.
pub const EPS_NORM_EXPORT: f64 = 1e-3;
/// Strict sum tolerance for synthetic data.
pub const EPS_NORM_SYNTHETIC: f64 = 1e-9;

/// Checks every feature for MECE consistency: both share vectors must sum
/// to 1 within `eps_norm`, and no type may have `p > 0` with `q = 0` (that
/// would make the ratio `p/q` infinite and signals inconsistent exports).
///
/// When everything is within tolerance, the report carries a renormalized
/// copy: each vector divided by its own sum, so no single type is biased.
pub fn validate(dataset: &StatsDataset, eps_norm: f64) -> ValidationReport {
    // Sums that deviate by exactly eps_norm must pass; guard the threshold
    // against summation rounding (a 0.1% deviation vs eps 1e-3 is the
    // common boundary case for percent-rounded exports).
    let threshold = eps_norm * (1.0 + 1e-9);
    let mut violations = Vec::new();
    for feature in &dataset.features {
        let q_sum: f64 = feature.types.iter().map(|t| t.q).sum();
        let p_sum: f64 = feature.types.iter().map(|t| t.p).sum();
        if (q_sum - 1.0).abs() > threshold {
            violations.push(Violation {
                feature: feature.name.clone(),
                kind: ViolationKind::QSum,
                detail: format!("q-sum = {q_sum} deviates from 1 by more than {eps_norm}"),
            });
        }
        if (p_sum - 1.0).abs() > threshold {
            violations.push(Violation {
                feature: feature.name.clone(),
                kind: ViolationKind::PSum,
                detail: format!("p-sum = {p_sum} deviates from 1 by more than {eps_norm}"),
            });
        }
        for t in &feature.types {
            if t.p > 0.0 && t.q == 0.0 {
                violations.push(Violation {
                    feature: feature.name.clone(),
                    kind: ViolationKind::BuyerWithoutAudience,
                    detail: format!(
                        "type {:?} is a buyer type with zero audience share (p = {}, q = 0)",
                        t.label, t.p
                    ),
                });
            }
        }
    }

    let normalized = violations.is_empty().then(|| {
        let mut copy = dataset.clone();
        for feature in &mut copy.features {
            let q_sum: f64 = feature.types.iter().map(|t| t.q).sum();
            let p_sum: f64 = feature.types.iter().map(|t| t.p).sum();
            for t in &mut feature.types {
                t.q /= q_sum;
                t.p /= p_sum;
            }
        }
        copy
    });

    ValidationReport {
        violations,
        normalized,
    }
}
