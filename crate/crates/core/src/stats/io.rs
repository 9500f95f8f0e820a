//! Dataset parsing and serialization.
//!
//! Canonical JSON shape:
//!
//! ```json
//! { "unit": "fraction", "buy_rate": null, "audience_count": null,
//!   "price": null, "unit_cost": null, "budget": null,
//!   "features": [ { "name": "gender",
//!     "types": [ { "label": "male", "q": 0.2, "p": 0.4 }, ... ] } ] }
//! ```
//!
//! CSV carries only the feature rows (`feature,label,q,p`); dataset-level
//! fields travel via CLI flags. Shares are stored internally as fractions;
//! a `percent` unit divides q, p, and buy_rate by 100 at load time, and
//! serialization always emits canonical fractions so that parse ∘ serialize
//! is the identity.

use serde::{Deserialize, Serialize};

use super::{FeatureStats, StatsDataset, TypeStat};
use crate::error::{Error, Result};

/// How probability values in an input file are written.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Unit {
    #[default]
    Fraction,
    Percent,
}

impl Unit {
    fn to_fraction(self, value: f64) -> f64 {
        match self {
            Unit::Fraction => value,
            Unit::Percent => value / 100.0,
        }
    }
}

impl std::str::FromStr for Unit {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "fraction" => Ok(Unit::Fraction),
            "percent" => Ok(Unit::Percent),
            other => Err(format!("unknown unit {other:?} (expected fraction|percent)")),
        }
    }
}

/// Input format selector for [`load_dataset`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    /// CSV has no in-file unit flag, so the interpretation rides along.
    Csv(Unit),
}

// On-disk mirror of StatsDataset. Field order here fixes the JSON key order.
#[derive(Serialize, Deserialize)]
struct RawDataset {
    #[serde(default)]
    unit: Unit,
    #[serde(default)]
    buy_rate: Option<f64>,
    #[serde(default)]
    audience_count: Option<u64>,
    #[serde(default)]
    price: Option<f64>,
    #[serde(default)]
    unit_cost: Option<f64>,
    #[serde(default)]
    budget: Option<f64>,
    features: Vec<RawFeature>,
}

#[derive(Serialize, Deserialize)]
struct RawFeature {
    name: String,
    types: Vec<RawType>,
}

#[derive(Serialize, Deserialize)]
struct RawType {
    label: String,
    q: f64,
    p: f64,
}

/// Parses a dataset from `source` under the declared format.
pub fn load_dataset(source: &[u8], format: Format) -> Result<StatsDataset> {
    match format {
        Format::Json => load_json(source),
        Format::Csv(unit) => load_csv(source, unit),
    }
}

/// Parses the canonical JSON dataset format.
pub fn load_json(source: &[u8]) -> Result<StatsDataset> {
    let raw: RawDataset = serde_json::from_slice(source).map_err(|e| {
        let message = format!("line {}, column {}: {}", e.line(), e.column(), e);
        if e.is_syntax() || e.is_eof() {
            Error::Parse {
                format: "json",
                message,
            }
        } else {
            Error::Schema(message)
        }
    })?;
    let unit = raw.unit;
    let dataset = StatsDataset {
        features: raw
            .features
            .into_iter()
            .map(|f| FeatureStats {
                name: f.name,
                types: f
                    .types
                    .into_iter()
                    .map(|t| TypeStat {
                        label: t.label,
                        q: unit.to_fraction(t.q),
                        p: unit.to_fraction(t.p),
                    })
                    .collect(),
            })
            .collect(),
        audience_count: raw.audience_count,
        buy_rate: raw.buy_rate.map(|b| unit.to_fraction(b)),
        price: raw.price,
        unit_cost: raw.unit_cost,
        budget: raw.budget,
    };
    dataset.check_domain()?;
    Ok(dataset)
}

/// Parses the CSV format: header `feature,label,q,p`, one row per type.
/// Rows of one feature must be contiguous; feature order follows first
/// appearance.
pub fn load_csv(source: &[u8], unit: Unit) -> Result<StatsDataset> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(source);
    let headers = reader
        .headers()
        .map_err(|e| Error::Parse {
            format: "csv",
            message: e.to_string(),
        })?
        .clone();
    let col = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Schema(format!("missing column {name:?}")))
    };
    let feature_col = col("feature")?;
    let label_col = col("label")?;
    let q_col = col("q")?;
    let p_col = col("p")?;

    let mut features: Vec<FeatureStats> = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let line = row + 2; // 1-based, after the header
        let record = record.map_err(|e| Error::Parse {
            format: "csv",
            message: format!("line {line}: {e}"),
        })?;
        let field = |idx: usize| -> Result<&str> {
            record.get(idx).ok_or_else(|| Error::Parse {
                format: "csv",
                message: format!("line {line}: too few fields"),
            })
        };
        let number = |idx: usize, name: &str| -> Result<f64> {
            let text = field(idx)?;
            text.parse::<f64>().map_err(|_| Error::Parse {
                format: "csv",
                message: format!("line {line}: invalid {name} value {text:?}"),
            })
        };
        let feature_name = field(feature_col)?.to_string();
        let stat = TypeStat {
            label: field(label_col)?.to_string(),
            q: unit.to_fraction(number(q_col, "q")?),
            p: unit.to_fraction(number(p_col, "p")?),
        };
        match features.last_mut() {
            Some(last) if last.name == feature_name => last.types.push(stat),
            _ => features.push(FeatureStats {
                name: feature_name,
                types: vec![stat],
            }),
        }
    }

    let dataset = StatsDataset {
        features,
        ..Default::default()
    };
    dataset.check_domain()?;
    Ok(dataset)
}

/// Serializes to the canonical JSON format (always fraction units).
pub fn to_json(dataset: &StatsDataset) -> String {
    let raw = RawDataset {
        unit: Unit::Fraction,
        buy_rate: dataset.buy_rate,
        audience_count: dataset.audience_count,
        price: dataset.price,
        unit_cost: dataset.unit_cost,
        budget: dataset.budget,
        features: dataset
            .features
            .iter()
            .map(|f| RawFeature {
                name: f.name.clone(),
                types: f
                    .types
                    .iter()
                    .map(|t| RawType {
                        label: t.label.clone(),
                        q: t.q,
                        p: t.p,
                    })
                    .collect(),
            })
            .collect(),
    };
    let mut out = serde_json::to_string_pretty(&raw).expect("dataset serialization");
    out.push('\n');
    out
}

/// Serializes the feature rows to CSV (fraction units). Dataset-level
/// fields are not representable in CSV and are dropped.
pub fn to_csv(dataset: &StatsDataset) -> String {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer
        .write_record(["feature", "label", "q", "p"])
        .expect("csv header");
    for feature in &dataset.features {
        for t in &feature.types {
            writer
                .write_record([
                    feature.name.as_str(),
                    t.label.as_str(),
                    &t.q.to_string(),
                    &t.p.to_string(),
                ])
                .expect("csv row");
        }
    }
    String::from_utf8(writer.into_inner().expect("csv flush")).expect("csv utf8")
}
