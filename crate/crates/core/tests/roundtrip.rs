//! Serialization round-trip properties over generated datasets.

use adtarget::stats::{
    load_csv, load_json, to_csv, to_json, validate, FeatureStats, StatsDataset, TypeStat, Unit,
};
use proptest::prelude::*;

/// Labels and names are CSV-exercising (commas, quotes, inner spaces) but
/// keep alphanumeric edges: the CSV reader trims edge whitespace.
fn word() -> impl Strategy<Value = String> {
    proptest::string::string_regex("[a-z0-9]([a-z0-9 ,\"_.-]{0,6}[a-z0-9])?").unwrap()
}

fn dataset() -> impl Strategy<Value = StatsDataset> {
    let feature = |index: usize| {
        (word(), proptest::collection::vec((0.0..=1.0f64, 0.0..=1.0f64), 1..7)).prop_map(
            move |(suffix, shares)| FeatureStats {
                name: format!("f{index}_{suffix}"),
                types: shares
                    .into_iter()
                    .enumerate()
                    .map(|(j, (q, p))| TypeStat {
                        label: format!("t{j}_"),
                        q,
                        p,
                    })
                    .collect(),
            },
        )
    };
    (1usize..5)
        .prop_flat_map(move |n| {
            let features: Vec<_> = (0..n).map(feature).collect();
            (
                features,
                proptest::option::of(0.0..=1.0f64),
                proptest::option::of(1u64..1_000_000_000),
                proptest::option::of((0.0..100.0f64, 0.001..50.0f64)),
                proptest::option::of(0.0..1e6f64),
            )
        })
        .prop_map(|(features, buy_rate, audience_count, pricing, budget)| {
            let (price, unit_cost) = match pricing {
                Some((cost, margin)) => (Some(cost + margin), Some(cost)),
                None => (None, None),
            };
            StatsDataset {
                features,
                audience_count,
                buy_rate,
                price,
                unit_cost,
                budget,
            }
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn json_round_trip_is_identity(ds in dataset()) {
        let reloaded = load_json(to_json(&ds).as_bytes()).unwrap();
        prop_assert_eq!(ds, reloaded);
    }

    #[test]
    fn csv_round_trip_is_identity_on_features(ds in dataset()) {
        // CSV carries no dataset-level fields, so compare the features.
        let reloaded = load_csv(to_csv(&ds).as_bytes(), Unit::Fraction).unwrap();
        prop_assert_eq!(ds.features, reloaded.features);
    }

    #[test]
    fn renormalization_is_exact(ds in dataset()) {
        // Whatever the raw sums, a renormalized copy (when one is granted
        // and every sum is positive) passes strict validation.
        let report = validate(&ds, f64::INFINITY);
        let has_zero_sum = ds.features.iter().any(|f| {
            f.types.iter().map(|t| t.q).sum::<f64>() == 0.0
                || f.types.iter().map(|t| t.p).sum::<f64>() == 0.0
        });
        if let Some(normalized) = report.normalized
            && !has_zero_sum
        {
            let strict = validate(&normalized, 1e-9);
            prop_assert!(strict.is_valid(), "{:?}", strict.violations);
        }
    }
}
