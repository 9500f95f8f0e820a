//! Synthetic dataset generation for demos and tests.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};

use super::{FeatureStats, StatsDataset, TypeStat};
use crate::error::{Error, Result};

/// The 24-feature demo catalog with realistic type counts, spanning
/// consumption behavior, interests, demographics, and behavioral
/// preferences as found on large e-commerce ad platforms.
pub fn appendix_schema() -> Vec<(String, usize)> {
    [
        ("Activity level", 8),
        ("Consumption frequency", 6),
        ("Credit level", 11),
        ("Monthly expenditure", 6),
        ("Purchasing power in sinking market", 6),
        ("Purchasing power level", 7),
        ("Sinking market", 6),
        ("Tmall strategical category", 9),
        ("Characteristic interests", 7),
        ("Content interests", 6),
        ("Feature interests", 42),
        ("Life interests", 28),
        ("Ages", 7),
        ("City", 19),
        ("City level", 7),
        ("Education", 8),
        ("Generation", 6),
        ("Life stage", 8),
        ("Occupation", 9),
        ("Phone type", 10),
        ("Browsing preference", 8),
        ("Frequently used device", 4),
        ("Nutritional product preference", 29),
        ("Shopping preference", 9),
    ]
    .into_iter()
    .map(|(name, count)| (name.to_string(), count))
    .collect()
}

/// Generates a dataset with the given `(feature name, type count)` schema.
///
/// Per feature, q and p are drawn independently from a symmetric
/// Dirichlet(concentration) via gamma normalization, so each vector sums to
/// 1 up to machine rounding and every share is strictly positive. The
/// output is deterministic for a fixed seed.
pub fn generate_synthetic(
    schema: &[(String, usize)],
    seed: u64,
    concentration: f64,
) -> Result<StatsDataset> {
    if schema.is_empty() {
        return Err(Error::Domain("schema has no features".into()));
    }
    if !(concentration > 0.0 && concentration.is_finite()) {
        return Err(Error::Domain(format!(
            "concentration = {concentration} must be a positive finite number"
        )));
    }
    for (name, count) in schema {
        if *count == 0 {
            return Err(Error::Domain(format!(
                "feature {name:?} has type-count 0"
            )));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gamma = Gamma::new(concentration, 1.0)
        .map_err(|e| Error::Domain(format!("invalid concentration: {e}")))?;

    let features = schema
        .iter()
        .map(|(name, count)| FeatureStats {
            name: name.clone(),
            types: {
                let q = simplex_sample(&gamma, *count, &mut rng);
                let p = simplex_sample(&gamma, *count, &mut rng);
                q.into_iter()
                    .zip(p)
                    .enumerate()
                    .map(|(i, (q, p))| TypeStat {
                        label: format!("t{}", i + 1),
                        q,
                        p,
                    })
                    .collect()
            },
        })
        .collect();

    let dataset = StatsDataset {
        features,
        ..Default::default()
    };
    dataset.check_domain()?;
    Ok(dataset)
}

fn simplex_sample(gamma: &Gamma<f64>, len: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    if len == 1 {
        return vec![1.0];
    }
    // Tiny concentrations can underflow a component to zero after
    // normalization; redraw until every share is strictly positive.
    for _ in 0..64 {
        let draws: Vec<f64> = (0..len).map(|_| gamma.sample(rng)).collect();
        let sum: f64 = draws.iter().sum();
        if !(sum > 0.0 && sum.is_finite()) {
            continue;
        }
        let shares: Vec<f64> = draws.iter().map(|d| d / sum).collect();
        if shares.iter().all(|&s| s > 0.0) {
            return shares;
        }
    }
    // Statistically unreachable for any sane concentration.
    panic!("simplex sampler failed to produce positive shares after 64 attempts");
}
