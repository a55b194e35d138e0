//! Synthetic two-Gaussian classification frames.

use leakguard_core::{Column, DataFrame};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Rows per demo replicate.
pub const DEMO_ROWS: usize = 200;
/// Feature columns per demo replicate.
pub const DEMO_FEATURES: usize = 5;
/// Distance between the class means along every feature.
pub const DEMO_SEPARATION: f64 = 0.5;

/// `n` rows of features `x1..xp` and a binary `y`. Class 1 has mean
/// `+separation / 2` on every feature, class 0 the negation; unit variance.
pub fn two_gaussian(n: usize, features: usize, separation: f64, seed: u64) -> DataFrame {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ys: Vec<i64> = (0..n).map(|_| i64::from(rng.random::<bool>())).collect();
    let mut columns: Vec<(String, Column)> = (1..=features)
        .map(|j| {
            let xs = ys
                .iter()
                .map(|&y| {
                    let shift = if y == 1 { separation / 2.0 } else { -separation / 2.0 };
                    let z: f64 = StandardNormal.sample(&mut rng);
                    Some(shift + z)
                })
                .collect();
            (format!("x{j}"), Column::Float(xs))
        })
        .collect();
    columns.push(("y".into(), Column::Int(ys.into_iter().map(Some).collect())));
    DataFrame::new(columns).expect("distinct column names")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_shaped() {
        let a = two_gaussian(50, 3, 1.0, 7);
        assert_eq!(a.fingerprint(), two_gaussian(50, 3, 1.0, 7).fingerprint());
        assert_ne!(a.fingerprint(), two_gaussian(50, 3, 1.0, 8).fingerprint());
        assert_eq!((a.row_count(), a.column_count()), (50, 4));
    }
}
