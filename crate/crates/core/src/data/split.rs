use rand::seq::SliceRandom;

use super::Dataset;
use crate::error::{Error, Result};
use crate::rng;

#[derive(Debug, Clone)]
pub struct SplitPair {
    pub train: Dataset,
    pub test: Dataset,
    pub seed: u64,
    /// Source row indices in train order.
    pub train_indices: Vec<usize>,
    pub test_indices: Vec<usize>,
}

/// Shuffles rows uniformly under `seed` and sends the first
/// `ceil(train_fraction * n)` of them to the training side.
pub fn split(data: &Dataset, train_fraction: f64, seed: u64) -> Result<SplitPair> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "train fraction {train_fraction} is outside (0, 1)"
        )));
    }
    let counts = data.class_counts();
    if counts.iter().any(|&c| c < 2) {
        return Err(Error::DegenerateData(format!(
            "split needs at least 2 rows per class, found {}/{}",
            counts[0], counts[1]
        )));
    }
    let n = data.n_rows();
    let n_train = (train_fraction * n as f64).ceil() as usize;
    if n_train == 0 || n_train >= n {
        return Err(Error::InvalidArgument(format!(
            "train fraction {train_fraction} leaves an empty side for {n} rows"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng::seeded(seed));
    let test_indices = order.split_off(n_train);
    Ok(SplitPair {
        train: data.select(&order),
        test: data.select(&test_indices),
        seed,
        train_indices: order,
        test_indices,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::FeatureSchema;

    fn numbered(n: usize) -> Dataset {
        let rows = (0..n).map(|i| vec![i as f64]).collect();
        let target = (0..n).map(|i| (i % 2) as u8).collect();
        Dataset::from_rows(vec![FeatureSchema::continuous("id")], rows, target).unwrap()
    }

    #[test]
    fn counts_and_disjointness() {
        let p = split(&numbered(10), 0.7, 42).unwrap();
        assert_eq!(p.train.n_rows(), 7);
        assert_eq!(p.test.n_rows(), 3);
        let mut all: Vec<usize> = p.train_indices.iter().chain(&p.test_indices).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..10).collect::<Vec<_>>());
        assert!(p.train.same_schema(&p.test));
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let d = numbered(50);
        let a = split(&d, 0.7, 7).unwrap();
        let b = split(&d, 0.7, 7).unwrap();
        assert_eq!(a.train, b.train);
        assert_eq!(a.test, b.test);
        let c = split(&d, 0.7, 8).unwrap();
        assert_ne!(a.train_indices, c.train_indices);
    }

    #[test]
    fn rejects_bad_inputs() {
        let d = numbered(10);
        assert!(split(&d, 0.0, 1).is_err());
        assert!(split(&d, 1.0, 1).is_err());
        assert!(split(&d, f64::NAN, 1).is_err());
        let lopsided = Dataset::from_rows(
            vec![FeatureSchema::continuous("x")],
            vec![vec![0.0], vec![1.0], vec![2.0]],
            vec![0, 0, 1],
        )
        .unwrap();
        assert!(matches!(split(&lopsided, 0.5, 1), Err(Error::DegenerateData(_))));
    }

    #[test]
    fn shuffle_is_uniform_over_seeds() {
        // Each row lands in train with probability 0.7; over 1000 seeds the
        // count is Binomial(1000, 0.7) with sd ~14.5. 5 sd bounds.
        let d = numbered(100);
        let mut hits = vec![0usize; 100];
        for seed in 0..1000 {
            for &i in &split(&d, 0.7, seed).unwrap().train_indices {
                hits[i] += 1;
            }
        }
        for (i, &h) in hits.iter().enumerate() {
            assert!((627..=773).contains(&h), "row {i} in train {h} times");
        }
    }
}
