use rand::Rng;

use super::{Dataset, Standardizer};
use crate::error::{Error, Result};
use crate::rng;

pub const DEFAULT_SMOTE_NEIGHBORS: usize = 5;

/// Balanced dataset plus, for every appended row, the source indices of its
/// parent pair `(x, x_nn)`.
#[derive(Debug, Clone)]
pub struct SmoteOutput {
    pub data: Dataset,
    pub parents: Vec<(usize, usize)>,
}

/// Oversamples the minority class until both classes have the same count.
///
/// Original rows are kept verbatim and synthetic rows are appended after them.
pub fn smote(data: &Dataset, k_neighbors: usize, seed: u64) -> Result<Dataset> {
    smote_detailed(data, k_neighbors, seed).map(|out| out.data)
}

pub fn smote_detailed(data: &Dataset, k_neighbors: usize, seed: u64) -> Result<SmoteOutput> {
    let counts = data.class_counts();
    if counts.contains(&0) {
        return Err(Error::DegenerateData("SMOTE needs both classes present".into()));
    }
    if counts[0] == counts[1] {
        return Ok(SmoteOutput {
            data: data.clone(),
            parents: Vec::new(),
        });
    }
    if k_neighbors == 0 {
        return Err(Error::InvalidArgument("k_neighbors must be at least 1".into()));
    }
    let minority_class = u8::from(counts[1] < counts[0]);
    let minority: Vec<usize> = (0..data.n_rows())
        .filter(|&i| data.label(i) == minority_class)
        .collect();
    if minority.len() <= k_neighbors {
        return Err(Error::DegenerateData(format!(
            "minority class has {} rows, need more than k_neighbors = {k_neighbors}",
            minority.len()
        )));
    }

    let scaler = Standardizer::fit(data);
    let continuous: Vec<usize> = (0..data.n_features())
        .filter(|&j| !data.schema()[j].is_categorical())
        .collect();
    let scaled: Vec<Vec<f64>> = minority
        .iter()
        .map(|&i| {
            let row = data.row(i);
            continuous.iter().map(|&j| scaler.transform(j, row[j])).collect()
        })
        .collect();

    let mut neighbor_cache: Vec<Option<Vec<usize>>> = vec![None; minority.len()];
    let mut out = data.clone();
    let mut parents = Vec::new();
    let needed = counts[0].abs_diff(counts[1]);
    let mut rng = rng::seeded(seed);
    let mut synthetic = vec![0.0; data.n_features()];
    for _ in 0..needed {
        let a = rng.gen_range(0..minority.len());
        let neighbors = neighbor_cache[a].get_or_insert_with(|| nearest(&scaled, a, k_neighbors));
        let b = neighbors[rng.gen_range(0..neighbors.len())];
        let u: f64 = rng.gen();
        let (x, nn) = (data.row(minority[a]), data.row(minority[b]));
        for (j, column) in data.schema().iter().enumerate() {
            synthetic[j] = if column.is_categorical() {
                // Two-voter majority: agreement keeps the shared value, a tie keeps x's.
                x[j]
            } else {
                let (lo, hi) = if x[j] <= nn[j] { (x[j], nn[j]) } else { (nn[j], x[j]) };
                (x[j] + u * (nn[j] - x[j])).clamp(lo, hi)
            };
        }
        out.push_row(&synthetic, minority_class);
        parents.push((minority[a], minority[b]));
    }
    Ok(SmoteOutput { data: out, parents })
}

/// Indices (into `points`) of the k nearest neighbours of `points[a]`,
/// nearest first, ties by lower index.
fn nearest(points: &[Vec<f64>], a: usize, k: usize) -> Vec<usize> {
    let mut dist: Vec<(f64, usize)> = points
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != a)
        .map(|(i, p)| {
            let d2 = p.iter().zip(&points[a]).map(|(u, v)| (u - v).powi(2)).sum::<f64>();
            (d2, i)
        })
        .collect();
    dist.sort_by(|l, r| l.0.total_cmp(&r.0).then(l.1.cmp(&r.1)));
    dist.truncate(k);
    dist.into_iter().map(|(_, i)| i).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::FeatureSchema;

    fn classes(pos: usize, neg: usize) -> Dataset {
        let mut rows = Vec::new();
        let mut target = Vec::new();
        for i in 0..pos + neg {
            rows.push(vec![i as f64, (i % 3) as f64, (i * 7 % 11) as f64]);
            target.push(u8::from(i < pos));
        }
        Dataset::from_rows(
            vec![
                FeatureSchema::continuous("a"),
                FeatureSchema::categorical("c", ["x", "y", "z"]),
                FeatureSchema::continuous("b"),
            ],
            rows,
            target,
        )
        .unwrap()
    }

    #[test]
    fn balanced_input_is_unchanged() {
        let d = classes(100, 100);
        assert_eq!(smote(&d, 5, 1).unwrap(), d);
    }

    #[test]
    fn balances_counts_and_keeps_originals() {
        let d = classes(40, 100);
        let out = smote(&d, 5, 3).unwrap();
        assert_eq!(out.class_counts(), [100, 100]);
        for i in 0..d.n_rows() {
            assert_eq!(out.row(i), d.row(i));
            assert_eq!(out.label(i), d.label(i));
        }
    }

    #[test]
    fn two_point_minority_interpolates_on_segment() {
        let schema = vec![FeatureSchema::continuous("u"), FeatureSchema::continuous("v")];
        let mut rows = vec![vec![0.0, 0.0], vec![1.0, 1.0]];
        let mut target = vec![1, 1];
        for i in 0..8 {
            rows.push(vec![5.0 + i as f64, -3.0]);
            target.push(0);
        }
        let d = Dataset::from_rows(schema, rows, target).unwrap();
        let out = smote(&d, 1, 11).unwrap();
        assert_eq!(out.class_counts(), [8, 8]);
        for i in d.n_rows()..out.n_rows() {
            let r = out.row(i);
            assert_eq!(r[0], r[1], "off the diagonal: {r:?}");
            assert!((0.0..=1.0).contains(&r[0]));
        }
    }

    #[test]
    fn categorical_cells_copy_the_seed_row() {
        let d = classes(30, 60);
        let out = smote_detailed(&d, 3, 5).unwrap();
        for (offset, &(x, _)) in out.parents.iter().enumerate() {
            assert_eq!(out.data.row(d.n_rows() + offset)[1], d.row(x)[1]);
        }
    }

    #[test]
    fn errors() {
        let single = Dataset::from_rows(vec![FeatureSchema::continuous("a")], vec![vec![1.0]; 4], vec![1; 4]).unwrap();
        assert!(matches!(smote(&single, 1, 0), Err(Error::DegenerateData(_))));
        let small = classes(5, 20);
        assert!(matches!(smote(&small, 5, 0), Err(Error::DegenerateData(_))));
        assert!(smote(&small, 4, 0).is_ok());
    }

    #[test]
    fn deterministic() {
        let d = classes(25, 70);
        assert_eq!(smote(&d, 5, 9).unwrap(), smote(&d, 5, 9).unwrap());
    }
}
