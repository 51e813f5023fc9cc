//! Global feature rankings built from local explanations: a greedy
//! submodular pick of diverse instances whose signed contributions are
//! summed per feature.

use std::collections::BTreeSet;

use rand::seq::index;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::lime::{Explainer, Explanation, LimeConfig};
use crate::models::Classifier;
use crate::rng;

pub const DEFAULT_BUDGET: usize = 25;
pub const DEFAULT_POOL_SIZE: usize = 500;
pub const DEFAULT_TOP_K: usize = 10;

const POOL_STREAM: u64 = 0x706f_6f6c;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlobalEntry {
    pub feature: String,
    pub contribution: f64,
    pub sensitive: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlobalExplanation {
    /// Every schema feature, by |contribution| descending, ties in schema order.
    pub entries: Vec<GlobalEntry>,
    pub picked_instances: Vec<usize>,
    pub budget: usize,
    pub k: usize,
}

impl GlobalExplanation {
    pub fn top_k(&self, k: usize) -> Result<&[GlobalEntry]> {
        top_k(self, k)
    }

    pub fn contribution(&self, feature: &str) -> Option<f64> {
        self.entries.iter().find(|e| e.feature == feature).map(|e| e.contribution)
    }
}

pub fn top_k(g: &GlobalExplanation, k: usize) -> Result<&[GlobalEntry]> {
    if k < 1 || k > g.entries.len() {
        return Err(Error::InvalidArgument(format!(
            "k must lie in 1..={}, got {k}",
            g.entries.len()
        )));
    }
    Ok(&g.entries[..k])
}

/// Greedy maximization of weighted feature coverage over explanation rows.
///
/// `values[i][j]` is explanation `i`'s contribution for feature `j`. Feature
/// importance is `sqrt(sum_i |values[i][j]|)`. Ties go to the lowest index,
/// and once nothing adds coverage the lowest unpicked indices fill the budget.
pub fn submodular_pick_values(values: &[Vec<f64>], budget: usize) -> Result<Vec<usize>> {
    if budget < 1 {
        return Err(Error::InvalidArgument("budget must be at least 1".into()));
    }
    if budget > values.len() {
        return Err(Error::InvalidArgument(format!(
            "budget {budget} exceeds the {} candidate explanations",
            values.len()
        )));
    }
    let d = values.first().map_or(0, Vec::len);
    if values.iter().any(|v| v.len() != d) {
        return Err(Error::InvalidArgument("explanations cover different feature sets".into()));
    }
    let importance: Vec<f64> = (0..d)
        .map(|j| values.iter().map(|v| v[j].abs()).sum::<f64>().sqrt())
        .collect();
    let mut covered = vec![false; d];
    let mut picked = vec![false; values.len()];
    let mut order = Vec::with_capacity(budget);
    for _ in 0..budget {
        let mut best: Option<(usize, f64)> = None;
        for (i, v) in values.iter().enumerate() {
            if picked[i] {
                continue;
            }
            let gain: f64 = (0..d)
                .filter(|&j| !covered[j] && v[j] != 0.0)
                .map(|j| importance[j])
                .sum();
            if best.is_none_or(|(_, g)| gain > g) {
                best = Some((i, gain));
            }
        }
        let (i, _) = best.expect("budget never exceeds the candidate count");
        picked[i] = true;
        order.push(i);
        for j in 0..d {
            covered[j] |= values[i][j] != 0.0;
        }
    }
    Ok(order)
}

/// Weighted coverage `sum_j I_j [exists i in set: values[i][j] != 0]`.
pub fn coverage(values: &[Vec<f64>], set: &[usize]) -> f64 {
    let d = values.first().map_or(0, Vec::len);
    (0..d)
        .filter(|&j| set.iter().any(|&i| values[i][j] != 0.0))
        .map(|j| values.iter().map(|v| v[j].abs()).sum::<f64>().sqrt())
        .sum()
}

/// Feature names across all explanations, in first-seen order.
fn feature_universe(explanations: &[Explanation]) -> Vec<String> {
    let mut seen = BTreeSet::new();
    let mut names = Vec::new();
    for e in explanations {
        for c in &e.contributions {
            if seen.insert(c.feature.as_str()) {
                names.push(c.feature.clone());
            }
        }
    }
    names
}

pub fn submodular_pick(explanations: &[Explanation], budget: usize) -> Result<Vec<usize>> {
    let names = feature_universe(explanations);
    let values: Vec<Vec<f64>> = explanations.iter().map(|e| e.values_in(&names)).collect();
    submodular_pick_values(&values, budget)
}

/// Signed per-feature sums over the picked explanations.
///
/// `features` fixes the entry set and the tie order; `picked` indexes into
/// `explanations`. The result's `picked_instances` hold those same indices.
pub fn aggregate(
    explanations: &[Explanation],
    picked: &[usize],
    features: &[String],
    sensitive: &BTreeSet<String>,
) -> Result<GlobalExplanation> {
    if picked.is_empty() {
        return Err(Error::InvalidArgument("nothing picked to aggregate".into()));
    }
    if let Some(&bad) = picked.iter().find(|&&i| i >= explanations.len()) {
        return Err(Error::InvalidArgument(format!(
            "picked index {bad} out of range for {} explanations",
            explanations.len()
        )));
    }
    let mut sums = vec![0.0; features.len()];
    for &i in picked {
        for (s, v) in sums.iter_mut().zip(explanations[i].values_in(features)) {
            *s += v;
        }
    }
    let mut entries: Vec<GlobalEntry> = features
        .iter()
        .zip(sums)
        .map(|(f, contribution)| GlobalEntry {
            feature: f.clone(),
            contribution,
            sensitive: sensitive.contains(f),
        })
        .collect();
    entries.sort_by(|a, b| b.contribution.abs().total_cmp(&a.contribution.abs()));
    Ok(GlobalExplanation {
        entries,
        picked_instances: picked.to_vec(),
        budget: picked.len(),
        k: DEFAULT_TOP_K.min(features.len()),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GlobalConfig {
    pub lime: LimeConfig,
    pub budget: usize,
    /// Largest number of test rows explained; bigger test sets are subsampled.
    pub pool_size: usize,
    pub k: usize,
}

impl Default for GlobalConfig {
    fn default() -> Self {
        GlobalConfig {
            lime: LimeConfig::default(),
            budget: DEFAULT_BUDGET,
            pool_size: DEFAULT_POOL_SIZE,
            k: DEFAULT_TOP_K,
        }
    }
}

impl GlobalConfig {
    pub fn validate(&self) -> Result<()> {
        self.lime.validate()?;
        if self.budget < 1 {
            return Err(Error::Config("budget must be at least 1".into()));
        }
        if self.pool_size < 1 {
            return Err(Error::Config("pool_size must be at least 1".into()));
        }
        if self.k < 1 {
            return Err(Error::Config("k must be at least 1".into()));
        }
        Ok(())
    }
}

/// Test-row indices explained under `seed`: all rows when there are at most
/// `pool_size`, otherwise a uniform sample in ascending order.
pub fn candidate_pool(n_rows: usize, pool_size: usize, seed: u64) -> Vec<usize> {
    if n_rows <= pool_size {
        return (0..n_rows).collect();
    }
    let mut rng = rng::seeded(rng::derive_seed(seed, POOL_STREAM));
    let mut picked = index::sample(&mut rng, n_rows, pool_size).into_vec();
    picked.sort_unstable();
    picked
}

/// Explains the candidate pool of `test`, picks up to `budget` of them and
/// aggregates. `picked_instances` are row indices into `test`.
pub fn global_explain<C: Classifier + ?Sized>(
    model: &C,
    train: &Dataset,
    test: &Dataset,
    config: &GlobalConfig,
    seed: u64,
) -> Result<GlobalExplanation> {
    config.validate()?;
    if test.n_rows() == 0 {
        return Err(Error::InvalidArgument("no rows to explain".into()));
    }
    let explainer = Explainer::new(train, config.lime.clone())?;
    let candidates = candidate_pool(test.n_rows(), config.pool_size, seed);
    let explanations = candidates
        .par_iter()
        .map(|&row| explainer.explain(model, test.row(row), rng::derive_seed(seed, row as u64)))
        .collect::<Result<Vec<_>>>()?;
    let features = train.feature_names();
    let values: Vec<Vec<f64>> = explanations.iter().map(|e| e.values_in(&features)).collect();
    let picked = submodular_pick_values(&values, config.budget.min(candidates.len()))?;
    let mut g = aggregate(&explanations, &picked, &features, train.sensitive())?;
    g.picked_instances = picked.iter().map(|&i| candidates[i]).collect();
    g.k = config.k.min(features.len());
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lime::{Contribution, Surrogate};

    fn expl(pairs: &[(&str, f64)]) -> Explanation {
        Explanation {
            intercept: 0.0,
            contributions: pairs
                .iter()
                .map(|(f, v)| Contribution {
                    feature: f.to_string(),
                    value: *v,
                })
                .collect(),
            sigma: 1.0,
            n_samples: 1,
            fidelity: 1.0,
        }
    }

    fn names(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn identical_explanations_pick_first() {
        let e = vec![expl(&[("a", 0.5)]), expl(&[("a", 0.5)])];
        assert_eq!(submodular_pick(&e, 1).unwrap(), vec![0]);
    }

    #[test]
    fn coverage_dominance() {
        let e = vec![
            expl(&[("a", 1.0), ("b", 0.0)]),
            expl(&[("a", 0.0), ("b", 1.0)]),
            expl(&[("a", 1.0), ("b", 1.0)]),
        ];
        assert_eq!(submodular_pick(&e, 1).unwrap(), vec![2]);
        assert!(submodular_pick(&e, 4).is_err());
        assert!(submodular_pick(&e, 0).is_err());
    }

    #[test]
    fn budget_is_always_filled() {
        let v = vec![vec![1.0, 1.0], vec![0.0, 0.0], vec![1.0, 0.0]];
        assert_eq!(submodular_pick_values(&v, 3).unwrap(), vec![0, 1, 2]);
    }

    #[test]
    fn aggregation_sums_signed_values() {
        let e = vec![
            expl(&[("F", 2.0), ("G", 0.2)]),
            expl(&[("F", 1.0), ("G", 0.2)]),
            expl(&[("F", -0.5), ("G", 0.2)]),
        ];
        let sens: BTreeSet<String> = ["G".to_string()].into();
        let g = aggregate(&e, &[0, 1, 2], &names(&["G", "F"]), &sens).unwrap();
        assert_eq!(g.entries[0].feature, "F");
        assert!((g.entries[0].contribution - 2.5).abs() < 1e-12);
        assert!((g.entries[1].contribution - 0.6).abs() < 1e-12);
        assert!(g.entries[1].sensitive && !g.entries[0].sensitive);

        let c = vec![expl(&[("F", 0.3)]), expl(&[("F", -0.3)])];
        let g = aggregate(&c, &[0, 1], &names(&["F"]), &BTreeSet::new()).unwrap();
        assert_eq!(g.entries[0].contribution, 0.0);
        assert!(aggregate(&c, &[], &names(&["F"]), &BTreeSet::new()).is_err());
        assert!(aggregate(&c, &[2], &names(&["F"]), &BTreeSet::new()).is_err());
    }

    #[test]
    fn single_pick_is_identity() {
        let s = Surrogate {
            intercept: 0.1,
            coefficients: vec![0.2, -0.7, 0.0],
            fidelity: 0.9,
        };
        let n = names(&["x", "y", "z"]);
        let e = Explanation::from_surrogate(&n, s, 1.0, 10);
        let g = aggregate(std::slice::from_ref(&e), &[0], &n, &BTreeSet::new()).unwrap();
        let got: Vec<(&str, f64)> = g.entries.iter().map(|x| (x.feature.as_str(), x.contribution)).collect();
        let want: Vec<(&str, f64)> = e.contributions.iter().map(|x| (x.feature.as_str(), x.value)).collect();
        assert_eq!(got, want);
        assert_eq!(top_k(&g, 3).unwrap().len(), 3);
        assert!(top_k(&g, 4).is_err());
        assert!(top_k(&g, 0).is_err());
    }

    #[test]
    fn candidate_pool_is_sorted_and_bounded() {
        assert_eq!(candidate_pool(4, 10, 1), vec![0, 1, 2, 3]);
        let p = candidate_pool(2000, 500, 9);
        assert_eq!(p.len(), 500);
        assert!(p.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(p, candidate_pool(2000, 500, 9));
        assert_ne!(p, candidate_pool(2000, 500, 10));
    }
}
