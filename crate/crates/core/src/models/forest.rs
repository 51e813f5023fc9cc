//! Bootstrap-aggregated trees: bagging and random forests share this
//! container and differ only in per-split feature subsampling.

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::tree::{DecisionTree, GrowParams, TreeGrower};
use crate::data::Dataset;
use crate::rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forest {
    trees: Vec<DecisionTree>,
}

impl Forest {
    pub(crate) fn fit(data: &Dataset, active: &[usize], n_trees: usize, params: GrowParams, seed: u64) -> Self {
        let mut rng = rng::seeded(seed);
        let n = data.n_rows();
        let mut trees = Vec::with_capacity(n_trees);
        let mut counts = vec![0.0; n];
        for _ in 0..n_trees {
            counts.iter_mut().for_each(|c| *c = 0.0);
            for _ in 0..n {
                counts[rng.gen_range(0..n)] += 1.0;
            }
            trees.push(TreeGrower::new(data, active, &counts, params).grow(&mut rng));
        }
        Forest { trees }
    }

    pub fn from_trees(trees: Vec<DecisionTree>) -> Self {
        assert!(!trees.is_empty(), "a forest needs at least one tree");
        Forest { trees }
    }

    pub fn trees(&self) -> &[DecisionTree] {
        &self.trees
    }

    /// Mean of the trees' leaf probabilities.
    pub fn proba(&self, row: &[f64]) -> f64 {
        self.trees.iter().map(|t| t.predict(row)).sum::<f64>() / self.trees.len() as f64
    }
}
