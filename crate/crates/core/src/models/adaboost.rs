//! Discrete AdaBoost (SAMME, two classes) over depth-1 trees.
//!
//! Class probability is the logistic transform of the normalized signed
//! margin `sum_t alpha_t h_t(x) / sum_t alpha_t` with `h_t in {-1, +1}`.

use serde::{Deserialize, Serialize};

use super::logistic::sigmoid;
use super::tree::{DecisionTree, GrowParams, TreeGrower};
use super::AdaBoostParams;
use crate::data::Dataset;
use crate::rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaBoostModel {
    stumps: Vec<DecisionTree>,
    alphas: Vec<f64>,
}

const STUMP: GrowParams = GrowParams {
    max_depth: Some(1),
    min_samples_split: 2,
    max_features: None,
};

#[inline]
fn vote(tree: &DecisionTree, row: &[f64]) -> f64 {
    if tree.predict(row) >= 0.5 {
        1.0
    } else {
        -1.0
    }
}

impl AdaBoostModel {
    pub(crate) fn fit(data: &Dataset, active: &[usize], params: &AdaBoostParams, seed: u64) -> Self {
        let n = data.n_rows();
        let mut weights = vec![1.0 / n as f64; n];
        let mut stumps = Vec::new();
        let mut alphas = Vec::new();
        let mut rng = rng::seeded(seed);
        for _ in 0..params.n_estimators {
            let stump = TreeGrower::new(data, active, &weights, STUMP).grow(&mut rng);
            let missed: Vec<bool> = (0..n)
                .map(|i| (vote(&stump, data.row(i)) > 0.0) != (data.label(i) == 1))
                .collect();
            let total: f64 = weights.iter().sum();
            let error: f64 = weights.iter().zip(&missed).filter(|(_, &m)| m).map(|(w, _)| w).sum::<f64>() / total;
            if error <= 0.0 {
                stumps.push(stump);
                alphas.push(1.0);
                break;
            }
            if error >= 0.5 {
                if stumps.is_empty() {
                    stumps.push(stump);
                    alphas.push(1.0);
                }
                break;
            }
            let alpha = params.learning_rate * ((1.0 - error) / error).ln();
            for (w, &m) in weights.iter_mut().zip(&missed) {
                if m {
                    *w *= alpha.exp();
                }
            }
            let total: f64 = weights.iter().sum();
            weights.iter_mut().for_each(|w| *w /= total);
            stumps.push(stump);
            alphas.push(alpha);
        }
        AdaBoostModel { stumps, alphas }
    }

    pub fn from_parts(stumps: Vec<DecisionTree>, alphas: Vec<f64>) -> Self {
        assert_eq!(stumps.len(), alphas.len());
        assert!(!stumps.is_empty());
        AdaBoostModel { stumps, alphas }
    }

    pub fn n_rounds(&self) -> usize {
        self.stumps.len()
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    /// The model after its first `rounds` boosting rounds.
    pub fn truncated(&self, rounds: usize) -> AdaBoostModel {
        let rounds = rounds.clamp(1, self.stumps.len());
        AdaBoostModel {
            stumps: self.stumps[..rounds].to_vec(),
            alphas: self.alphas[..rounds].to_vec(),
        }
    }

    /// Unnormalized signed margin `sum_t alpha_t h_t(x)`.
    pub fn margin(&self, row: &[f64]) -> f64 {
        self.stumps.iter().zip(&self.alphas).map(|(s, a)| a * vote(s, row)).sum()
    }

    pub fn proba(&self, row: &[f64]) -> f64 {
        let total: f64 = self.alphas.iter().sum();
        sigmoid(self.margin(row) / total)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_stump_voting_one_is_above_half() {
        let model = AdaBoostModel::from_parts(vec![DecisionTree::constant(1.0)], vec![0.7]);
        assert!(model.proba(&[0.0]) > 0.5);
        let against = AdaBoostModel::from_parts(vec![DecisionTree::constant(0.0)], vec![0.7]);
        assert!(against.proba(&[0.0]) < 0.5);
    }
}
