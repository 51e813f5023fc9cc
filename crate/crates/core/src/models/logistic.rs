//! L2-regularized logistic regression trained by full-batch gradient descent
//! with Armijo backtracking.
//!
//! Categorical features are one-hot encoded over all categories; continuous
//! features are standardized with training statistics. The objective is
//!
//! ```text
//! J(w, b) = sum_i [softplus(m_i) - y_i m_i] + lambda/2 * |w|^2,   m_i = b + w . x_i
//! ```
//!
//! with the intercept `b` unpenalized.

use serde::{Deserialize, Serialize};

use super::LogisticParams;
use crate::data::{Dataset, FeatureKind, Standardizer};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum EncodedColumn {
    OneHot { feature: usize, offset: usize },
    Scaled { feature: usize, offset: usize, mean: f64, scale: f64 },
}

/// Maps schema rows onto sparse design rows with one entry per active feature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Encoder {
    columns: Vec<EncodedColumn>,
    width: usize,
}

impl Encoder {
    pub fn fit(data: &Dataset, active: &[usize]) -> Self {
        let stats = Standardizer::fit(data);
        let mut columns = Vec::with_capacity(active.len());
        let mut offset = 0;
        for &feature in active {
            let column = &data.schema()[feature];
            match column.kind {
                FeatureKind::Categorical => {
                    columns.push(EncodedColumn::OneHot { feature, offset });
                    offset += column.categories.len();
                }
                FeatureKind::Continuous => {
                    columns.push(EncodedColumn::Scaled {
                        feature,
                        offset,
                        mean: stats.mean[feature],
                        scale: stats.scale[feature],
                    });
                    offset += 1;
                }
            }
        }
        Encoder { columns, width: offset }
    }

    /// Number of weights (excluding the intercept).
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn encode(&self, row: &[f64]) -> Vec<(u32, f64)> {
        self.columns
            .iter()
            .map(|c| match *c {
                EncodedColumn::OneHot { feature, offset } => ((offset + row[feature] as usize) as u32, 1.0),
                EncodedColumn::Scaled {
                    feature,
                    offset,
                    mean,
                    scale,
                } => (offset as u32, (row[feature] - mean) / scale),
            })
            .collect()
    }

    #[inline]
    fn margin(&self, weights: &[f64], intercept: f64, row: &[f64]) -> f64 {
        let mut m = intercept;
        for c in &self.columns {
            m += match *c {
                EncodedColumn::OneHot { feature, offset } => weights[offset + row[feature] as usize],
                EncodedColumn::Scaled {
                    feature,
                    offset,
                    mean,
                    scale,
                } => weights[offset] * (row[feature] - mean) / scale,
            };
        }
        m
    }
}

#[inline]
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

#[inline]
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

/// Penalized log-loss over an encoded design.
///
/// Parameters are laid out as `[w_0, ..., w_{p-1}, b]`.
#[derive(Debug, Clone)]
pub struct LogisticObjective {
    rows: Vec<Vec<(u32, f64)>>,
    labels: Vec<f64>,
    lambda: f64,
    width: usize,
}

impl LogisticObjective {
    pub fn new(rows: Vec<Vec<(u32, f64)>>, labels: Vec<f64>, lambda: f64, width: usize) -> Self {
        LogisticObjective {
            rows,
            labels,
            lambda,
            width,
        }
    }

    pub fn from_dataset(data: &Dataset, encoder: &Encoder, lambda: f64) -> Self {
        let rows = data.rows().map(|r| encoder.encode(r)).collect();
        let labels = data.target().iter().map(|&y| y as f64).collect();
        Self::new(rows, labels, lambda, encoder.width())
    }

    pub fn n_params(&self) -> usize {
        self.width + 1
    }

    fn margin(&self, params: &[f64], row: &[(u32, f64)]) -> f64 {
        row.iter().fold(params[self.width], |m, &(j, v)| m + params[j as usize] * v)
    }

    pub fn loss(&self, params: &[f64]) -> f64 {
        let data: f64 = self
            .rows
            .iter()
            .zip(&self.labels)
            .map(|(row, &y)| {
                let m = self.margin(params, row);
                softplus(m) - y * m
            })
            .sum();
        let penalty: f64 = params[..self.width].iter().map(|w| w * w).sum();
        data + 0.5 * self.lambda * penalty
    }

    pub fn gradient(&self, params: &[f64]) -> Vec<f64> {
        let mut grad = vec![0.0; self.width + 1];
        for (row, &y) in self.rows.iter().zip(&self.labels) {
            let r = sigmoid(self.margin(params, row)) - y;
            for &(j, v) in row {
                grad[j as usize] += r * v;
            }
            grad[self.width] += r;
        }
        for (g, w) in grad[..self.width].iter_mut().zip(&params[..self.width]) {
            *g += self.lambda * w;
        }
        grad
    }

    /// Gradient descent with backtracking; returns the final parameters.
    pub fn minimize(&self, max_iter: usize, tol: f64) -> Vec<f64> {
        let mut params = vec![0.0; self.n_params()];
        let mut value = self.loss(&params);
        let mut step = 1.0;
        let mut trial = vec![0.0; params.len()];
        for _ in 0..max_iter {
            let grad = self.gradient(&params);
            let norm2: f64 = grad.iter().map(|g| g * g).sum();
            if norm2.sqrt() < tol {
                break;
            }
            step *= 2.0;
            loop {
                for ((t, p), g) in trial.iter_mut().zip(&params).zip(&grad) {
                    *t = p - step * g;
                }
                let candidate = self.loss(&trial);
                if candidate <= value - 0.5 * step * norm2 {
                    value = candidate;
                    std::mem::swap(&mut params, &mut trial);
                    break;
                }
                step *= 0.5;
                if step < 1e-20 {
                    return params;
                }
            }
        }
        params
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    encoder: Encoder,
    weights: Vec<f64>,
    intercept: f64,
}

impl LogisticModel {
    pub(crate) fn fit(data: &Dataset, active: &[usize], params: &LogisticParams) -> Self {
        let encoder = Encoder::fit(data, active);
        let objective = LogisticObjective::from_dataset(data, &encoder, params.lambda);
        let mut solution = objective.minimize(params.max_iter, params.tol);
        let intercept = solution.pop().unwrap_or(0.0);
        LogisticModel {
            encoder,
            weights: solution,
            intercept,
        }
    }

    /// A model with explicit coefficients over `active` features.
    pub fn with_coefficients(data: &Dataset, active: &[usize], weights: Vec<f64>, intercept: f64) -> Self {
        let encoder = Encoder::fit(data, active);
        assert_eq!(weights.len(), encoder.width(), "coefficient count must match the encoding width");
        LogisticModel {
            encoder,
            weights,
            intercept,
        }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn intercept(&self) -> f64 {
        self.intercept
    }

    pub fn proba(&self, row: &[f64]) -> f64 {
        sigmoid(self.encoder.margin(&self.weights, self.intercept, row))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::FeatureSchema;

    #[test]
    fn sigmoid_is_stable() {
        assert_eq!(sigmoid(0.0), 0.5);
        assert!(sigmoid(-800.0) >= 0.0 && sigmoid(800.0) <= 1.0);
        assert!((softplus(-800.0)).abs() < 1e-300);
        assert!((softplus(800.0) - 800.0).abs() < 1e-9);
    }

    #[test]
    fn one_hot_uses_every_category() {
        let d = Dataset::from_rows(
            vec![FeatureSchema::categorical("c", ["a", "b", "c"]), FeatureSchema::continuous("x")],
            vec![vec![2.0, 1.0], vec![0.0, 3.0]],
            vec![0, 1],
        )
        .unwrap();
        let enc = Encoder::fit(&d, &[0, 1]);
        assert_eq!(enc.width(), 4);
        let row = enc.encode(d.row(0));
        assert_eq!(row[0], (2, 1.0));
        assert_eq!(row[1], (3, -1.0));
        let only_x = Encoder::fit(&d, &[1]);
        assert_eq!(only_x.width(), 1);
    }

    #[test]
    fn descent_reduces_loss() {
        let rows = vec![vec![(0, -1.0)], vec![(0, 1.0)], vec![(0, 2.0)], vec![(0, -0.5)]];
        let obj = LogisticObjective::new(rows, vec![0.0, 1.0, 1.0, 0.0], 1.0, 1);
        let start = obj.loss(&[0.0, 0.0]);
        let solved = obj.minimize(1000, 1e-8);
        assert!(obj.loss(&solved) < start);
        let g = obj.gradient(&solved);
        assert!(g.iter().all(|v| v.abs() < 1e-6), "{g:?}");
    }
}
