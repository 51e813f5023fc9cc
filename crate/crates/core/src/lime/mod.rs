//! Local surrogate explanations for tabular rows.
//!
//! A neighbourhood of perturbed rows is drawn around the instance, each
//! sample is weighted by an exponential kernel on its binary agreement
//! vector, and a weighted ridge regression of the model's class-1
//! probability on those vectors gives one coefficient per feature.

mod kernel;
mod sampler;

use nalgebra::{Cholesky, DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::models::Classifier;

pub use kernel::{default_kernel_width, kernel_weight, weight_for_disagreements};
pub use sampler::{BinRange, FeatureDistribution, InterpretableInstance, Neighborhood, Slot, TabularSampler};

pub const DEFAULT_N_SAMPLES: usize = 5000;
pub const DEFAULT_RIDGE_LAMBDA: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LimeConfig {
    pub n_samples: usize,
    /// Kernel width; `None` uses `0.75 * sqrt(d')`.
    pub sigma: Option<f64>,
    pub ridge_lambda: f64,
}

impl Default for LimeConfig {
    fn default() -> Self {
        LimeConfig {
            n_samples: DEFAULT_N_SAMPLES,
            sigma: None,
            ridge_lambda: DEFAULT_RIDGE_LAMBDA,
        }
    }
}

impl LimeConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_samples < 1 {
            return Err(Error::Config("lime n_samples must be at least 1".into()));
        }
        if let Some(s) = self.sigma {
            if !(s > 0.0 && s.is_finite()) {
                return Err(Error::Config(format!("lime sigma must be > 0, got {s}")));
            }
        }
        if !(self.ridge_lambda >= 0.0 && self.ridge_lambda.is_finite()) {
            return Err(Error::Config(format!(
                "lime ridge_lambda must be >= 0, got {}",
                self.ridge_lambda
            )));
        }
        Ok(())
    }

    pub fn kernel_width(&self, n_features: usize) -> f64 {
        self.sigma.unwrap_or_else(|| default_kernel_width(n_features))
    }
}

/// Coefficients of a fitted surrogate in interpretable-slot order.
#[derive(Debug, Clone, PartialEq)]
pub struct Surrogate {
    pub intercept: f64,
    pub coefficients: Vec<f64>,
    /// Weighted R^2 of the fit on its own samples.
    pub fidelity: f64,
}

/// Weighted least squares with an L2 penalty on the coefficients only:
/// minimizes `sum_i w_i (y_i - b - a . z_i)^2 + lambda |a|^2`.
///
/// Centering on the weighted means removes the intercept from the normal
/// equations, which are then solved by Cholesky.
pub fn fit_surrogate(design: &[Vec<f64>], outputs: &[f64], weights: &[f64], ridge_lambda: f64) -> Result<Surrogate> {
    let n = design.len();
    if outputs.len() != n || weights.len() != n {
        return Err(Error::InvalidArgument(format!(
            "design, outputs and weights differ in length ({n}, {}, {})",
            outputs.len(),
            weights.len()
        )));
    }
    let d = design.first().map_or(0, Vec::len);
    if n < d + 1 {
        return Err(Error::InvalidArgument(format!(
            "surrogate needs at least {} samples, got {n}",
            d + 1
        )));
    }
    if design.iter().any(|z| z.len() != d) {
        return Err(Error::InvalidArgument("interpretable vectors differ in length".into()));
    }
    if weights.iter().any(|w| !(*w >= 0.0 && w.is_finite())) {
        return Err(Error::InvalidArgument("kernel weights must be finite and non-negative".into()));
    }
    if !(ridge_lambda >= 0.0 && ridge_lambda.is_finite()) {
        return Err(Error::InvalidArgument(format!("ridge_lambda must be >= 0, got {ridge_lambda}")));
    }
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return Err(Error::InvalidArgument("kernel weights are all zero".into()));
    }

    let mut z_mean = vec![0.0; d];
    let mut y_mean = 0.0;
    for ((z, &y), &w) in design.iter().zip(outputs).zip(weights) {
        for (m, v) in z_mean.iter_mut().zip(z) {
            *m += w * v;
        }
        y_mean += w * y;
    }
    z_mean.iter_mut().for_each(|m| *m /= total);
    y_mean /= total;

    let mut gram = vec![0.0; d * d];
    let mut rhs = vec![0.0; d];
    let mut centered = vec![0.0; d];
    for ((z, &y), &w) in design.iter().zip(outputs).zip(weights) {
        if w == 0.0 {
            continue;
        }
        for (c, (v, m)) in centered.iter_mut().zip(z.iter().zip(&z_mean)) {
            *c = v - m;
        }
        let yc = y - y_mean;
        for a in 0..d {
            let wa = w * centered[a];
            rhs[a] += wa * yc;
            for b in 0..=a {
                gram[a * d + b] += wa * centered[b];
            }
        }
    }
    for a in 0..d {
        gram[a * d + a] += ridge_lambda;
        for b in 0..a {
            gram[b * d + a] = gram[a * d + b];
        }
    }
    let coefficients = cholesky_solve(&gram, &rhs, d)?;
    let intercept = y_mean - coefficients.iter().zip(&z_mean).map(|(a, m)| a * m).sum::<f64>();

    let mut ss_res = 0.0;
    let mut ss_tot = 0.0;
    for ((z, &y), &w) in design.iter().zip(outputs).zip(weights) {
        let fitted = intercept + coefficients.iter().zip(z).map(|(a, v)| a * v).sum::<f64>();
        ss_res += w * (y - fitted) * (y - fitted);
        ss_tot += w * (y - y_mean) * (y - y_mean);
    }
    let fidelity = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    Ok(Surrogate {
        intercept,
        coefficients,
        fidelity,
    })
}

/// Solves `A x = b` for symmetric `A` given row-major, rejecting systems
/// whose Cholesky pivots vanish relative to the largest diagonal entry.
fn cholesky_solve(a: &[f64], b: &[f64], d: usize) -> Result<Vec<f64>> {
    if d == 0 {
        return Ok(Vec::new());
    }
    let matrix = DMatrix::from_row_slice(d, d, a);
    let scale = matrix.diagonal().amax().max(1.0);
    let factor = Cholesky::new(matrix).ok_or(Error::SingularSystem)?;
    if factor.l_dirty().diagonal().iter().any(|p| !(p * p > 1e-12 * scale)) {
        return Err(Error::SingularSystem);
    }
    Ok(factor.solve(&DVector::from_column_slice(b)).iter().copied().collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Contribution {
    pub feature: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Explanation {
    pub intercept: f64,
    /// One entry per feature, by |value| descending with ties in schema order.
    pub contributions: Vec<Contribution>,
    pub sigma: f64,
    pub n_samples: usize,
    pub fidelity: f64,
}

impl Explanation {
    /// Builds an explanation from coefficients given in schema order.
    pub fn from_surrogate(names: &[String], surrogate: Surrogate, sigma: f64, n_samples: usize) -> Self {
        let contributions = names
            .iter()
            .zip(surrogate.coefficients)
            .map(|(feature, value)| Contribution {
                feature: feature.clone(),
                value,
            })
            .collect();
        Explanation {
            intercept: surrogate.intercept,
            contributions: rank_contributions(contributions),
            sigma,
            n_samples,
            fidelity: surrogate.fidelity,
        }
    }

    pub fn value(&self, feature: &str) -> Option<f64> {
        self.contributions.iter().find(|c| c.feature == feature).map(|c| c.value)
    }

    /// Coefficients re-ordered to `order`; features absent from the
    /// explanation read as zero.
    pub fn values_in(&self, order: &[String]) -> Vec<f64> {
        order.iter().map(|f| self.value(f).unwrap_or(0.0)).collect()
    }
}

/// Stable sort by |value| descending, so equal magnitudes keep input order.
pub fn rank_contributions(mut contributions: Vec<Contribution>) -> Vec<Contribution> {
    contributions.sort_by(|a, b| b.value.abs().total_cmp(&a.value.abs()));
    contributions
}

/// A sampler fitted once on training data, reusable across instances.
#[derive(Debug, Clone)]
pub struct Explainer {
    sampler: TabularSampler,
    names: Vec<String>,
    config: LimeConfig,
}

impl Explainer {
    pub fn new(train: &Dataset, config: LimeConfig) -> Result<Self> {
        config.validate()?;
        Ok(Explainer {
            sampler: TabularSampler::fit(train)?,
            names: train.feature_names(),
            config,
        })
    }

    pub fn sampler(&self) -> &TabularSampler {
        &self.sampler
    }

    pub fn config(&self) -> &LimeConfig {
        &self.config
    }

    pub fn sigma(&self) -> f64 {
        self.config.kernel_width(self.names.len())
    }

    pub fn explain<C: Classifier + ?Sized>(&self, model: &C, x: &[f64], seed: u64) -> Result<Explanation> {
        if model.schema() != self.sampler.schema() {
            return Err(Error::SchemaMismatch("model schema differs from the explainer's".into()));
        }
        let neighborhood = self.sampler.sample_neighbors(x, self.config.n_samples, seed)?;
        let sigma = self.sigma();
        let mut design = Vec::with_capacity(neighborhood.samples.len());
        let mut outputs = Vec::with_capacity(neighborhood.samples.len());
        let mut weights = Vec::with_capacity(neighborhood.samples.len());
        for (row, inst) in neighborhood.samples {
            outputs.push(model.proba(&row));
            weights.push(weight_for_disagreements(inst.disagreements(), sigma));
            design.push(inst.bits);
        }
        let surrogate = fit_surrogate(&design, &outputs, &weights, self.config.ridge_lambda)?;
        Ok(Explanation::from_surrogate(&self.names, surrogate, sigma, self.config.n_samples))
    }
}

/// One-shot explanation of `x`; fits the sampler on `train` each call.
pub fn explain<C: Classifier + ?Sized>(
    model: &C,
    x: &[f64],
    train: &Dataset,
    config: &LimeConfig,
    seed: u64,
) -> Result<Explanation> {
    Explainer::new(train, config.clone())?.explain(model, x, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::FeatureSchema;

    struct Constant(Vec<FeatureSchema>, f64);

    impl Classifier for Constant {
        fn schema(&self) -> &[FeatureSchema] {
            &self.0
        }
        fn proba(&self, _: &[f64]) -> f64 {
            self.1
        }
    }

    struct Threshold(Vec<FeatureSchema>, usize);

    impl Classifier for Threshold {
        fn schema(&self) -> &[FeatureSchema] {
            &self.0
        }
        fn proba(&self, row: &[f64]) -> f64 {
            if row[self.1] > 50.0 {
                0.9
            } else {
                0.1
            }
        }
    }

    fn toy() -> Dataset {
        let schema = vec![
            FeatureSchema::continuous("a"),
            FeatureSchema::continuous("b"),
            FeatureSchema::categorical("c", ["x", "y", "z"]),
        ];
        let rows = (0..100)
            .map(|i| vec![i as f64, ((i * 37) % 100) as f64, (i % 3) as f64])
            .collect();
        Dataset::from_rows(schema, rows, (0..100).map(|i| u8::from(i >= 50)).collect()).unwrap()
    }

    #[test]
    fn hand_system() {
        let design = vec![vec![1.0, 1.0], vec![1.0, 0.0], vec![0.0, 1.0]];
        let s = fit_surrogate(&design, &[1.0, 0.4, 0.6], &[1.0; 3], 0.0).unwrap();
        assert!(s.intercept.abs() < 1e-12);
        assert!((s.coefficients[0] - 0.4).abs() < 1e-12);
        assert!((s.coefficients[1] - 0.6).abs() < 1e-12);
        assert!((s.fidelity - 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_outputs_give_zero_slopes() {
        let design = vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0], vec![0.0, 0.0]];
        let s = fit_surrogate(&design, &[0.3; 4], &[1.0, 0.5, 0.2, 0.9], 1.0).unwrap();
        assert!(s.coefficients.iter().all(|a| a.abs() < 1e-12));
        assert!((s.intercept - 0.3).abs() < 1e-12);
    }

    #[test]
    fn rank_deficiency_without_ridge_is_singular() {
        let design = vec![vec![1.0, 1.0], vec![0.0, 0.0], vec![1.0, 1.0]];
        assert!(matches!(
            fit_surrogate(&design, &[1.0, 0.0, 1.0], &[1.0; 3], 0.0),
            Err(Error::SingularSystem)
        ));
        assert!(fit_surrogate(&design, &[1.0, 0.0, 1.0], &[1.0; 3], 0.5).is_ok());
    }

    #[test]
    fn rejects_bad_inputs() {
        let design = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        assert!(fit_surrogate(&design, &[1.0, 0.0], &[1.0; 2], 1.0).is_err());
        let design = vec![vec![1.0], vec![0.0]];
        assert!(fit_surrogate(&design, &[1.0, 0.0], &[0.0; 2], 1.0).is_err());
        assert!(fit_surrogate(&design, &[1.0, 0.0], &[1.0, -1.0], 1.0).is_err());
    }

    #[test]
    fn constant_model_has_no_contributions() {
        let d = toy();
        let m = Constant(d.schema().to_vec(), 0.7);
        let e = explain(&m, d.row(10), &d, &LimeConfig::default(), 1).unwrap();
        assert!(e.contributions.iter().all(|c| c.value.abs() < 1e-8));
        assert!((e.intercept - 0.7).abs() < 1e-8);
        assert_eq!(e.contributions.len(), 3);
    }

    #[test]
    fn single_feature_model_dominates() {
        let d = toy();
        let m = Threshold(d.schema().to_vec(), 1);
        let e = explain(&m, d.row(80), &d, &LimeConfig::default(), 4).unwrap();
        assert_eq!(e.contributions[0].feature, "b");
        assert!(e.contributions[0].value.abs() > 10.0 * e.contributions[1].value.abs());
        assert_eq!(e, explain(&m, d.row(80), &d, &LimeConfig::default(), 4).unwrap());
    }

    #[test]
    fn ranking_is_stable_on_ties() {
        let names: Vec<String> = ["p", "q", "r"].iter().map(|s| s.to_string()).collect();
        let s = Surrogate {
            intercept: 0.0,
            coefficients: vec![0.1, -0.3, 0.3],
            fidelity: 1.0,
        };
        let e = Explanation::from_surrogate(&names, s, 1.0, 10);
        let order: Vec<&str> = e.contributions.iter().map(|c| c.feature.as_str()).collect();
        assert_eq!(order, ["q", "r", "p"]);
        let json = serde_json::to_value(&e).unwrap();
        assert!(json.get("fidelity").is_some());
    }
}
