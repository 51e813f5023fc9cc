//! Binary classifiers behind a single probability interface, with
//! feature-dropout retraining.

mod adaboost;
mod forest;
mod logistic;
mod tree;

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::data::{check_row, Dataset, FeatureSchema};
use crate::error::{Error, Result};

pub use adaboost::AdaBoostModel;
pub use forest::Forest;
pub use logistic::{sigmoid, Encoder, LogisticModel, LogisticObjective};
pub use tree::{DecisionTree, Node, SplitTest};

use tree::GrowParams;

/// Anything that yields the probability of class 1 for a schema row.
pub trait Classifier: Sync {
    fn schema(&self) -> &[FeatureSchema];

    /// Probability of class 1 for a row already known to conform to
    /// [`Classifier::schema`].
    fn proba(&self, row: &[f64]) -> f64;

    fn predict_proba(&self, row: &[f64]) -> Result<f64> {
        check_row(self.schema(), row)?;
        Ok(self.proba(row))
    }

    fn predict(&self, row: &[f64]) -> Result<u8> {
        self.predict_proba(row).map(label_for)
    }
}

/// Thresholds a probability at 0.5; a tie goes to class 1.
#[inline]
pub fn label_for(p: f64) -> u8 {
    u8::from(p >= 0.5)
}

/// Fraction of rows whose thresholded prediction matches the label.
pub fn accuracy<C: Classifier + ?Sized>(model: &C, data: &Dataset) -> Result<f64> {
    ensure_schema(model.schema(), data)?;
    if data.n_rows() == 0 {
        return Err(Error::InvalidArgument("accuracy of an empty dataset".into()));
    }
    let hits = data
        .rows()
        .zip(data.target())
        .filter(|(row, &y)| label_for(model.proba(row)) == y)
        .count();
    Ok(hits as f64 / data.n_rows() as f64)
}

pub(crate) fn ensure_schema(schema: &[FeatureSchema], data: &Dataset) -> Result<()> {
    if schema != data.schema() {
        return Err(Error::SchemaMismatch("dataset schema differs from the model's".into()));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Lr,
    Tree,
    Bagging,
    Rf,
    Ada,
}

impl Family {
    pub const ALL: [Family; 5] = [Family::Lr, Family::Tree, Family::Bagging, Family::Rf, Family::Ada];

    pub fn label(&self) -> &'static str {
        match self {
            Family::Lr => "LR",
            Family::Tree => "Tree",
            Family::Bagging => "Bagging",
            Family::Rf => "RF",
            Family::Ada => "ADA",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "lr" | "logistic" => Ok(Family::Lr),
            "tree" => Ok(Family::Tree),
            "bagging" => Ok(Family::Bagging),
            "rf" | "random_forest" => Ok(Family::Rf),
            "ada" | "adaboost" => Ok(Family::Ada),
            other => Err(Error::Config(format!("unknown model family `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticParams {
    pub lambda: f64,
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for LogisticParams {
    fn default() -> Self {
        LogisticParams {
            lambda: 1.0,
            max_iter: 1000,
            tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeParams {
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams {
            max_depth: None,
            min_samples_split: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaggingParams {
    pub n_estimators: usize,
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
}

impl Default for BaggingParams {
    fn default() -> Self {
        BaggingParams {
            n_estimators: 10,
            max_depth: None,
            min_samples_split: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_estimators: usize,
    /// Features examined per split; `None` means `floor(sqrt(active features))`.
    pub max_features: Option<usize>,
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_estimators: 100,
            max_features: None,
            max_depth: None,
            min_samples_split: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaBoostParams {
    pub n_estimators: usize,
    pub learning_rate: f64,
}

impl Default for AdaBoostParams {
    fn default() -> Self {
        AdaBoostParams {
            n_estimators: 50,
            learning_rate: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum Hyperparams {
    Lr(LogisticParams),
    Tree(TreeParams),
    Bagging(BaggingParams),
    Rf(ForestParams),
    Ada(AdaBoostParams),
}

impl Hyperparams {
    pub fn defaults(family: Family) -> Self {
        match family {
            Family::Lr => Hyperparams::Lr(LogisticParams::default()),
            Family::Tree => Hyperparams::Tree(TreeParams::default()),
            Family::Bagging => Hyperparams::Bagging(BaggingParams::default()),
            Family::Rf => Hyperparams::Rf(ForestParams::default()),
            Family::Ada => Hyperparams::Ada(AdaBoostParams::default()),
        }
    }

    pub fn family(&self) -> Family {
        match self {
            Hyperparams::Lr(_) => Family::Lr,
            Hyperparams::Tree(_) => Family::Tree,
            Hyperparams::Bagging(_) => Family::Bagging,
            Hyperparams::Rf(_) => Family::Rf,
            Hyperparams::Ada(_) => Family::Ada,
        }
    }

    /// Overrides one named hyperparameter. A negative `max_depth` or
    /// `max_features` restores the unbounded default.
    pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
        let count = |v: f64| -> Result<usize> {
            if v >= 0.0 && v.fract() == 0.0 {
                Ok(v as usize)
            } else {
                Err(Error::Config(format!("`{name}` must be a non-negative integer, got {v}")))
            }
        };
        let optional = |v: f64| -> Result<Option<usize>> { if v < 0.0 { Ok(None) } else { count(v).map(Some) } };
        let family = self.family();
        match (&mut *self, name) {
            (Hyperparams::Lr(p), "lambda") => p.lambda = value,
            (Hyperparams::Lr(p), "max_iter") => p.max_iter = count(value)?,
            (Hyperparams::Lr(p), "tol") => p.tol = value,
            (Hyperparams::Tree(p), "max_depth") => p.max_depth = optional(value)?,
            (Hyperparams::Tree(p), "min_samples_split") => p.min_samples_split = count(value)?,
            (Hyperparams::Bagging(p), "n_estimators") => p.n_estimators = count(value)?,
            (Hyperparams::Bagging(p), "max_depth") => p.max_depth = optional(value)?,
            (Hyperparams::Bagging(p), "min_samples_split") => p.min_samples_split = count(value)?,
            (Hyperparams::Rf(p), "n_estimators") => p.n_estimators = count(value)?,
            (Hyperparams::Rf(p), "max_features") => p.max_features = optional(value)?,
            (Hyperparams::Rf(p), "max_depth") => p.max_depth = optional(value)?,
            (Hyperparams::Rf(p), "min_samples_split") => p.min_samples_split = count(value)?,
            (Hyperparams::Ada(p), "n_estimators") => p.n_estimators = count(value)?,
            (Hyperparams::Ada(p), "learning_rate") => p.learning_rate = value,
            _ => return Err(Error::Config(format!("unknown hyperparameter `{name}` for {family}"))),
        }
        self.validate()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::Config(msg.to_string()));
        match self {
            Hyperparams::Lr(p) => {
                if !(p.lambda >= 0.0 && p.lambda.is_finite()) {
                    return bad("lambda must be finite and >= 0");
                }
                if !(p.tol > 0.0) {
                    return bad("tol must be > 0");
                }
            }
            Hyperparams::Tree(p) if p.min_samples_split < 2 => return bad("min_samples_split must be >= 2"),
            Hyperparams::Bagging(p) if p.n_estimators < 1 => return bad("n_estimators must be >= 1"),
            Hyperparams::Bagging(p) if p.min_samples_split < 2 => return bad("min_samples_split must be >= 2"),
            Hyperparams::Rf(p) if p.n_estimators < 1 => return bad("n_estimators must be >= 1"),
            Hyperparams::Rf(p) if p.min_samples_split < 2 => return bad("min_samples_split must be >= 2"),
            Hyperparams::Rf(p) if p.max_features == Some(0) => return bad("max_features must be >= 1"),
            Hyperparams::Ada(p) if p.n_estimators < 1 => return bad("n_estimators must be >= 1"),
            Hyperparams::Ada(p) if !(p.learning_rate > 0.0) => return bad("learning_rate must be > 0"),
            _ => {}
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub params: Hyperparams,
    pub seed: u64,
}

impl ModelSpec {
    pub fn new(family: Family, seed: u64) -> Self {
        ModelSpec {
            params: Hyperparams::defaults(family),
            seed,
        }
    }

    pub fn family(&self) -> Family {
        self.params.family()
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        ModelSpec {
            params: self.params.clone(),
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum Learner {
    Logistic(LogisticModel),
    Tree(DecisionTree),
    Forest(Forest),
    AdaBoost(AdaBoostModel),
}

impl Learner {
    fn proba(&self, row: &[f64]) -> f64 {
        match self {
            Learner::Logistic(m) => m.proba(row),
            Learner::Tree(t) => t.predict(row),
            Learner::Forest(f) => f.proba(row),
            Learner::AdaBoost(a) => a.proba(row),
        }
    }

    fn matches(&self, family: Family) -> bool {
        matches!(
            (self, family),
            (Learner::Logistic(_), Family::Lr)
                | (Learner::Tree(_), Family::Tree)
                | (Learner::Forest(_), Family::Bagging | Family::Rf)
                | (Learner::AdaBoost(_), Family::Ada)
        )
    }
}

/// A fitted classifier. Features in `dropped` were excluded at training
/// time and never influence a prediction.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    spec: ModelSpec,
    schema: Vec<FeatureSchema>,
    dropped: BTreeSet<String>,
    learner: Learner,
}

impl TrainedModel {
    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn dropped_features(&self) -> &BTreeSet<String> {
        &self.dropped
    }

    pub fn as_logistic(&self) -> Option<&LogisticModel> {
        match &self.learner {
            Learner::Logistic(m) => Some(m),
            _ => None,
        }
    }

    pub fn as_forest(&self) -> Option<&Forest> {
        match &self.learner {
            Learner::Forest(f) => Some(f),
            _ => None,
        }
    }

    pub fn as_tree(&self) -> Option<&DecisionTree> {
        match &self.learner {
            Learner::Tree(t) => Some(t),
            _ => None,
        }
    }

    pub fn as_adaboost(&self) -> Option<&AdaBoostModel> {
        match &self.learner {
            Learner::AdaBoost(a) => Some(a),
            _ => None,
        }
    }

    pub fn from_logistic(spec: ModelSpec, schema: Vec<FeatureSchema>, model: LogisticModel) -> Self {
        Self::assemble(spec, schema, Learner::Logistic(model))
    }

    pub fn from_forest(spec: ModelSpec, schema: Vec<FeatureSchema>, forest: Forest) -> Self {
        Self::assemble(spec, schema, Learner::Forest(forest))
    }

    pub fn from_adaboost(spec: ModelSpec, schema: Vec<FeatureSchema>, model: AdaBoostModel) -> Self {
        Self::assemble(spec, schema, Learner::AdaBoost(model))
    }

    fn assemble(spec: ModelSpec, schema: Vec<FeatureSchema>, learner: Learner) -> Self {
        TrainedModel {
            spec,
            schema,
            dropped: BTreeSet::new(),
            learner,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let doc = ModelDocument {
            format_version: MODEL_FORMAT_VERSION,
            family: self.spec.family(),
            spec: self.spec.clone(),
            schema: self.schema.clone(),
            dropped_features: self.dropped.clone(),
            parameters: self.learner.clone(),
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ModelDocument = serde_json::from_str(text)?;
        if doc.format_version != MODEL_FORMAT_VERSION {
            return Err(Error::InvalidArgument(format!(
                "unsupported model format version {}",
                doc.format_version
            )));
        }
        if doc.family != doc.spec.family() || !doc.parameters.matches(doc.family) {
            return Err(Error::InvalidArgument("model family tag does not match its parameters".into()));
        }
        for name in &doc.dropped_features {
            if !doc.schema.iter().any(|c| &c.name == name) {
                return Err(Error::UnknownFeature(name.clone()));
            }
        }
        Ok(TrainedModel {
            spec: doc.spec,
            schema: doc.schema,
            dropped: doc.dropped_features,
            learner: doc.parameters,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

impl Classifier for TrainedModel {
    fn schema(&self) -> &[FeatureSchema] {
        &self.schema
    }

    fn proba(&self, row: &[f64]) -> f64 {
        self.learner.proba(row)
    }
}

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct ModelDocument {
    format_version: u32,
    family: Family,
    spec: ModelSpec,
    schema: Vec<FeatureSchema>,
    dropped_features: BTreeSet<String>,
    parameters: Learner,
}

/// Trains `spec` on `data` with the columns named in `drop` removed.
pub fn train(spec: &ModelSpec, data: &Dataset, drop: &BTreeSet<String>) -> Result<TrainedModel> {
    spec.params.validate()?;
    for name in drop {
        data.feature_index(name)?;
    }
    let active: Vec<usize> = (0..data.n_features())
        .filter(|&j| !drop.contains(&data.schema()[j].name))
        .collect();
    if active.is_empty() {
        return Err(Error::InvalidArgument("cannot drop every feature".into()));
    }
    if data.class_counts().contains(&0) {
        return Err(Error::DegenerateData("training data holds a single class".into()));
    }
    let learner = match &spec.params {
        Hyperparams::Lr(p) => Learner::Logistic(LogisticModel::fit(data, &active, p)),
        Hyperparams::Tree(p) => {
            let weights = vec![1.0; data.n_rows()];
            let grow = GrowParams {
                max_depth: p.max_depth,
                min_samples_split: p.min_samples_split,
                max_features: None,
            };
            Learner::Tree(tree::TreeGrower::new(data, &active, &weights, grow).grow(&mut crate::rng::seeded(spec.seed)))
        }
        Hyperparams::Bagging(p) => {
            let grow = GrowParams {
                max_depth: p.max_depth,
                min_samples_split: p.min_samples_split,
                max_features: None,
            };
            Learner::Forest(Forest::fit(data, &active, p.n_estimators, grow, spec.seed))
        }
        Hyperparams::Rf(p) => {
            let default_m = ((active.len() as f64).sqrt().floor() as usize).max(1);
            let grow = GrowParams {
                max_depth: p.max_depth,
                min_samples_split: p.min_samples_split,
                max_features: Some(p.max_features.unwrap_or(default_m)),
            };
            Learner::Forest(Forest::fit(data, &active, p.n_estimators, grow, spec.seed))
        }
        Hyperparams::Ada(p) => Learner::AdaBoost(AdaBoostModel::fit(data, &active, p, spec.seed)),
    };
    Ok(TrainedModel {
        spec: spec.clone(),
        schema: data.schema().to_vec(),
        dropped: drop.clone(),
        learner,
    })
}
