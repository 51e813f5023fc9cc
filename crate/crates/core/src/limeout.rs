//! The dropout loop: a top-k fairness gate over a global explanation and,
//! when it fires, an averaged ensemble of models retrained without the
//! flagged sensitive features.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{self, Dataset, FeatureSchema, DEFAULT_SMOTE_NEIGHBORS};
use crate::error::{Error, Result};
use crate::global_explain::{global_explain, top_k, GlobalConfig, GlobalExplanation};
use crate::metrics::{evaluate, GroupSpec, MetricVector, PeMode};
use crate::models::{accuracy, ensure_schema, train, Classifier, ModelSpec, TrainedModel};
use crate::rng::derive_seed;

/// Least number of sensitive features in the top-k that marks a model unfair.
pub const GATE_THRESHOLD: usize = 2;

const SMOTE_STREAM: u64 = 1;
const TRAIN_STREAM: u64 = 2;
const EXPLAIN_STREAM: u64 = 3;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FairnessGateResult {
    pub deemed_unfair: bool,
    /// Sensitive features met in the top-k, in rank order.
    pub sensitive_in_topk: Vec<String>,
    pub k: usize,
}

pub fn gate(g: &GlobalExplanation, sensitive: &BTreeSet<String>, k: usize) -> Result<FairnessGateResult> {
    let sensitive_in_topk: Vec<String> = top_k(g, k)?
        .iter()
        .filter(|e| sensitive.contains(&e.feature))
        .map(|e| e.feature.clone())
        .collect();
    Ok(FairnessGateResult {
        deemed_unfair: sensitive_in_topk.len() >= GATE_THRESHOLD,
        sensitive_in_topk,
        k,
    })
}

/// Drop-sets of the pool: each flagged feature alone, then all of them,
/// with repeats removed.
pub fn dropout_sets(flagged: &[String]) -> Vec<BTreeSet<String>> {
    let mut sets: Vec<BTreeSet<String>> = flagged.iter().map(|f| BTreeSet::from([f.clone()])).collect();
    sets.push(flagged.iter().cloned().collect());
    let mut unique = Vec::with_capacity(sets.len());
    for s in sets {
        if !unique.contains(&s) {
            unique.push(s);
        }
    }
    unique
}

/// Unweighted mean of member probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleModel {
    schema: Vec<FeatureSchema>,
    members: Vec<TrainedModel>,
}

impl EnsembleModel {
    pub fn from_members(members: Vec<TrainedModel>) -> Result<Self> {
        let first = members
            .first()
            .ok_or_else(|| Error::InvalidArgument("an ensemble needs at least one member".into()))?;
        let schema = first.schema().to_vec();
        if members.iter().any(|m| m.schema() != schema.as_slice()) {
            return Err(Error::SchemaMismatch("ensemble members disagree on the schema".into()));
        }
        Ok(EnsembleModel { schema, members })
    }

    pub fn members(&self) -> &[TrainedModel] {
        &self.members
    }

    /// Dropped-feature set of each member.
    pub fn provenance(&self) -> Vec<BTreeSet<String>> {
        self.members.iter().map(|m| m.dropped_features().clone()).collect()
    }
}

impl Classifier for EnsembleModel {
    fn schema(&self) -> &[FeatureSchema] {
        &self.schema
    }

    fn proba(&self, row: &[f64]) -> f64 {
        // Running mean, so identical members reproduce their output exactly.
        let mut mean = 0.0;
        for (t, m) in self.members.iter().enumerate() {
            mean += (m.proba(row) - mean) / (t + 1) as f64;
        }
        mean
    }
}

/// Retrains `spec` once per drop-set of the gate result. Member `t`
/// (1-based) uses seed `spec.seed + t`.
pub fn build_pool(spec: &ModelSpec, train_data: &Dataset, gate_result: &FairnessGateResult) -> Result<EnsembleModel> {
    if !gate_result.deemed_unfair {
        return Err(Error::GatePassed);
    }
    let sets = dropout_sets(&gate_result.sensitive_in_topk);
    let members = sets
        .par_iter()
        .enumerate()
        .map(|(i, drop)| train(&spec.with_seed(spec.seed.wrapping_add(i as u64 + 1)), train_data, drop))
        .collect::<Result<Vec<_>>>()?;
    EnsembleModel::from_members(members)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimeOutConfig {
    pub explain: GlobalConfig,
    pub train_fraction: f64,
    pub smote: bool,
    pub pe_mode: PeMode,
}

impl Default for LimeOutConfig {
    fn default() -> Self {
        LimeOutConfig {
            explain: GlobalConfig::default(),
            train_fraction: 0.7,
            smote: true,
            pe_mode: PeMode::Paper,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelOutcome {
    pub accuracy: f64,
    pub explanation: GlobalExplanation,
    pub metrics: Vec<MetricVector>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleOutcome {
    #[serde(flatten)]
    pub outcome: ModelOutcome,
    pub member_drops: Vec<BTreeSet<String>>,
}

/// One repetition of the pipeline. `ensemble` is present iff the gate fired.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepetitionRecord {
    pub seed: u64,
    pub original: ModelOutcome,
    pub gate: FairnessGateResult,
    pub ensemble: Option<EnsembleOutcome>,
}

fn assess<C: Classifier + ?Sized>(
    model: &C,
    train_data: &Dataset,
    test: &Dataset,
    groups: &[GroupSpec],
    config: &LimeOutConfig,
    seed: u64,
) -> Result<ModelOutcome> {
    Ok(ModelOutcome {
        accuracy: accuracy(model, test)?,
        explanation: global_explain(model, train_data, test, &config.explain, derive_seed(seed, EXPLAIN_STREAM))?,
        metrics: groups
            .iter()
            .map(|g| evaluate(model, test, g, config.pe_mode))
            .collect::<Result<_>>()?,
    })
}

/// Split, balance, train, explain, gate and, when unfair, build and assess
/// the dropout ensemble. `seed` drives every random choice; the model seed
/// in `spec` is replaced by one derived from it.
pub fn run_limeout(
    spec: &ModelSpec,
    data: &Dataset,
    groups: &[GroupSpec],
    config: &LimeOutConfig,
    seed: u64,
) -> Result<RepetitionRecord> {
    let sensitive: BTreeSet<String> = groups.iter().map(|g| g.feature.clone()).collect();
    let data = data.clone().with_sensitive(sensitive.iter().cloned())?;
    for g in groups {
        g.resolve(data.schema())?;
    }
    let parts = data::split(&data, config.train_fraction, seed)?;
    let train_data = if config.smote {
        data::smote(&parts.train, DEFAULT_SMOTE_NEIGHBORS, derive_seed(seed, SMOTE_STREAM))?
    } else {
        parts.train
    };
    let test = parts.test;
    let spec = spec.with_seed(derive_seed(seed, TRAIN_STREAM));
    let model = train(&spec, &train_data, &BTreeSet::new())?;
    let original = assess(&model, &train_data, &test, groups, config, seed)?;
    let gate_result = gate(&original.explanation, &sensitive, config.explain.k.min(data.n_features()))?;
    let ensemble = if gate_result.deemed_unfair {
        let pool = build_pool(&spec, &train_data, &gate_result)?;
        ensure_schema(pool.schema(), &test)?;
        Some(EnsembleOutcome {
            outcome: assess(&pool, &train_data, &test, groups, config, seed)?,
            member_drops: pool.provenance(),
        })
    } else {
        None
    };
    Ok(RepetitionRecord {
        seed,
        original,
        gate: gate_result,
        ensemble,
    })
}
