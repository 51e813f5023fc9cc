use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::data::SchemaHints;
use crate::error::{Error, Result};
use crate::global_explain::{GlobalConfig, DEFAULT_BUDGET, DEFAULT_POOL_SIZE, DEFAULT_TOP_K};
use crate::lime::LimeConfig;
use crate::limeout::LimeOutConfig;
use crate::metrics::{GroupSpec, PeMode};
use crate::models::{Family, Hyperparams, ModelSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub data: PathBuf,
    pub target: String,
    /// Target value treated as the positive class.
    pub positive_label: Option<String>,
    pub column_kinds: SchemaHints,
    /// Sensitive feature to its privileged values.
    pub sensitive: BTreeMap<String, BTreeSet<String>>,
    pub models: Vec<Family>,
    /// Hyperparameter overrides keyed `name` (every model) or `family.name`.
    pub hyperparams: BTreeMap<String, f64>,
    pub k: usize,
    pub lime: LimeConfig,
    pub budget: usize,
    pub pool_size: usize,
    pub train_fraction: f64,
    pub smote: bool,
    pub repetitions: usize,
    pub seed: u64,
    pub pe_mode: PeMode,
    pub out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            data: PathBuf::new(),
            target: String::new(),
            positive_label: None,
            column_kinds: SchemaHints::default(),
            sensitive: BTreeMap::new(),
            models: vec![Family::Lr],
            hyperparams: BTreeMap::new(),
            k: DEFAULT_TOP_K,
            lime: LimeConfig::default(),
            budget: DEFAULT_BUDGET,
            pool_size: DEFAULT_POOL_SIZE,
            train_fraction: 0.7,
            smote: true,
            repetitions: 10,
            seed: 0,
            pe_mode: PeMode::Paper,
            out: None,
        }
    }
}

impl RunConfig {
    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    /// Checks everything that does not need the dataset.
    pub fn validate(&self) -> Result<()> {
        if self.target.is_empty() {
            return Err(Error::Config("no target column given".into()));
        }
        if self.sensitive.is_empty() {
            return Err(Error::Config("at least one sensitive feature is required".into()));
        }
        if self.k < 2 {
            return Err(Error::Config(format!("k must be at least 2, got {}", self.k)));
        }
        if self.repetitions < 1 {
            return Err(Error::Config("repetitions must be at least 1".into()));
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::Config(format!(
                "train_fraction must lie in (0, 1), got {}",
                self.train_fraction
            )));
        }
        if self.models.is_empty() {
            return Err(Error::Config("no model family selected".into()));
        }
        let unique: BTreeSet<Family> = self.models.iter().copied().collect();
        if unique.len() != self.models.len() {
            return Err(Error::Config("a model family is listed twice".into()));
        }
        self.explain_config().validate()?;
        for family in &self.models {
            self.model_spec(*family)?;
        }
        Ok(())
    }

    pub fn explain_config(&self) -> GlobalConfig {
        GlobalConfig {
            lime: self.lime.clone(),
            budget: self.budget,
            pool_size: self.pool_size,
            k: self.k,
        }
    }

    pub fn limeout_config(&self) -> LimeOutConfig {
        LimeOutConfig {
            explain: self.explain_config(),
            train_fraction: self.train_fraction,
            smote: self.smote,
            pe_mode: self.pe_mode,
        }
    }

    pub fn groups(&self) -> Vec<GroupSpec> {
        self.sensitive
            .iter()
            .map(|(feature, privileged)| GroupSpec::new(feature.clone(), privileged.iter().cloned()))
            .collect()
    }

    /// Default hyperparameters of `family` with the applicable overrides.
    pub fn model_spec(&self, family: Family) -> Result<ModelSpec> {
        let mut params = Hyperparams::defaults(family);
        for (key, &value) in &self.hyperparams {
            match key.split_once('.') {
                Some((scope, name)) => {
                    if scope.parse::<Family>()? == family {
                        params.set(name, value)?;
                    }
                }
                None => params.set(key, value)?,
            }
        }
        params.validate()?;
        Ok(ModelSpec { params, seed: self.seed })
    }
}

/// Parses `feature=v1|v2,feature2=v3` into a sensitive map.
///
/// A comma-separated piece without `=` continues the previous value, so
/// category names that contain commas survive.
pub fn parse_sensitive(spec: &str) -> Result<BTreeMap<String, BTreeSet<String>>> {
    let mut pieces: Vec<String> = Vec::new();
    for piece in spec.split(',') {
        match pieces.last_mut() {
            Some(last) if !piece.contains('=') => {
                last.push(',');
                last.push_str(piece);
            }
            _ => pieces.push(piece.to_string()),
        }
    }
    let mut map = BTreeMap::new();
    for piece in pieces {
        let (feature, values) = piece
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("sensitive entry `{piece}` is not of the form feature=value")))?;
        let feature = feature.trim();
        if feature.is_empty() {
            return Err(Error::Config(format!("sensitive entry `{piece}` names no feature")));
        }
        let values: BTreeSet<String> = values.split('|').filter(|v| !v.is_empty()).map(str::to_string).collect();
        if values.is_empty() {
            return Err(Error::Config(format!("sensitive feature `{feature}` lists no privileged value")));
        }
        if map.insert(feature.to_string(), values).is_some() {
            return Err(Error::Config(format!("sensitive feature `{feature}` given twice")));
        }
    }
    Ok(map)
}
