//! Perturbation sampling around an instance in the binary interpretable
//! space. Continuous features are discretized at the training quartiles.

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::data::{check_row, Dataset, FeatureKind, FeatureSchema};
use crate::error::{Error, Result};
use crate::rng::{self, Rng};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinRange {
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FeatureDistribution {
    /// Cumulative training frequencies, one entry per category.
    Categorical { cumulative: Vec<f64> },
    /// Deduplicated quartile edges; bin `k` holds `edges[k-1] < v <= edges[k]`.
    /// `ranges[k]` is the observed training range of bin `k`, `None` when empty.
    Continuous {
        edges: Vec<f64>,
        ranges: Vec<Option<BinRange>>,
        filled: Vec<BinRange>,
    },
}

impl FeatureDistribution {
    fn fit(column: &FeatureSchema, values: &[f64]) -> Self {
        match column.kind {
            FeatureKind::Categorical => {
                let mut counts = vec![0usize; column.categories.len()];
                for &v in values {
                    counts[v as usize] += 1;
                }
                let total = values.len().max(1) as f64;
                let mut acc = 0.0;
                let cumulative = counts
                    .iter()
                    .map(|&c| {
                        acc += c as f64 / total;
                        acc
                    })
                    .collect();
                FeatureDistribution::Categorical { cumulative }
            }
            FeatureKind::Continuous => {
                let mut sorted = values.to_vec();
                sorted.sort_by(f64::total_cmp);
                let mut edges: Vec<f64> = [0.25, 0.5, 0.75].iter().map(|&q| percentile(&sorted, q)).collect();
                edges.dedup();
                let mut ranges: Vec<Option<BinRange>> = vec![None; edges.len() + 1];
                for &v in &sorted {
                    let k = bin_of(&edges, v);
                    let r = ranges[k].get_or_insert(BinRange { lo: v, hi: v });
                    r.lo = r.lo.min(v);
                    r.hi = r.hi.max(v);
                }
                let filled = ranges.iter().flatten().copied().collect();
                FeatureDistribution::Continuous { edges, ranges, filled }
            }
        }
    }

    /// Interpretable code of a value: category index or quartile bin.
    pub fn code(&self, value: f64) -> usize {
        match self {
            FeatureDistribution::Categorical { .. } => value as usize,
            FeatureDistribution::Continuous { edges, .. } => bin_of(edges, value),
        }
    }

    /// Draws a replacement value from the training distribution.
    pub fn sample(&self, rng: &mut Rng) -> f64 {
        match self {
            FeatureDistribution::Categorical { cumulative } => {
                let u: f64 = rng.gen();
                let last = cumulative.len() - 1;
                cumulative.iter().position(|&c| u < c).unwrap_or(last) as f64
            }
            FeatureDistribution::Continuous { filled, .. } => {
                let bin = filled[rng.gen_range(0..filled.len())];
                if bin.hi > bin.lo {
                    bin.lo + rng.gen::<f64>() * (bin.hi - bin.lo)
                } else {
                    bin.lo
                }
            }
        }
    }
}

/// Linear-interpolation percentile of sorted data.
fn percentile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return 0.0;
    }
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

#[inline]
fn bin_of(edges: &[f64], v: f64) -> usize {
    edges.iter().take_while(|&&e| e < v).count()
}

/// Which bin or category of its feature an interpretable slot stands for.
#[derive(Debug, Clone, PartialEq)]
pub struct Slot {
    pub feature: usize,
    pub code: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InterpretableInstance {
    /// `bits[i] == 1.0` iff the sample agrees with the explained instance on
    /// feature `i`'s bin or category.
    pub bits: Vec<f64>,
}

impl InterpretableInstance {
    pub fn disagreements(&self) -> usize {
        self.bits.iter().filter(|&&b| b == 0.0).count()
    }
}

#[derive(Debug, Clone)]
pub struct Neighborhood {
    pub slots: Vec<Slot>,
    pub samples: Vec<(Vec<f64>, InterpretableInstance)>,
}

/// Training-distribution statistics used to perturb instances.
#[derive(Debug, Clone)]
pub struct TabularSampler {
    schema: Vec<FeatureSchema>,
    features: Vec<FeatureDistribution>,
}

impl TabularSampler {
    pub fn fit(train: &Dataset) -> Result<Self> {
        if train.n_rows() == 0 {
            return Err(Error::InvalidArgument("sampler needs training rows".into()));
        }
        let features = train
            .schema()
            .iter()
            .enumerate()
            .map(|(j, column)| {
                let values: Vec<f64> = train.rows().map(|r| r[j]).collect();
                FeatureDistribution::fit(column, &values)
            })
            .collect();
        Ok(TabularSampler {
            schema: train.schema().to_vec(),
            features,
        })
    }

    pub fn schema(&self) -> &[FeatureSchema] {
        &self.schema
    }

    pub fn distribution(&self, feature: usize) -> &FeatureDistribution {
        &self.features[feature]
    }

    /// Human-readable condition for the slot, e.g. `age <= 28` or `sex = Male`.
    pub fn describe(&self, slot: &Slot) -> String {
        let column = &self.schema[slot.feature];
        match &self.features[slot.feature] {
            FeatureDistribution::Categorical { .. } => {
                format!("{} = {}", column.name, column.categories[slot.code])
            }
            FeatureDistribution::Continuous { edges, .. } => {
                let k = slot.code;
                match (k.checked_sub(1).map(|i| edges[i]), edges.get(k)) {
                    (None, Some(hi)) => format!("{} <= {hi}", column.name),
                    (Some(lo), Some(hi)) => format!("{lo} < {} <= {hi}", column.name),
                    (Some(lo), None) => format!("{} > {lo}", column.name),
                    (None, None) => column.name.clone(),
                }
            }
        }
    }

    /// Draws `n` neighbours of `x`. Sample 0 is `x` itself; every other
    /// sample resamples each feature independently with probability 1/2
    /// (a uniformly random subset of features).
    pub fn sample_neighbors(&self, x: &[f64], n: usize, seed: u64) -> Result<Neighborhood> {
        if n < 1 {
            return Err(Error::InvalidArgument("need at least one neighbourhood sample".into()));
        }
        check_row(&self.schema, x)?;
        let slots: Vec<Slot> = self
            .features
            .iter()
            .enumerate()
            .map(|(feature, dist)| Slot {
                feature,
                code: dist.code(x[feature]),
            })
            .collect();
        let mut rng = rng::seeded(seed);
        let mut samples = Vec::with_capacity(n);
        samples.push((
            x.to_vec(),
            InterpretableInstance {
                bits: vec![1.0; x.len()],
            },
        ));
        for _ in 1..n {
            let mut row = x.to_vec();
            let mut bits = vec![1.0; x.len()];
            for (j, dist) in self.features.iter().enumerate() {
                if rng.gen::<bool>() {
                    row[j] = dist.sample(&mut rng);
                    if dist.code(row[j]) != slots[j].code {
                        bits[j] = 0.0;
                    }
                }
            }
            samples.push((row, InterpretableInstance { bits }));
        }
        Ok(Neighborhood { slots, samples })
    }
}
