//! Synthetic datasets with known ground truth for the label.
//!
//! The label is a noisy logistic function of `sensitive_drivers` binary
//! sensitive features and one binary clean driver per entry of
//! `clean_effects`. Each clean driver has proxy columns that copy it with a
//! small flip probability, and uniform noise columns pad the schema. Every
//! binary feature takes its favourable value with probability
//! `1 - minority_rate`.

use rand::Rng;

use super::{Dataset, FeatureSchema};
use crate::error::Result;
use crate::rng;

#[derive(Debug, Clone)]
pub struct SyntheticConfig {
    pub n_rows: usize,
    pub sensitive_drivers: usize,
    /// Log-odds shift of each sensitive feature's privileged value.
    pub sensitive_effect: f64,
    /// Log-odds shift of each clean driver's favourable value.
    pub clean_effects: Vec<f64>,
    pub proxies_per_driver: usize,
    /// Probability that a proxy cell disagrees with its driver.
    pub proxy_flip: f64,
    pub noise_features: usize,
    pub minority_rate: f64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            n_rows: 1000,
            sensitive_drivers: 2,
            sensitive_effect: 1.2,
            clean_effects: vec![6.0, 3.0, 3.0],
            proxies_per_driver: 3,
            proxy_flip: 0.0,
            noise_features: 2,
            minority_rate: 0.15,
        }
    }
}

pub const PRIVILEGED: &str = "priv";
pub const UNPRIVILEGED: &str = "unp";
pub const FAVOURABLE: &str = "hi";
pub const UNFAVOURABLE: &str = "lo";

pub fn sensitive_name(i: usize) -> String {
    format!("s{}", i + 1)
}

/// Generates the dataset; sensitive features are declared on the result.
pub fn generate(cfg: &SyntheticConfig, seed: u64) -> Result<Dataset> {
    let mut schema = Vec::new();
    for s in 0..cfg.sensitive_drivers {
        schema.push(FeatureSchema::categorical(sensitive_name(s), [PRIVILEGED, UNPRIVILEGED]));
    }
    for c in 0..cfg.clean_effects.len() {
        schema.push(FeatureSchema::categorical(format!("c{}", c + 1), [FAVOURABLE, UNFAVOURABLE]));
        for p in 0..cfg.proxies_per_driver {
            schema.push(FeatureSchema::categorical(
                format!("c{}_proxy{}", c + 1, p + 1),
                [FAVOURABLE, UNFAVOURABLE],
            ));
        }
    }
    for z in 0..cfg.noise_features {
        schema.push(FeatureSchema::continuous(format!("noise{}", z + 1)));
    }

    let mut rng = rng::seeded(seed);
    let mut rows = Vec::with_capacity(cfg.n_rows);
    let mut target = Vec::with_capacity(cfg.n_rows);
    // Centre the log-odds so the classes stay roughly balanced.
    let favourable = 1.0 - cfg.minority_rate;
    let centre = favourable
        * (cfg.sensitive_effect * cfg.sensitive_drivers as f64 + cfg.clean_effects.iter().sum::<f64>());
    for _ in 0..cfg.n_rows {
        let mut row = Vec::with_capacity(schema.len());
        let mut logit = -centre;
        for _ in 0..cfg.sensitive_drivers {
            let unprivileged = rng.gen::<f64>() < cfg.minority_rate;
            row.push(f64::from(u8::from(unprivileged)));
            if !unprivileged {
                logit += cfg.sensitive_effect;
            }
        }
        for &effect in &cfg.clean_effects {
            let low = rng.gen::<f64>() < cfg.minority_rate;
            row.push(f64::from(u8::from(low)));
            if !low {
                logit += effect;
            }
            for _ in 0..cfg.proxies_per_driver {
                let flip = rng.gen::<f64>() < cfg.proxy_flip;
                row.push(f64::from(u8::from(low != flip)));
            }
        }
        for _ in 0..cfg.noise_features {
            row.push(rng.gen::<f64>());
        }
        let p = 1.0 / (1.0 + (-logit).exp());
        target.push(u8::from(rng.gen::<f64>() < p));
        rows.push(row);
    }
    let sensitive: Vec<String> = (0..cfg.sensitive_drivers).map(sensitive_name).collect();
    Dataset::from_rows(schema, rows, target)?
        .with_target_info("outcome", ["deny".into(), "grant".into()])
        .with_sensitive(sensitive)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shape_and_determinism() {
        let cfg = SyntheticConfig::default();
        let d = generate(&cfg, 4).unwrap();
        assert_eq!(d.n_rows(), 1000);
        assert_eq!(d.n_features(), 2 + 3 * 4 + 2);
        assert_eq!(d.sensitive().len(), 2);
        assert_eq!(d, generate(&cfg, 4).unwrap());
        let [neg, pos] = d.class_counts();
        assert!(neg > 200 && pos > 200, "{neg}/{pos}");
    }

    #[test]
    fn privileged_group_has_higher_positive_rate() {
        let d = generate(&SyntheticConfig { n_rows: 4000, ..Default::default() }, 1).unwrap();
        let rate = |v: f64| {
            let rows: Vec<usize> = (0..d.n_rows()).filter(|&i| d.row(i)[0] == v).collect();
            rows.iter().filter(|&&i| d.label(i) == 1).count() as f64 / rows.len() as f64
        };
        assert!(rate(0.0) > rate(1.0) + 0.1, "{} vs {}", rate(0.0), rate(1.0));
    }
}
