//! Run configuration for training and evaluation.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::adam::{cosine_lr, AdamConfig};
use crate::datagen::Benchmark;
use crate::embedding::{EmbeddingKind, SpectralDictionary};
use crate::error::{Error, Result};
use crate::model::ModelSpec;
use crate::nn::Activation;

/// Environment variable that overrides the default seed.
pub const SEED_ENV: &str = "SEDONET_SEED";

/// Which trunk embedding a run uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    /// Raw normalized coordinates.
    DeepONet,
    /// Integer-frequency sin/cos features.
    FedONet,
    /// Chebyshev tensor features.
    SedONet,
}

impl ModelKind {
    pub const ALL: [ModelKind; 3] = [ModelKind::DeepONet, ModelKind::FedONet, ModelKind::SedONet];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::DeepONet => "deeponet",
            ModelKind::FedONet => "fedonet",
            ModelKind::SedONet => "sedonet",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }

    fn embedding(self) -> EmbeddingKind {
        match self {
            ModelKind::DeepONet => EmbeddingKind::Identity,
            ModelKind::FedONet => EmbeddingKind::Fourier,
            ModelKind::SedONet => EmbeddingKind::Chebyshev,
        }
    }
}

/// Learning rate as a function of the optimizer step.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum LrSchedule {
    #[default]
    Constant,
    /// Half-cosine from `lr` down to `lr * final_ratio` at the last step.
    Cosine { final_ratio: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub batch_size: usize,
    pub epochs: usize,
    #[serde(default)]
    pub schedule: LrSchedule,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        let a = AdamConfig::default();
        Self {
            lr: a.lr,
            beta1: a.beta1,
            beta2: a.beta2,
            eps: a.eps,
            batch_size: 64,
            epochs: 200,
            schedule: LrSchedule::Constant,
        }
    }
}

impl OptimizerConfig {
    pub fn adam(&self) -> AdamConfig {
        AdamConfig { lr: self.lr, beta1: self.beta1, beta2: self.beta2, eps: self.eps }
    }

    /// Learning rate for `step` out of `total`.
    pub fn lr_at(&self, step: usize, total: usize) -> f64 {
        match self.schedule {
            LrSchedule::Constant => self.lr,
            LrSchedule::Cosine { final_ratio } => cosine_lr(self.lr, final_ratio, step, total),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunPaths {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub checkpoint: Option<PathBuf>,
}

/// Everything that determines a training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub benchmark: Benchmark,
    pub model: ModelKind,
    pub k_x: usize,
    pub k_t: usize,
    pub d_trunk: usize,
    pub branch_hidden: Vec<usize>,
    pub trunk_hidden: Vec<usize>,
    /// Latent width `p`.
    pub latent: usize,
    pub activation: Activation,
    #[serde(default)]
    pub optimizer: OptimizerConfig,
    /// Defaults to [`default_seed`] when absent from JSON.
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub paths: RunPaths,
}

impl RunConfig {
    /// Desk-scale defaults for `model` on `benchmark`.
    pub fn preset(benchmark: Benchmark, model: ModelKind) -> Self {
        let (k_x, k_t, d_trunk) = match model {
            ModelKind::DeepONet => (1, 1, 2),
            ModelKind::FedONet | ModelKind::SedONet => (10, 10, 100),
        };
        Self {
            benchmark,
            model,
            k_x,
            k_t,
            d_trunk,
            branch_hidden: vec![128, 128],
            trunk_hidden: vec![128, 128],
            latent: 64,
            activation: Activation::Tanh,
            optimizer: OptimizerConfig::default(),
            seed: default_seed(),
            paths: RunPaths::default(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads and validates a JSON config, including that referenced files exist.
    pub fn load(path: &Path) -> Result<Self> {
        let cfg = Self::from_json(&std::fs::read_to_string(path)?)?;
        if let Some(p) = &cfg.paths.data {
            if !p.exists() {
                return Err(Error::Config(format!("data file {} does not exist", p.display())));
            }
        }
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let o = &self.optimizer;
        if !(o.lr > 0.0 && o.lr.is_finite()) {
            return Err(Error::Config(format!("learning rate must be positive, got {}", o.lr)));
        }
        if !(0.0..1.0).contains(&o.beta1) || !(0.0..1.0).contains(&o.beta2) {
            return Err(Error::Config("Adam betas must lie in [0, 1)".into()));
        }
        if !(o.eps > 0.0) {
            return Err(Error::Config("Adam epsilon must be positive".into()));
        }
        if let LrSchedule::Cosine { final_ratio } = o.schedule {
            if !(0.0..=1.0).contains(&final_ratio) {
                return Err(Error::Config("cosine final_ratio must lie in [0, 1]".into()));
            }
        }
        if o.batch_size == 0 {
            return Err(Error::Config("batch size must be at least 1".into()));
        }
        if self.latent == 0 || self.branch_hidden.contains(&0) || self.trunk_hidden.contains(&0) {
            return Err(Error::Config("layer widths must be positive".into()));
        }
        self.dictionary()?;
        Ok(())
    }

    /// Embedding over the benchmark's coordinate domains.
    pub fn dictionary(&self) -> Result<SpectralDictionary> {
        let (dx, dt) = self.benchmark.domains();
        match self.model {
            ModelKind::DeepONet => Ok(SpectralDictionary::identity(dx, dt)),
            kind => SpectralDictionary::new(kind.embedding(), self.k_x, self.k_t, self.d_trunk, dx, dt),
        }
    }

    /// Architecture for `sensors` branch inputs.
    pub fn model_spec(&self, sensors: usize) -> Result<ModelSpec> {
        Ok(ModelSpec {
            sensors,
            branch_hidden: self.branch_hidden.clone(),
            trunk_hidden: self.trunk_hidden.clone(),
            latent: self.latent,
            activation: self.activation,
            dict: self.dictionary()?,
            coord_dim: 2,
        })
    }
}

/// `SEDONET_SEED` if set and parseable, else 0.
pub fn default_seed() -> u64 {
    std::env::var(SEED_ENV).ok().and_then(|s| s.trim().parse().ok()).unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip() {
        let cfg = RunConfig::preset(Benchmark::Burgers1d, ModelKind::SedONet);
        assert_eq!(RunConfig::from_json(&cfg.to_json()).unwrap(), cfg);
    }

    #[test]
    fn defaults_match_documented_budget() {
        let cfg = RunConfig::preset(Benchmark::AdvDiff1d, ModelKind::DeepONet);
        assert_eq!(cfg.optimizer.batch_size, 64);
        assert_eq!(cfg.optimizer.epochs, 200);
        assert_eq!(cfg.optimizer.lr, 1e-3);
        assert_eq!(cfg.latent, 64);
    }

    #[test]
    fn omitted_seed_and_optimizer_take_defaults() {
        let text = r#"{"benchmark":"burgers","model":"sedonet","k_x":4,"k_t":4,"d_trunk":16,
            "branch_hidden":[8],"trunk_hidden":[8],"latent":4,"activation":"tanh"}"#;
        let cfg = RunConfig::from_json(text).unwrap();
        assert_eq!(cfg.optimizer, OptimizerConfig::default());
        assert_eq!(cfg.seed, default_seed());
    }

    #[test]
    fn cosine_schedule_parses_and_decays() {
        let o: OptimizerConfig = serde_json::from_str(
            r#"{"lr":0.01,"beta1":0.9,"beta2":0.999,"eps":1e-8,"batch_size":8,"epochs":10,
                "schedule":{"kind":"cosine","final_ratio":0.01}}"#,
        )
        .unwrap();
        assert_eq!(o.lr_at(0, 11), 0.01);
        assert!((o.lr_at(10, 11) - 1e-4).abs() < 1e-18);
        assert_eq!(OptimizerConfig::default().lr_at(5, 11), 1e-3);
    }

    #[test]
    fn bad_values_are_config_errors() {
        let mut cfg = RunConfig::preset(Benchmark::Burgers1d, ModelKind::SedONet);
        cfg.optimizer.lr = -1.0;
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
        let mut cfg = RunConfig::preset(Benchmark::Burgers1d, ModelKind::SedONet);
        cfg.d_trunk = 0;
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
        assert!(matches!(RunConfig::from_json("{\"benchmark\": 3}"), Err(Error::Config(_))));
    }

    #[test]
    fn missing_data_file_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = RunConfig::preset(Benchmark::Burgers1d, ModelKind::SedONet);
        cfg.paths.data = Some(dir.path().join("nope.sedo"));
        let p = dir.path().join("cfg.json");
        std::fs::write(&p, cfg.to_json()).unwrap();
        assert!(matches!(RunConfig::load(&p), Err(Error::Config(_))));
    }

    #[test]
    fn kinds_differ_only_in_trunk_input() {
        let specs: Vec<_> = ModelKind::ALL
            .iter()
            .map(|&k| RunConfig::preset(Benchmark::Burgers1d, k).model_spec(100).unwrap())
            .collect();
        for s in &specs {
            assert_eq!(s.branch_widths(), specs[0].branch_widths());
            assert_eq!(s.trunk_widths()[1..], specs[0].trunk_widths()[1..]);
        }
        assert_eq!(specs[0].trunk_widths()[0], 2);
        assert_eq!(specs[1].trunk_widths()[0], 100);
        assert_eq!(specs[2].trunk_widths()[0], 100);
    }
}
