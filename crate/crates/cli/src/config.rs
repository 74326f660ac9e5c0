//! JSON experiment configuration.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use tensorcast::optim::OptimizerConfig;
use tensorcast::pipeline::{SystemConfig, SystemDesign};
use tensorcast::workload::{builtin_model, load_histogram, LookupDistribution, ModelConfig, DEFAULT_ZIPF_EXPONENT};

/// A built-in model name or a full inline model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ModelSpec {
    Name(String),
    Inline(ModelConfig),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum DistributionSpec {
    Uniform,
    Zipf {
        #[serde(default = "default_exponent")]
        exponent: f64,
    },
    Histogram {
        path: PathBuf,
    },
}

fn default_exponent() -> f64 {
    DEFAULT_ZIPF_EXPONENT
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EquivalenceSettings {
    pub instances: usize,
    pub tolerance: f64,
}

impl Default for EquivalenceSettings {
    fn default() -> Self {
        EquivalenceSettings {
            instances: 1000,
            tolerance: 1e-6,
        }
    }
}

/// Fixed traffic instance; when absent, sizes come from the generated workload.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrafficInstance {
    pub lookups: u64,
    pub outputs: u64,
    pub unique: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub model: ModelSpec,
    pub distribution: DistributionSpec,
    pub seed: u64,
    pub batches: Vec<usize>,
    pub dims: Vec<usize>,
    pub designs: Vec<SystemDesign>,
    pub system: SystemConfig,
    pub optimizer: OptimizerConfig,
    pub out_dir: PathBuf,
    pub equivalence: EquivalenceSettings,
    pub traffic: Option<TrafficInstance>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            model: ModelSpec::Name("RM1".into()),
            distribution: DistributionSpec::Zipf {
                exponent: DEFAULT_ZIPF_EXPONENT,
            },
            seed: 0,
            batches: vec![2048],
            dims: vec![64],
            designs: SystemDesign::ALL.to_vec(),
            system: SystemConfig::default(),
            optimizer: OptimizerConfig::default(),
            out_dir: PathBuf::from("out"),
            equivalence: EquivalenceSettings::default(),
            traffic: None,
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let cfg: ExperimentConfig =
            serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        Ok(cfg)
    }

    /// Loads `path` (or the defaults) and applies command-line overrides.
    pub fn resolve(path: Option<&Path>, seed: Option<u64>, out: Option<&Path>) -> Result<Self> {
        let mut cfg = match path {
            Some(p) => Self::load(p)?,
            None => Self::default(),
        };
        if let Some(s) = seed {
            cfg.seed = s;
        }
        if let Some(o) = out {
            cfg.out_dir = o.to_path_buf();
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.designs.is_empty() {
            bail!("config lists no system designs");
        }
        if self.batches.is_empty() || self.dims.is_empty() {
            bail!("config needs at least one batch size and one dim");
        }
        if self.batches.contains(&0) || self.dims.contains(&0) {
            bail!("batch sizes and dims must be positive");
        }
        self.model()?;
        self.system.validate()?;
        self.optimizer.validate()?;
        if self.equivalence.instances == 0 {
            bail!("equivalence.instances must be at least 1");
        }
        Ok(())
    }

    pub fn model(&self) -> Result<ModelConfig> {
        let m = match &self.model {
            ModelSpec::Name(name) => builtin_model(name).with_context(|| format!("unknown model `{name}`"))?,
            ModelSpec::Inline(m) => m.clone(),
        };
        m.validate()?;
        Ok(m)
    }

    pub fn distribution(&self, table_rows: u64) -> Result<LookupDistribution> {
        Ok(match &self.distribution {
            DistributionSpec::Uniform => LookupDistribution::uniform(table_rows)?,
            DistributionSpec::Zipf { exponent } => LookupDistribution::zipf(table_rows, *exponent)?,
            DistributionSpec::Histogram { path } => {
                load_histogram(path).with_context(|| format!("loading histogram {}", path.display()))?
            }
        })
    }

    /// SHA-256 of the resolved configuration as compact JSON. The output
    /// directory does not affect results and is left out.
    pub fn hash(&self) -> String {
        let keyed = ExperimentConfig {
            out_dir: PathBuf::new(),
            ..self.clone()
        };
        let bytes = serde_json::to_vec(&keyed).expect("config serializes");
        hex::encode(Sha256::digest(bytes))
    }
}
