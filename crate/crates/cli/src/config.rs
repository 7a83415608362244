use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use duet_core::data::{NormalizeMode, SplitConfig, SynthStyle};
use duet_core::init::InitScheme;
use duet_core::model::{ModelConfig, SkeletonSpec};
use duet_core::training::TrainConfig;
use duet_core::{Error, Result};

/// Version tag every config file must carry.
pub const CONFIG_VERSION: u32 = 1;

/// Where the skeleton comes from: a shipped default, a generated chain, or a
/// JSON file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SkeletonRef {
    Expi18,
    Toy3,
    Chain { joints: usize, bodies: usize },
    Path(PathBuf),
}

impl SkeletonRef {
    pub fn load(&self) -> Result<SkeletonSpec> {
        let spec = match self {
            SkeletonRef::Expi18 => SkeletonSpec::expi18(),
            SkeletonRef::Toy3 => SkeletonSpec::toy3(),
            SkeletonRef::Chain { joints, bodies } => SkeletonSpec::chain(*joints, *bodies),
            SkeletonRef::Path(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Error::io(path.display().to_string(), e))?;
                SkeletonSpec::from_json(&text)?
            }
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// Synthesize the dataset in-process instead of reading a CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthDataConfig {
    pub sequences: usize,
    pub frames: usize,
    #[serde(default)]
    pub style: Option<SynthStyle>,
    /// Generator seed; defaults to the run seed.
    #[serde(default)]
    pub seed: Option<u64>,
}

/// Keep training windows whose start is at most `train_max_start` and
/// evaluate on those starting at or after `eval_min_start`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowHoldout {
    pub train_max_start: usize,
    pub eval_min_start: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataConfig {
    /// Sequence CSV path; exclusive with `synth`.
    #[serde(default)]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub synth: Option<SynthDataConfig>,
    pub skeleton: SkeletonRef,
    #[serde(default = "default_stride")]
    pub stride: usize,
    #[serde(default = "default_normalization")]
    pub normalization: NormalizeMode,
    /// Sequence-level split; train side feeds training, test side evaluation.
    #[serde(default)]
    pub split: Option<SplitConfig>,
    /// Window-level holdout applied after (or instead of) the split.
    #[serde(default)]
    pub window_holdout: Option<WindowHoldout>,
}

fn default_stride() -> usize {
    1
}

fn default_normalization() -> NormalizeMode {
    NormalizeMode::CenterLast
}

impl DataConfig {
    pub fn validate(&self) -> Result<()> {
        match (&self.path, &self.synth) {
            (Some(_), Some(_)) => Err(Error::Config {
                message: "data.path and data.synth are mutually exclusive".into(),
            }),
            (None, None) => Err(Error::Config {
                message: "data needs either a path or a synth block".into(),
            }),
            _ => Ok(()),
        }
    }
}

/// Top-level config for `train` and `eval`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub version: u32,
    #[serde(default)]
    pub seed: u64,
    pub model: ModelConfig,
    #[serde(default)]
    pub train: TrainConfig,
    pub data: DataConfig,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
}

/// One ablation row mirroring the practice-combination flags.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VariantRow {
    pub name: String,
    pub freq_enc: bool,
    pub learnable: bool,
    pub separable: bool,
    pub init: bool,
    pub attention: bool,
    pub hierarchy: bool,
    pub fc: bool,
}

impl VariantRow {
    /// Resolve the flag vector against a base architecture.
    pub fn apply(&self, base: &ModelConfig) -> ModelConfig {
        let mut cfg = base.clone();
        cfg.frequency = self.freq_enc;
        cfg.separable = self.separable;
        cfg.connectivity = if self.learnable {
            duet_core::model::Connectivity::Learnable
        } else {
            duet_core::model::Connectivity::KinematicTree
        };
        cfg.init = if self.init {
            InitScheme::Paper
        } else {
            InitScheme::He
        };
        cfg.attention = self.attention;
        cfg.hierarchy = if self.hierarchy {
            Some(base.hierarchy.unwrap_or(base.joints_per_body.max(2)))
        } else {
            None
        };
        cfg.decoder = if self.fc {
            duet_core::model::DecoderKind::Fc
        } else {
            duet_core::model::DecoderKind::Tcn {
                kernel: 3,
                layers: 2,
            }
        };
        cfg
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AblateConfig {
    pub version: u32,
    #[serde(default)]
    pub seed: u64,
    pub model: ModelConfig,
    #[serde(default)]
    pub train: TrainConfig,
    pub data: DataConfig,
    pub variants: Vec<VariantRow>,
    #[serde(default = "default_horizons")]
    pub horizons_ms: Vec<usize>,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
}

pub fn default_horizons() -> Vec<usize> {
    vec![200, 400, 600, 1000]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeConfig {
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_input_std")]
    pub input_std: f64,
}

fn default_trials() -> usize {
    100
}

fn default_input_std() -> f64 {
    1.0
}

impl Default for ProbeConfig {
    fn default() -> Self {
        ProbeConfig {
            trials: default_trials(),
            input_std: default_input_std(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitStudyConfig {
    pub version: u32,
    #[serde(default)]
    pub seed: u64,
    pub model: ModelConfig,
    #[serde(default)]
    pub train: TrainConfig,
    pub data: DataConfig,
    pub schemes: Vec<InitScheme>,
    pub seeds: Vec<u64>,
    #[serde(default = "default_horizons")]
    pub horizons_ms: Vec<usize>,
    #[serde(default)]
    pub probe: ProbeConfig,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
}

/// Parse a JSON config file; unknown keys are errors.
pub fn load_config<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Config {
        message: format!("cannot read config {}: {e}", path.display()),
    })?;
    let value: T = serde_json::from_str(&text).map_err(|e| Error::Config {
        message: format!("{}: {e}", path.display()),
    })?;
    Ok(value)
}

pub fn check_version(version: u32) -> Result<()> {
    if version != CONFIG_VERSION {
        return Err(Error::Config {
            message: format!("config version {version} unsupported (expected {CONFIG_VERSION})"),
        });
    }
    Ok(())
}
