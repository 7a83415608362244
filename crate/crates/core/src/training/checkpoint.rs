use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ModelConfig, ModelParams};
use crate::numerics::Tensor;

/// Format tag written into every checkpoint.
pub const CHECKPOINT_FORMAT: &str = "duet-checkpoint-v1";

#[derive(Serialize, Deserialize)]
struct NamedTensor {
    name: String,
    shape: Vec<usize>,
    data: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CheckpointFile {
    format: String,
    config: ModelConfig,
    params: Vec<NamedTensor>,
}

/// Serialize config plus parameters; f64 values round-trip exactly through
/// the JSON shortest-representation encoding.
pub fn checkpoint_to_string(cfg: &ModelConfig, params: &ModelParams) -> Result<String> {
    params.matches(cfg)?;
    let file = CheckpointFile {
        format: CHECKPOINT_FORMAT.to_string(),
        config: cfg.clone(),
        params: params
            .named()
            .into_iter()
            .map(|(name, t)| NamedTensor {
                name,
                shape: t.shape().to_vec(),
                data: t.data().to_vec(),
            })
            .collect(),
    };
    serde_json::to_string(&file).map_err(|e| Error::Format {
        message: format!("checkpoint serialization: {e}"),
    })
}

pub fn checkpoint_from_str(text: &str) -> Result<(ModelConfig, ModelParams)> {
    let file: CheckpointFile = serde_json::from_str(text).map_err(|e| Error::Format {
        message: format!("checkpoint parse: {e}"),
    })?;
    if file.format != CHECKPOINT_FORMAT {
        return Err(Error::Format {
            message: format!(
                "format tag {:?} does not match {CHECKPOINT_FORMAT:?}",
                file.format
            ),
        });
    }
    file.config.validate()?;
    let named = file
        .params
        .into_iter()
        .map(|t| Ok((t.name, Tensor::new(t.shape, t.data)?)))
        .collect::<Result<Vec<_>>>()?;
    let params = ModelParams::from_named_tensors(&file.config, named)?;
    Ok((file.config, params))
}

pub fn save_checkpoint(
    path: impl AsRef<Path>,
    cfg: &ModelConfig,
    params: &ModelParams,
) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, checkpoint_to_string(cfg, params)?)
        .map_err(|e| Error::io(path.display().to_string(), e))
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<(ModelConfig, ModelParams)> {
    let path = path.as_ref();
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    checkpoint_from_str(&text)
}
