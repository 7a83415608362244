//! The forecasting architecture: separable GCN encoder layers with fully
//! learnable adjacencies, the FC and temporal-convolution decoders, and the
//! ablation variants (non-separable layers, kinematic-tree masking,
//! cross-body attention, hierarchy bottleneck).

pub mod config;
pub mod forward;
pub mod params;
pub mod skeleton;

pub use config::{AdjacencySharing, Connectivity, DecoderKind, ModelConfig};
pub use forward::{
    build_forward, cross_attention, fc_decode, hierarchy_apply, layer_forward, model_output,
    nonseparable_layer_forward, tcn_decode, HierarchyDirection, ParamIds, ATTENTION_LEAKY_SLOPE,
};
pub use params::{
    expected_shapes, param_count, AttentionParams, ConvParams, DecoderParams, EncoderLayer,
    HierarchyParams, LayerParams, ModelParams, NonSepLayerParams,
};
pub use skeleton::{kinematic_mask, kinematic_mask_free_entries, SkeletonSpec};

use crate::error::{Error, Result};
use crate::numerics::Tensor;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MotionRole {
    Observed,
    Future,
}

/// One window of multi-body motion: `[frames, nodes, 3]` millimeter
/// coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct MotionTensor {
    pub values: Tensor,
    pub role: MotionRole,
}

impl MotionTensor {
    pub fn new(values: Tensor, role: MotionRole) -> Result<Self> {
        if values.rank() != 3 || values.shape()[2] != 3 {
            return Err(Error::Dimension {
                op: "motion_tensor",
                left: values.shape().to_vec(),
                right: vec![0, 0, 3],
            });
        }
        if !values.all_finite() {
            return Err(Error::NonFinite {
                op: "motion_tensor",
                message: "motion coordinates must be finite".into(),
            });
        }
        Ok(MotionTensor { values, role })
    }

    pub fn observed(values: Tensor) -> Result<Self> {
        Self::new(values, MotionRole::Observed)
    }

    pub fn frames(&self) -> usize {
        self.values.shape()[0]
    }

    pub fn nodes(&self) -> usize {
        self.values.shape()[1]
    }
}

/// Full pipeline on one observed window: frequency encoding, GCN encoder,
/// decoder, inverse transform, optional global residual.
pub fn model_forward(
    cfg: &ModelConfig,
    params: &ModelParams,
    x_in: &MotionTensor,
) -> Result<MotionTensor> {
    let out = model_output(cfg, params, &x_in.values)?;
    MotionTensor::new(out, MotionRole::Future)
}
