use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::init::InitScheme;
use crate::numerics::Activation;

/// Whether adjacency matrices are shared across the non-mixed axis or kept
/// one-per-slice (`[T,V,V]` spatial / `[V,T,T]` temporal).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdjacencySharing {
    Shared,
    PerFrame,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Connectivity {
    /// Every adjacency entry is free.
    Learnable,
    /// Spatial adjacency constrained (by re-masking) to the kinematic tree.
    KinematicTree,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecoderKind {
    Fc,
    Tcn { kernel: usize, layers: usize },
}

/// Architecture hyperparameters of the forecasting model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub t_obs: usize,
    pub n_fut: usize,
    pub joints_per_body: usize,
    pub bodies: usize,
    /// Per-layer channel list; length `depth + 1`, first and last entries 3.
    pub channels: Vec<usize>,
    pub adjacency_sharing: AdjacencySharing,
    pub connectivity: Connectivity,
    pub separable: bool,
    pub decoder: DecoderKind,
    pub attention: bool,
    /// Body-part count for the hierarchy bottleneck (`None` disables it).
    pub hierarchy: Option<usize>,
    pub activation: Activation,
    /// Retained DCT coefficients; `None` keeps all `t_obs` of them.
    pub retain_k: Option<usize>,
    /// Map the input through the DCT before encoding (and back after
    /// decoding). Off means the encoder sees raw frames.
    pub frequency: bool,
    /// Add the last observed pose to every predicted frame.
    pub global_residual: bool,
    /// Identity skip around each encoder layer whose channel counts match.
    pub residual_skips: bool,
    pub init: InitScheme,
}

impl ModelConfig {
    /// The best-practice configuration: DCT input, separable fully-learnable
    /// GCN, variance-matched init, FC decoder.
    pub fn best_practices(
        joints_per_body: usize,
        bodies: usize,
        t_obs: usize,
        n_fut: usize,
        hidden: usize,
        depth: usize,
    ) -> Self {
        let mut channels = vec![hidden; depth + 1];
        channels[0] = 3;
        channels[depth] = 3;
        ModelConfig {
            t_obs,
            n_fut,
            joints_per_body,
            bodies,
            channels,
            adjacency_sharing: AdjacencySharing::Shared,
            connectivity: Connectivity::Learnable,
            separable: true,
            decoder: DecoderKind::Fc,
            attention: false,
            hierarchy: None,
            activation: Activation::Relu,
            retain_k: None,
            frequency: true,
            global_residual: true,
            residual_skips: true,
            init: InitScheme::Paper,
        }
    }

    pub fn depth(&self) -> usize {
        self.channels.len().saturating_sub(1)
    }

    /// Total graph nodes (`bodies * J`).
    pub fn node_count(&self) -> usize {
        self.bodies * self.joints_per_body
    }

    /// Coefficient rows entering the encoder.
    pub fn retained(&self) -> usize {
        if self.frequency {
            self.retain_k.unwrap_or(self.t_obs)
        } else {
            self.t_obs
        }
    }

    /// Node count seen by layer `layer` (1-based): the hierarchy bottleneck
    /// narrows layers strictly between the first and the last.
    pub fn layer_nodes(&self, layer: usize) -> usize {
        match self.hierarchy {
            Some(p) if layer >= 2 && layer <= self.depth().saturating_sub(1) => p,
            _ => self.node_count(),
        }
    }

    /// 1-based index of the layer after which cross-body attention runs.
    pub fn attention_after_layer(&self) -> usize {
        (self.depth() / 2).max(1)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |message: String| Err(Error::Construction { message });
        if self.t_obs == 0 || self.n_fut == 0 {
            return fail("frame counts must be positive".into());
        }
        if self.joints_per_body == 0 {
            return fail("joints_per_body must be positive".into());
        }
        if !(self.bodies == 1 || self.bodies == 2) {
            return fail(format!("bodies must be 1 or 2, got {}", self.bodies));
        }
        if self.channels.len() < 2 {
            return fail("channels must list input and output widths".into());
        }
        if self.channels[0] != 3 || *self.channels.last().unwrap() != 3 {
            return fail(format!(
                "first and last channel widths must be 3, got {:?}",
                self.channels
            ));
        }
        if self.channels.iter().any(|&c| c == 0) {
            return fail("channel widths must be positive".into());
        }
        if self.connectivity == Connectivity::KinematicTree && !self.separable {
            return fail("kinematic-tree connectivity requires the separable layer".into());
        }
        if let Some(k) = self.retain_k {
            if k == 0 || k > self.t_obs {
                return fail(format!("retain_k {k} out of range 1..={}", self.t_obs));
            }
        }
        if let Some(p) = self.hierarchy {
            if p == 0 || p >= self.node_count() {
                return fail(format!(
                    "hierarchy width {p} must lie in 1..{}",
                    self.node_count()
                ));
            }
            if self.depth() < 2 {
                return fail("hierarchy needs depth >= 2".into());
            }
        }
        if self.attention {
            if self.bodies != 2 {
                return fail("attention couples exactly two bodies".into());
            }
            let nodes_at_attention = self.layer_nodes(self.attention_after_layer());
            if nodes_at_attention % 2 != 0 {
                return fail(format!(
                    "attention needs an even node count at its insertion point, got {nodes_at_attention}"
                ));
            }
        }
        if let DecoderKind::Tcn { kernel, layers } = self.decoder {
            if kernel % 2 == 0 || kernel == 0 {
                return Err(Error::Argument {
                    op: "tcn_decode",
                    message: format!("kernel must be odd, got {kernel}"),
                });
            }
            if layers == 0 {
                return Err(Error::Argument {
                    op: "tcn_decode",
                    message: "layers must be >= 1".into(),
                });
            }
        }
        self.activation.validate()?;
        Ok(())
    }
}
