
use crate::error::{Error, Result};
use crate::init::{sample_matrix, InitSpec};
use crate::model::config::{AdjacencySharing, Connectivity, DecoderKind, ModelConfig};
use crate::model::skeleton::{kinematic_mask_free_entries, SkeletonSpec};
use crate::numerics::Tensor;

/// Learnable tensors of one separable layer: spatial adjacency, temporal
/// adjacency, channel weights.
#[derive(Clone, Debug, PartialEq)]
pub struct LayerParams {
    /// `[V,V]` when shared over frames, `[K,V,V]` per-frame.
    pub a_s: Tensor,
    /// `[K,K]` when shared over nodes, `[V,K,K]` per-joint.
    pub a_t: Tensor,
    /// `[C_in, C_out]`.
    pub w: Tensor,
}

/// Learnable tensors of one non-separable layer over flattened `(t, v)` nodes.
#[derive(Clone, Debug, PartialEq)]
pub struct NonSepLayerParams {
    /// `[K*V, K*V]`.
    pub a_st: Tensor,
    pub w: Tensor,
}

#[derive(Clone, Debug, PartialEq)]
pub enum EncoderLayer {
    Separable(LayerParams),
    NonSeparable(NonSepLayerParams),
}

/// Cross-body attention weights (`[C,C]` embeddings, `[C,1]` score maps).
#[derive(Clone, Debug, PartialEq)]
pub struct AttentionParams {
    pub w1: Tensor,
    pub w2: Tensor,
    pub w3: Tensor,
    pub w4: Tensor,
}

/// Node-axis down/up projections of the hierarchy bottleneck.
#[derive(Clone, Debug, PartialEq)]
pub struct HierarchyParams {
    /// `[V, P]`.
    pub down: Tensor,
    /// `[P, V]`.
    pub up: Tensor,
}

/// One temporal convolution: `kernel` taps of `[C,C]` channel maps plus a
/// `[C]` bias.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvParams {
    pub taps: Vec<Tensor>,
    pub bias: Tensor,
}

#[derive(Clone, Debug, PartialEq)]
pub enum DecoderParams {
    /// Linear map of `K` coefficient slots to `N` slots: `weight [K,N]`,
    /// `bias [N]`.
    Fc { weight: Tensor, bias: Tensor },
    /// Temporal convolutions followed by a linear `K -> N` resampling.
    Tcn {
        convs: Vec<ConvParams>,
        resample: Tensor,
        bias: Tensor,
    },
}

/// All learnable tensors of one model instance.
///
/// The canonical parameter order — used by `named`, `named_mut`, checkpoint
/// files, and the gradient-check flattening — is: encoder layers (each
/// `a_s, a_t, w` or `a_st, w`), attention `w1..w4`, hierarchy `down, up`,
/// decoder tensors.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelParams {
    pub layers: Vec<EncoderLayer>,
    pub attention: Option<AttentionParams>,
    pub hierarchy: Option<HierarchyParams>,
    pub decoder: DecoderParams,
}

impl ModelParams {
    /// Draw a fresh parameter set for `cfg` under its init scheme.
    pub fn init(cfg: &ModelConfig, skeleton: &SkeletonSpec, rng: &mut crate::numerics::Rng) -> Result<Self> {
        cfg.validate()?;
        let spec = InitSpec::new(cfg.init, cfg.activation);
        let k_frames = cfg.retained();
        let full_nodes = cfg.node_count();

        let mut layers = Vec::with_capacity(cfg.depth());
        for l in 1..=cfg.depth() {
            let nodes = cfg.layer_nodes(l);
            let (c_in, c_out) = (cfg.channels[l - 1], cfg.channels[l]);
            if cfg.separable {
                let a_s_shape: Vec<usize> = match cfg.adjacency_sharing {
                    AdjacencySharing::Shared => vec![nodes, nodes],
                    AdjacencySharing::PerFrame => vec![k_frames, nodes, nodes],
                };
                let a_t_shape: Vec<usize> = match cfg.adjacency_sharing {
                    AdjacencySharing::Shared => vec![k_frames, k_frames],
                    AdjacencySharing::PerFrame => vec![nodes, k_frames, k_frames],
                };
                let mut a_s = sample_matrix(spec, nodes, nodes, &a_s_shape, rng)?;
                let a_t = sample_matrix(spec, k_frames, k_frames, &a_t_shape, rng)?;
                let w = sample_matrix(spec, c_in, c_out, &[c_in, c_out], rng)?;
                if cfg.connectivity == Connectivity::KinematicTree && nodes == full_nodes {
                    let mask = crate::model::skeleton::kinematic_mask(skeleton);
                    a_s = mask_spatial(&a_s, &mask)?;
                }
                layers.push(EncoderLayer::Separable(LayerParams { a_s, a_t, w }));
            } else {
                let n = k_frames * nodes;
                let a_st = sample_matrix(spec, n, n, &[n, n], rng)?;
                let w = sample_matrix(spec, c_in, c_out, &[c_in, c_out], rng)?;
                layers.push(EncoderLayer::NonSeparable(NonSepLayerParams { a_st, w }));
            }
        }

        let attention = if cfg.attention {
            let c = cfg.channels[cfg.attention_after_layer()];
            Some(AttentionParams {
                w1: sample_matrix(spec, c, c, &[c, c], rng)?,
                w2: sample_matrix(spec, c, c, &[c, c], rng)?,
                w3: sample_matrix(spec, c, 1, &[c, 1], rng)?,
                w4: sample_matrix(spec, c, 1, &[c, 1], rng)?,
            })
        } else {
            None
        };

        let hierarchy = match cfg.hierarchy {
            Some(p) => Some(HierarchyParams {
                down: sample_matrix(spec, full_nodes, p, &[full_nodes, p], rng)?,
                up: sample_matrix(spec, p, full_nodes, &[p, full_nodes], rng)?,
            }),
            None => None,
        };

        let decoder = match cfg.decoder {
            DecoderKind::Fc => DecoderParams::Fc {
                weight: sample_matrix(spec, k_frames, cfg.n_fut, &[k_frames, cfg.n_fut], rng)?,
                bias: Tensor::zeros(&[cfg.n_fut]),
            },
            DecoderKind::Tcn { kernel, layers: n_convs } => {
                let c = *cfg.channels.last().unwrap();
                let mut convs = Vec::with_capacity(n_convs);
                for _ in 0..n_convs {
                    let mut taps = Vec::with_capacity(kernel);
                    for _ in 0..kernel {
                        taps.push(sample_matrix(spec, c, c, &[c, c], rng)?);
                    }
                    convs.push(ConvParams {
                        taps,
                        bias: Tensor::zeros(&[c]),
                    });
                }
                DecoderParams::Tcn {
                    convs,
                    resample: sample_matrix(spec, k_frames, cfg.n_fut, &[k_frames, cfg.n_fut], rng)?,
                    bias: Tensor::zeros(&[cfg.n_fut]),
                }
            }
        };

        Ok(ModelParams {
            layers,
            attention,
            hierarchy,
            decoder,
        })
    }

    /// Parameters in canonical order with dotted names.
    pub fn named(&self) -> Vec<(String, &Tensor)> {
        let mut out = Vec::new();
        for (i, layer) in self.layers.iter().enumerate() {
            let l = i + 1;
            match layer {
                EncoderLayer::Separable(p) => {
                    out.push((format!("layer{l}.a_s"), &p.a_s));
                    out.push((format!("layer{l}.a_t"), &p.a_t));
                    out.push((format!("layer{l}.w"), &p.w));
                }
                EncoderLayer::NonSeparable(p) => {
                    out.push((format!("layer{l}.a_st"), &p.a_st));
                    out.push((format!("layer{l}.w"), &p.w));
                }
            }
        }
        if let Some(a) = &self.attention {
            out.push(("attention.w1".into(), &a.w1));
            out.push(("attention.w2".into(), &a.w2));
            out.push(("attention.w3".into(), &a.w3));
            out.push(("attention.w4".into(), &a.w4));
        }
        if let Some(h) = &self.hierarchy {
            out.push(("hierarchy.down".into(), &h.down));
            out.push(("hierarchy.up".into(), &h.up));
        }
        match &self.decoder {
            DecoderParams::Fc { weight, bias } => {
                out.push(("decoder.weight".into(), weight));
                out.push(("decoder.bias".into(), bias));
            }
            DecoderParams::Tcn {
                convs,
                resample,
                bias,
            } => {
                for (c, conv) in convs.iter().enumerate() {
                    for (t, tap) in conv.taps.iter().enumerate() {
                        out.push((format!("decoder.conv{c}.tap{t}"), tap));
                    }
                    out.push((format!("decoder.conv{c}.bias"), &conv.bias));
                }
                out.push(("decoder.resample".into(), resample));
                out.push(("decoder.resample_bias".into(), bias));
            }
        }
        out
    }

    /// Mutable view in the same canonical order as [`ModelParams::named`].
    pub fn tensors_mut(&mut self) -> Vec<&mut Tensor> {
        let mut out: Vec<&mut Tensor> = Vec::new();
        for layer in self.layers.iter_mut() {
            match layer {
                EncoderLayer::Separable(p) => {
                    out.push(&mut p.a_s);
                    out.push(&mut p.a_t);
                    out.push(&mut p.w);
                }
                EncoderLayer::NonSeparable(p) => {
                    out.push(&mut p.a_st);
                    out.push(&mut p.w);
                }
            }
        }
        if let Some(a) = &mut self.attention {
            out.push(&mut a.w1);
            out.push(&mut a.w2);
            out.push(&mut a.w3);
            out.push(&mut a.w4);
        }
        if let Some(h) = &mut self.hierarchy {
            out.push(&mut h.down);
            out.push(&mut h.up);
        }
        match &mut self.decoder {
            DecoderParams::Fc { weight, bias } => {
                out.push(weight);
                out.push(bias);
            }
            DecoderParams::Tcn {
                convs,
                resample,
                bias,
            } => {
                for conv in convs.iter_mut() {
                    for tap in conv.taps.iter_mut() {
                        out.push(tap);
                    }
                    out.push(&mut conv.bias);
                }
                out.push(resample);
                out.push(bias);
            }
        }
        out
    }

    /// Total stored scalars (free and masked alike).
    pub fn stored_scalars(&self) -> usize {
        self.named().iter().map(|(_, t)| t.numel()).sum()
    }

    /// Re-apply the kinematic-tree mask to every full-node spatial adjacency.
    pub fn apply_tree_mask(&mut self, cfg: &ModelConfig, skeleton: &SkeletonSpec) -> Result<()> {
        if cfg.connectivity != Connectivity::KinematicTree {
            return Ok(());
        }
        let mask = crate::model::skeleton::kinematic_mask(skeleton);
        let full = cfg.node_count();
        for (i, layer) in self.layers.iter_mut().enumerate() {
            if cfg.layer_nodes(i + 1) != full {
                continue; // hierarchy bottleneck layers carry no tree
            }
            if let EncoderLayer::Separable(p) = layer {
                p.a_s = mask_spatial(&p.a_s, &mask)?;
            }
        }
        Ok(())
    }

    /// Rebuild the structure from named tensors in canonical order (the
    /// checkpoint representation), validating names and shapes.
    pub fn from_named_tensors(
        cfg: &ModelConfig,
        named: Vec<(String, Tensor)>,
    ) -> Result<Self> {
        let expected = expected_shapes(cfg);
        if named.len() != expected.len() {
            return Err(Error::Format {
                message: format!(
                    "checkpoint holds {} tensors, config needs {}",
                    named.len(),
                    expected.len()
                ),
            });
        }
        for ((name, tensor), (ename, eshape)) in named.iter().zip(&expected) {
            if name != ename || tensor.shape() != eshape.as_slice() {
                return Err(Error::Format {
                    message: format!(
                        "checkpoint tensor {name} {:?} where {ename} {eshape:?} expected",
                        tensor.shape()
                    ),
                });
            }
        }
        let mut it = named.into_iter().map(|(_, t)| t);
        let mut layers = Vec::with_capacity(cfg.depth());
        for _ in 1..=cfg.depth() {
            if cfg.separable {
                layers.push(EncoderLayer::Separable(LayerParams {
                    a_s: it.next().unwrap(),
                    a_t: it.next().unwrap(),
                    w: it.next().unwrap(),
                }));
            } else {
                layers.push(EncoderLayer::NonSeparable(NonSepLayerParams {
                    a_st: it.next().unwrap(),
                    w: it.next().unwrap(),
                }));
            }
        }
        let attention = if cfg.attention {
            Some(AttentionParams {
                w1: it.next().unwrap(),
                w2: it.next().unwrap(),
                w3: it.next().unwrap(),
                w4: it.next().unwrap(),
            })
        } else {
            None
        };
        let hierarchy = cfg.hierarchy.map(|_| HierarchyParams {
            down: it.next().unwrap(),
            up: it.next().unwrap(),
        });
        let decoder = match cfg.decoder {
            DecoderKind::Fc => DecoderParams::Fc {
                weight: it.next().unwrap(),
                bias: it.next().unwrap(),
            },
            DecoderKind::Tcn { kernel, layers } => {
                let mut convs = Vec::with_capacity(layers);
                for _ in 0..layers {
                    let taps = (0..kernel).map(|_| it.next().unwrap()).collect();
                    convs.push(ConvParams {
                        taps,
                        bias: it.next().unwrap(),
                    });
                }
                DecoderParams::Tcn {
                    convs,
                    resample: it.next().unwrap(),
                    bias: it.next().unwrap(),
                }
            }
        };
        Ok(ModelParams {
            layers,
            attention,
            hierarchy,
            decoder,
        })
    }

    /// Verify that the parameter shapes describe exactly `cfg`.
    pub fn matches(&self, cfg: &ModelConfig) -> Result<()> {
        let fresh_shapes = expected_shapes(cfg);
        let got: Vec<(String, Vec<usize>)> = self
            .named()
            .iter()
            .map(|(n, t)| (n.clone(), t.shape().to_vec()))
            .collect();
        if fresh_shapes != got {
            return Err(Error::Construction {
                message: format!(
                    "parameters do not match config: expected {fresh_shapes:?}, got {got:?}"
                ),
            });
        }
        Ok(())
    }
}

fn mask_spatial(a_s: &Tensor, mask: &Tensor) -> Result<Tensor> {
    if a_s.rank() == 2 {
        a_s.mul(mask)
    } else {
        let m = mask.reshape(&[1, mask.shape()[0], mask.shape()[1]])?;
        a_s.mul(&m)
    }
}

/// Canonical `(name, shape)` list for a configuration.
pub fn expected_shapes(cfg: &ModelConfig) -> Vec<(String, Vec<usize>)> {
    let k = cfg.retained();
    let v_full = cfg.node_count();
    let mut out: Vec<(String, Vec<usize>)> = Vec::new();
    for l in 1..=cfg.depth() {
        let nodes = cfg.layer_nodes(l);
        let (c_in, c_out) = (cfg.channels[l - 1], cfg.channels[l]);
        if cfg.separable {
            match cfg.adjacency_sharing {
                AdjacencySharing::Shared => {
                    out.push((format!("layer{l}.a_s"), vec![nodes, nodes]));
                    out.push((format!("layer{l}.a_t"), vec![k, k]));
                }
                AdjacencySharing::PerFrame => {
                    out.push((format!("layer{l}.a_s"), vec![k, nodes, nodes]));
                    out.push((format!("layer{l}.a_t"), vec![nodes, k, k]));
                }
            }
        } else {
            out.push((format!("layer{l}.a_st"), vec![k * nodes, k * nodes]));
        }
        out.push((format!("layer{l}.w"), vec![c_in, c_out]));
    }
    if cfg.attention {
        let c = cfg.channels[cfg.attention_after_layer()];
        out.push(("attention.w1".into(), vec![c, c]));
        out.push(("attention.w2".into(), vec![c, c]));
        out.push(("attention.w3".into(), vec![c, 1]));
        out.push(("attention.w4".into(), vec![c, 1]));
    }
    if let Some(p) = cfg.hierarchy {
        out.push(("hierarchy.down".into(), vec![v_full, p]));
        out.push(("hierarchy.up".into(), vec![p, v_full]));
    }
    match cfg.decoder {
        DecoderKind::Fc => {
            out.push(("decoder.weight".into(), vec![k, cfg.n_fut]));
            out.push(("decoder.bias".into(), vec![cfg.n_fut]));
        }
        DecoderKind::Tcn { kernel, layers } => {
            let c = *cfg.channels.last().unwrap();
            for conv in 0..layers {
                for tap in 0..kernel {
                    out.push((format!("decoder.conv{conv}.tap{tap}"), vec![c, c]));
                }
                out.push((format!("decoder.conv{conv}.bias"), vec![c]));
            }
            out.push(("decoder.resample".into(), vec![k, cfg.n_fut]));
            out.push(("decoder.resample_bias".into(), vec![cfg.n_fut]));
        }
    }
    out
}

/// Exact count of learnable scalars for a configuration.
///
/// Kinematic-tree connectivity counts only the unmasked spatial entries;
/// everything else counts its full extent.
pub fn param_count(cfg: &ModelConfig, skeleton: &SkeletonSpec) -> usize {
    let k = cfg.retained();
    let v_full = cfg.node_count();
    let tree = cfg.connectivity == Connectivity::KinematicTree;
    let free_spatial = kinematic_mask_free_entries(skeleton);
    let mut count = 0usize;
    for (name, shape) in expected_shapes(cfg) {
        let full: usize = shape.iter().product();
        let is_spatial = name.ends_with(".a_s");
        if tree && is_spatial {
            // shape is [nodes,nodes] or [K,nodes,nodes]
            let nodes = *shape.last().unwrap();
            if nodes == v_full {
                let per_slice = free_spatial;
                count += if shape.len() == 3 { k * per_slice } else { per_slice };
                continue;
            }
        }
        count += full;
    }
    count
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::init::InitScheme;
    use crate::numerics::{Activation, Rng};

    fn micro_cfg() -> ModelConfig {
        let mut cfg = ModelConfig::best_practices(3, 2, 4, 2, 3, 1);
        cfg.channels = vec![3, 3];
        cfg.residual_skips = false;
        cfg
    }

    #[test]
    fn hand_counted_micro_model() {
        // L=1, shared adjacencies, T=4, V=6, C 3->3, fc decoder K=4 -> N=2:
        // 36 + 16 + 9 + (8 + 2) = 71
        let cfg = micro_cfg();
        let skel = SkeletonSpec::toy3();
        assert_eq!(param_count(&cfg, &skel), 71);
    }

    #[test]
    fn attention_adds_2c2_plus_2c() {
        let mut base = ModelConfig::best_practices(3, 2, 4, 2, 8, 2);
        base.validate().unwrap();
        let skel = SkeletonSpec::toy3();
        let without = param_count(&base, &skel);
        base.attention = true;
        let with = param_count(&base, &skel);
        let c = base.channels[base.attention_after_layer()];
        assert_eq!(with - without, 2 * c * c + 2 * c);
    }

    #[test]
    fn count_is_monotone_in_depth() {
        let skel = SkeletonSpec::toy3();
        let mut last = 0;
        for depth in 1..=6 {
            let cfg = ModelConfig::best_practices(3, 2, 8, 4, 8, depth);
            let c = param_count(&cfg, &skel);
            assert!(c > last);
            last = c;
        }
    }

    #[test]
    fn tree_masking_reduces_count_by_masked_entries() {
        let skel = SkeletonSpec::toy3();
        let mut cfg = ModelConfig::best_practices(3, 2, 8, 4, 8, 2);
        let learnable = param_count(&cfg, &skel);
        cfg.connectivity = Connectivity::KinematicTree;
        let tree = param_count(&cfg, &skel);
        let v = cfg.node_count();
        let masked_per_layer = v * v - kinematic_mask_free_entries(&skel);
        assert_eq!(learnable - tree, cfg.depth() * masked_per_layer);
    }

    #[test]
    fn init_matches_expected_shapes_and_count() {
        let skel = SkeletonSpec::toy3();
        let mut rng = Rng::new(5);
        for (separable, attention, hierarchy, decoder) in [
            (true, false, None, DecoderKind::Fc),
            (
                false,
                true,
                Some(4),
                DecoderKind::Tcn {
                    kernel: 3,
                    layers: 2,
                },
            ),
        ] {
            let mut cfg = ModelConfig::best_practices(3, 2, 8, 4, 8, 4);
            cfg.separable = separable;
            cfg.attention = attention;
            cfg.hierarchy = hierarchy;
            cfg.decoder = decoder;
            cfg.validate().unwrap();
            let params = ModelParams::init(&cfg, &skel, &mut rng).unwrap();
            params.matches(&cfg).unwrap();
            // stored == counted when nothing is masked
            assert_eq!(params.stored_scalars(), param_count(&cfg, &skel));
        }
    }

    #[test]
    fn tree_init_is_masked_and_stays_masked() {
        let skel = SkeletonSpec::toy3();
        let mut rng = Rng::new(6);
        let mut cfg = ModelConfig::best_practices(3, 2, 8, 4, 8, 2);
        cfg.connectivity = Connectivity::KinematicTree;
        let mut params = ModelParams::init(&cfg, &skel, &mut rng).unwrap();
        let mask = crate::model::skeleton::kinematic_mask(&skel);
        let check = |params: &ModelParams| {
            for layer in &params.layers {
                if let EncoderLayer::Separable(p) = layer {
                    for (i, &m) in mask.data().iter().enumerate() {
                        if m == 0.0 {
                            assert_eq!(p.a_s.data()[i], 0.0);
                        }
                    }
                }
            }
        };
        check(&params);
        // simulate an optimizer hit on every entry, then re-mask
        for t in params.tensors_mut() {
            for v in t.data_mut() {
                *v += 0.5;
            }
        }
        params.apply_tree_mask(&cfg, &skel).unwrap();
        check(&params);
    }

    #[test]
    fn paper_spec_still_initializes_nonseparable_and_glorot_he() {
        let skel = SkeletonSpec::toy3();
        for scheme in [InitScheme::Glorot, InitScheme::He, InitScheme::NaiveUniform(0.5)] {
            let mut cfg = ModelConfig::best_practices(3, 2, 6, 3, 6, 2);
            cfg.separable = false;
            cfg.init = scheme;
            cfg.activation = Activation::Tanh;
            let mut rng = Rng::new(9);
            let params = ModelParams::init(&cfg, &skel, &mut rng).unwrap();
            params.matches(&cfg).unwrap();
        }
    }
}
