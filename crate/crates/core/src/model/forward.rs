use crate::error::{Error, Result};
use crate::frequency::{dct_apply, dct_basis};
use crate::model::config::{DecoderKind, ModelConfig};
use crate::model::params::{
    AttentionParams, DecoderParams, EncoderLayer, HierarchyParams, LayerParams, ModelParams,
    NonSepLayerParams,
};
use crate::numerics::{Activation, NodeId, Tape, Tensor};

/// LeakyReLU slope of the attention score nonlinearity.
pub const ATTENTION_LEAKY_SLOPE: f64 = 0.2;

/// Tape handles of all model parameters, in canonical order.
pub struct ParamIds {
    pub layers: Vec<LayerIds>,
    pub attention: Option<[NodeId; 4]>,
    pub hierarchy: Option<(NodeId, NodeId)>,
    pub decoder: DecoderIds,
}

pub enum LayerIds {
    Sep {
        a_s: NodeId,
        a_t: NodeId,
        w: NodeId,
    },
    NonSep {
        a_st: NodeId,
        w: NodeId,
    },
}

pub enum DecoderIds {
    Fc {
        weight: NodeId,
        bias: NodeId,
    },
    Tcn {
        convs: Vec<(Vec<NodeId>, NodeId)>,
        resample: NodeId,
        bias: NodeId,
    },
}

impl ParamIds {
    /// Push every parameter tensor as a leaf, in the canonical order of
    /// [`ModelParams::named`].
    pub fn register(tape: &mut Tape, params: &ModelParams) -> ParamIds {
        let layers = params
            .layers
            .iter()
            .map(|layer| match layer {
                EncoderLayer::Separable(p) => LayerIds::Sep {
                    a_s: tape.leaf(p.a_s.clone()),
                    a_t: tape.leaf(p.a_t.clone()),
                    w: tape.leaf(p.w.clone()),
                },
                EncoderLayer::NonSeparable(p) => LayerIds::NonSep {
                    a_st: tape.leaf(p.a_st.clone()),
                    w: tape.leaf(p.w.clone()),
                },
            })
            .collect();
        let attention = params.attention.as_ref().map(|a| {
            [
                tape.leaf(a.w1.clone()),
                tape.leaf(a.w2.clone()),
                tape.leaf(a.w3.clone()),
                tape.leaf(a.w4.clone()),
            ]
        });
        let hierarchy = params
            .hierarchy
            .as_ref()
            .map(|h| (tape.leaf(h.down.clone()), tape.leaf(h.up.clone())));
        let decoder = match &params.decoder {
            DecoderParams::Fc { weight, bias } => DecoderIds::Fc {
                weight: tape.leaf(weight.clone()),
                bias: tape.leaf(bias.clone()),
            },
            DecoderParams::Tcn {
                convs,
                resample,
                bias,
            } => DecoderIds::Tcn {
                convs: convs
                    .iter()
                    .map(|c| {
                        (
                            c.taps.iter().map(|t| tape.leaf(t.clone())).collect(),
                            tape.leaf(c.bias.clone()),
                        )
                    })
                    .collect(),
                resample: tape.leaf(resample.clone()),
                bias: tape.leaf(bias.clone()),
            },
        };
        ParamIds {
            layers,
            attention,
            hierarchy,
            decoder,
        }
    }

    /// Rebuild the structure from a flat id list in canonical order (the
    /// layout the finite-difference checker hands back).
    pub fn from_flat(cfg: &ModelConfig, ids: &[NodeId]) -> Result<ParamIds> {
        let mut pos = 0usize;
        let mut next = || -> Result<NodeId> {
            let id = ids.get(pos).copied().ok_or(Error::Construction {
                message: "flat parameter list shorter than the configuration requires".into(),
            });
            pos += 1;
            id
        };
        let mut layers = Vec::with_capacity(cfg.depth());
        for _ in 1..=cfg.depth() {
            if cfg.separable {
                layers.push(LayerIds::Sep {
                    a_s: next()?,
                    a_t: next()?,
                    w: next()?,
                });
            } else {
                layers.push(LayerIds::NonSep {
                    a_st: next()?,
                    w: next()?,
                });
            }
        }
        let attention = if cfg.attention {
            Some([next()?, next()?, next()?, next()?])
        } else {
            None
        };
        let hierarchy = if cfg.hierarchy.is_some() {
            Some((next()?, next()?))
        } else {
            None
        };
        let decoder = match cfg.decoder {
            DecoderKind::Fc => DecoderIds::Fc {
                weight: next()?,
                bias: next()?,
            },
            DecoderKind::Tcn { kernel, layers } => {
                let mut convs = Vec::with_capacity(layers);
                for _ in 0..layers {
                    let mut taps = Vec::with_capacity(kernel);
                    for _ in 0..kernel {
                        taps.push(next()?);
                    }
                    convs.push((taps, next()?));
                }
                DecoderIds::Tcn {
                    convs,
                    resample: next()?,
                    bias: next()?,
                }
            }
        };
        if pos != ids.len() {
            return Err(Error::Construction {
                message: format!("{} parameter tensors but config needs {pos}", ids.len()),
            });
        }
        Ok(ParamIds {
            layers,
            attention,
            hierarchy,
            decoder,
        })
    }

    /// Ids back in canonical order (aligned with [`ModelParams::named`]).
    pub fn flat(&self) -> Vec<NodeId> {
        let mut out = Vec::new();
        for layer in &self.layers {
            match layer {
                LayerIds::Sep { a_s, a_t, w } => out.extend([*a_s, *a_t, *w]),
                LayerIds::NonSep { a_st, w } => out.extend([*a_st, *w]),
            }
        }
        if let Some(a) = &self.attention {
            out.extend(*a);
        }
        if let Some((down, up)) = self.hierarchy {
            out.extend([down, up]);
        }
        match &self.decoder {
            DecoderIds::Fc { weight, bias } => out.extend([*weight, *bias]),
            DecoderIds::Tcn {
                convs,
                resample,
                bias,
            } => {
                for (taps, conv_bias) in convs {
                    out.extend(taps.iter().copied());
                    out.push(*conv_bias);
                }
                out.extend([*resample, *bias]);
            }
        }
        out
    }
}

/// `[A, B, C_in] x [C_in, C_out] -> [A, B, C_out]` along the channel axis.
fn channel_map(tape: &mut Tape, x: NodeId, w: NodeId) -> Result<NodeId> {
    let xs = tape.value(x).shape().to_vec();
    let ws = tape.value(w).shape().to_vec();
    if xs.len() != 3 || ws.len() != 2 || xs[2] != ws[0] {
        return Err(Error::Dimension {
            op: "channel_map",
            left: xs,
            right: ws,
        });
    }
    let xr = tape.reshape(x, &[1, xs[0] * xs[1], xs[2]])?;
    let wr = tape.reshape(w, &[1, ws[0], ws[1]])?;
    let y = tape.matmul(xr, wr)?;
    tape.reshape(y, &[xs[0], xs[1], ws[1]])
}

/// Temporal mixing `y[t',v,c] = sum_t A_t[(v),t',t] x[t,v,c]`.
fn time_mix(tape: &mut Tape, x: NodeId, a_t: NodeId) -> Result<NodeId> {
    let xs = tape.value(x).shape().to_vec();
    let ats = tape.value(a_t).shape().to_vec();
    let (k, v, c) = (xs[0], xs[1], xs[2]);
    match ats.len() {
        2 => {
            if ats != [k, k] {
                return Err(Error::Dimension {
                    op: "time_mix",
                    left: xs,
                    right: ats,
                });
            }
            let ar = tape.reshape(a_t, &[1, k, k])?;
            let xr = tape.reshape(x, &[1, k, v * c])?;
            let y = tape.matmul(ar, xr)?;
            tape.reshape(y, &[k, v, c])
        }
        3 => {
            if ats != [v, k, k] {
                return Err(Error::Dimension {
                    op: "time_mix",
                    left: xs,
                    right: ats,
                });
            }
            let xp = tape.permute(x, &[1, 0, 2])?; // [V,K,C]
            let y = tape.matmul(a_t, xp)?;
            tape.permute(y, &[1, 0, 2])
        }
        _ => Err(Error::Dimension {
            op: "time_mix",
            left: xs,
            right: ats,
        }),
    }
}

/// Spatial mixing `y[t,v',c] = sum_v A_s[(t),v',v] x[t,v,c]`.
fn space_mix(tape: &mut Tape, x: NodeId, a_s: NodeId) -> Result<NodeId> {
    let xs = tape.value(x).shape().to_vec();
    let ass = tape.value(a_s).shape().to_vec();
    let (k, v) = (xs[0], xs[1]);
    match ass.len() {
        2 => {
            if ass != [v, v] {
                return Err(Error::Dimension {
                    op: "space_mix",
                    left: xs,
                    right: ass,
                });
            }
            let ar = tape.reshape(a_s, &[1, v, v])?;
            tape.matmul(ar, x)
        }
        3 => {
            if ass != [k, v, v] {
                return Err(Error::Dimension {
                    op: "space_mix",
                    left: xs,
                    right: ass,
                });
            }
            tape.matmul(a_s, x)
        }
        _ => Err(Error::Dimension {
            op: "space_mix",
            left: xs,
            right: ass,
        }),
    }
}

/// One separable layer: temporal mixing, then spatial, then channels, then
/// the activation (right-to-left application of the layer product).
pub fn separable_layer(
    tape: &mut Tape,
    x: NodeId,
    a_s: NodeId,
    a_t: NodeId,
    w: NodeId,
    activation: Activation,
) -> Result<NodeId> {
    let t = time_mix(tape, x, a_t)?;
    let s = space_mix(tape, t, a_s)?;
    let m = channel_map(tape, s, w)?;
    tape.activate(m, activation)
}

/// One non-separable layer over flattened `(t, v)` nodes.
pub fn nonseparable_layer(
    tape: &mut Tape,
    x: NodeId,
    a_st: NodeId,
    w: NodeId,
    activation: Activation,
) -> Result<NodeId> {
    let xs = tape.value(x).shape().to_vec();
    let (k, v, c) = (xs[0], xs[1], xs[2]);
    let n = k * v;
    let ast_shape = tape.value(a_st).shape().to_vec();
    if ast_shape != [n, n] {
        return Err(Error::Dimension {
            op: "nonseparable_layer",
            left: vec![n, n],
            right: ast_shape,
        });
    }
    let xr = tape.reshape(x, &[1, n, c])?;
    let ar = tape.reshape(a_st, &[1, n, n])?;
    let mixed = tape.matmul(ar, xr)?;
    let unflat = tape.reshape(mixed, &[k, v, c])?;
    let m = channel_map(tape, unflat, w)?;
    tape.activate(m, activation)
}

/// 0/1 matrix `[1, rows.len(), v]` picking the listed node rows.
fn selector(rows: std::ops::Range<usize>, v: usize) -> Tensor {
    let n = rows.len();
    let mut t = Tensor::zeros(&[1, n, v]);
    for (i, r) in rows.enumerate() {
        t.data_mut()[i * v + r] = 1.0;
    }
    t
}

/// Transposed selector `[1, v, rows.len()]`, scattering rows back.
fn embedder(rows: std::ops::Range<usize>, v: usize) -> Tensor {
    let n = rows.len();
    let mut t = Tensor::zeros(&[1, v, n]);
    for (i, r) in rows.enumerate() {
        t.data_mut()[r * n + i] = 1.0;
    }
    t
}

/// Cross-body attention on two embeddings `[T,J,C]` and `[T,M,C]`.
///
/// Scores are a broadcast sum of per-joint score maps through a LeakyReLU;
/// each body's output aggregates the *other* body's embedding under the
/// softmax weights (the transposed scores, normalized over the other axis,
/// drive the second body).
pub fn cross_attention_pair(
    tape: &mut Tape,
    b1: NodeId,
    b2: NodeId,
    w: &[NodeId; 4],
) -> Result<(NodeId, NodeId)> {
    let s1 = tape.value(b1).shape().to_vec();
    let s2 = tape.value(b2).shape().to_vec();
    if s1.len() != 3 || s2.len() != 3 || s1[0] != s2[0] || s1[2] != s2[2] {
        return Err(Error::Dimension {
            op: "cross_attention",
            left: s1,
            right: s2,
        });
    }
    let h1 = channel_map(tape, b1, w[0])?;
    let h2 = channel_map(tape, b2, w[1])?;
    let e1 = channel_map(tape, h1, w[2])?; // [T,J,1]
    let e2 = channel_map(tape, h2, w[3])?; // [T,M,1]
    let e2t = tape.permute(e2, &[0, 2, 1])?; // [T,1,M]
    let scores = tape.add(e1, e2t)?; // [T,J,M]
    let lr = tape.activate(scores, Activation::LeakyRelu(ATTENTION_LEAKY_SLOPE))?;
    let eta = tape.softmax_last(lr)?;
    let out1 = tape.matmul(eta, h2)?; // [T,J,C]
    let lr_t = tape.permute(lr, &[0, 2, 1])?; // [T,M,J]
    let eta_t = tape.softmax_last(lr_t)?;
    let out2 = tape.matmul(eta_t, h1)?; // [T,M,C]
    Ok((out1, out2))
}

/// Attention block inside the encoder: split the node axis in half, attend
/// across the halves, scatter the halves back.
fn attention_block(tape: &mut Tape, x: NodeId, w: &[NodeId; 4]) -> Result<NodeId> {
    let xs = tape.value(x).shape().to_vec();
    let v = xs[1];
    if v % 2 != 0 {
        return Err(Error::Construction {
            message: format!("attention needs an even node count, got {v}"),
        });
    }
    let half = v / 2;
    let sel1 = tape.constant(selector(0..half, v));
    let sel2 = tape.constant(selector(half..v, v));
    let b1 = tape.matmul(sel1, x)?;
    let b2 = tape.matmul(sel2, x)?;
    let (o1, o2) = cross_attention_pair(tape, b1, b2, w)?;
    let em1 = tape.constant(embedder(0..half, v));
    let em2 = tape.constant(embedder(half..v, v));
    let p1 = tape.matmul(em1, o1)?;
    let p2 = tape.matmul(em2, o2)?;
    tape.add(p1, p2)
}

/// Node-axis projection `x'[k,.,c] = M^T x[k,.,c]`.
pub fn node_project(tape: &mut Tape, x: NodeId, m: NodeId) -> Result<NodeId> {
    let xs = tape.value(x).shape().to_vec();
    let ms = tape.value(m).shape().to_vec();
    if xs.len() != 3 || ms.len() != 2 || ms[0] != xs[1] {
        return Err(Error::Dimension {
            op: "hierarchy_apply",
            left: xs,
            right: ms,
        });
    }
    let mt = tape.permute(m, &[1, 0])?;
    let mr = tape.reshape(mt, &[1, ms[1], ms[0]])?;
    tape.matmul(mr, x)
}

/// Linear slot map along axis 0: `out[n,v,c] = sum_k D[k,n] h[k,v,c] + bias[n]`.
pub fn slot_map(tape: &mut Tape, h: NodeId, weight: NodeId, bias: NodeId) -> Result<NodeId> {
    let hs = tape.value(h).shape().to_vec();
    let ws = tape.value(weight).shape().to_vec();
    if hs.len() != 3 || ws.len() != 2 || ws[0] != hs[0] {
        return Err(Error::Construction {
            message: format!("decoder weight {ws:?} does not map {hs:?} slots"),
        });
    }
    let n = ws[1];
    let wt = tape.permute(weight, &[1, 0])?;
    let wr = tape.reshape(wt, &[1, n, hs[0]])?;
    let hr = tape.reshape(h, &[1, hs[0], hs[1] * hs[2]])?;
    let y = tape.matmul(wr, hr)?;
    let yr = tape.reshape(y, &[n, hs[1], hs[2]])?;
    let br = tape.reshape(bias, &[n, 1, 1])?;
    tape.add(yr, br)
}

/// Banded 0/1 shift matrix realizing one tap of a same-padded temporal
/// convolution: `(G x)[t] = x[t + offset]`, zero outside the window.
fn shift_matrix(k_frames: usize, offset: isize) -> Tensor {
    let mut g = Tensor::zeros(&[1, k_frames, k_frames]);
    for t in 0..k_frames as isize {
        let src = t + offset;
        if src >= 0 && src < k_frames as isize {
            g.data_mut()[(t * k_frames as isize + src) as usize] = 1.0;
        }
    }
    g
}

/// Temporal-convolution decoder body: same-padded time convolutions (linear,
/// channel-mixing taps) followed by a linear `K -> N` resampling.
fn tcn_block(
    tape: &mut Tape,
    h: NodeId,
    convs: &[(Vec<NodeId>, NodeId)],
    resample: NodeId,
    bias: NodeId,
) -> Result<NodeId> {
    let mut cur = h;
    for (taps, conv_bias) in convs {
        let xs = tape.value(cur).shape().to_vec();
        let (k, v, c) = (xs[0], xs[1], xs[2]);
        let kernel = taps.len() as isize;
        let half = (kernel - 1) / 2;
        let mut acc: Option<NodeId> = None;
        for (d, &tap) in taps.iter().enumerate() {
            let g = tape.constant(shift_matrix(k, d as isize - half));
            let xr = tape.reshape(cur, &[1, k, v * c])?;
            let sh = tape.matmul(g, xr)?;
            let shr = tape.reshape(sh, &[k, v, c])?;
            let mapped = channel_map(tape, shr, tap)?;
            acc = Some(match acc {
                Some(a) => tape.add(a, mapped)?,
                None => mapped,
            });
        }
        let summed = acc.expect("kernel has at least one tap");
        let br = tape.reshape(*conv_bias, &[1, 1, c])?;
        cur = tape.add(summed, br)?;
    }
    slot_map(tape, cur, resample, bias)
}

/// Encoder stack; returns the final node and the per-layer outputs
/// (`stages[0]` is the input, `stages[l]` the post-skip output of layer `l`).
pub fn encoder_forward_ids(
    tape: &mut Tape,
    x0: NodeId,
    cfg: &ModelConfig,
    ids: &ParamIds,
) -> Result<(NodeId, Vec<NodeId>)> {
    if ids.layers.len() != cfg.depth() {
        return Err(Error::Construction {
            message: format!(
                "{} layers of parameters for depth {}",
                ids.layers.len(),
                cfg.depth()
            ),
        });
    }
    let depth = cfg.depth();
    let mut h = x0;
    let mut stages = vec![x0];
    for l in 1..=depth {
        let input = h;
        h = match &ids.layers[l - 1] {
            LayerIds::Sep { a_s, a_t, w } => {
                separable_layer(tape, h, *a_s, *a_t, *w, cfg.activation)?
            }
            LayerIds::NonSep { a_st, w } => {
                nonseparable_layer(tape, h, *a_st, *w, cfg.activation)?
            }
        };
        if cfg.residual_skips && cfg.channels[l - 1] == cfg.channels[l] {
            h = tape.add(h, input)?;
        }
        stages.push(h);
        if cfg.attention && l == cfg.attention_after_layer() {
            let w = ids.attention.as_ref().ok_or(Error::Construction {
                message: "config enables attention but parameters carry none".into(),
            })?;
            h = attention_block(tape, h, w)?;
        }
        if let Some((down, up)) = ids.hierarchy {
            if cfg.hierarchy.is_none() {
                return Err(Error::Construction {
                    message: "parameters carry a hierarchy the config does not declare".into(),
                });
            }
            if l == 1 && depth >= 2 {
                h = node_project(tape, h, down)?;
            }
            if l == depth - 1 {
                h = node_project(tape, h, up)?;
            }
        }
    }
    Ok((h, stages))
}

/// Assemble the full forward pass on `tape` from pre-registered parameter
/// ids. Returns the `[N, V, 3]` prediction node.
pub fn build_forward(
    tape: &mut Tape,
    cfg: &ModelConfig,
    ids: &ParamIds,
    x_in: &Tensor,
) -> Result<NodeId> {
    let v = cfg.node_count();
    if x_in.shape() != [cfg.t_obs, v, 3] {
        return Err(Error::Dimension {
            op: "model_forward",
            left: x_in.shape().to_vec(),
            right: vec![cfg.t_obs, v, 3],
        });
    }
    let k = cfg.retained();
    let coeffs = if cfg.frequency {
        let basis = dct_basis(cfg.t_obs)?;
        dct_apply(x_in, &basis, k)?
    } else {
        x_in.clone()
    };
    let x0 = tape.constant(coeffs);
    let (h, _) = encoder_forward_ids(tape, x0, cfg, ids)?;
    let slots = match &ids.decoder {
        DecoderIds::Fc { weight, bias } => slot_map(tape, h, *weight, *bias)?,
        DecoderIds::Tcn {
            convs,
            resample,
            bias,
        } => tcn_block(tape, h, convs, *resample, *bias)?,
    };
    let n = cfg.n_fut;
    let mut y = if cfg.frequency {
        let synthesis = dct_basis(n)?.synthesis(n)?; // [N, N]
        let sr = tape.constant(synthesis.reshape(&[1, n, n])?);
        let fr = tape.reshape(slots, &[1, n, v * 3])?;
        let t = tape.matmul(sr, fr)?;
        tape.reshape(t, &[n, v, 3])?
    } else {
        slots
    };
    if cfg.global_residual {
        let last = tape.constant(x_in.slice_axis0(cfg.t_obs - 1, 1)?);
        y = tape.add(y, last)?;
    }
    Ok(y)
}

/// Plain-tensor forward pass (fresh tape per call).
pub fn model_output(cfg: &ModelConfig, params: &ModelParams, x_in: &Tensor) -> Result<Tensor> {
    params.matches(cfg)?;
    let mut tape = Tape::new();
    let ids = ParamIds::register(&mut tape, params);
    let out = build_forward(&mut tape, cfg, &ids, x_in)?;
    Ok(tape.value(out).clone())
}

// ---------------------------------------------------------------------------
// Plain wrappers over the tape builders, for callers that hold bare tensors.
// ---------------------------------------------------------------------------

/// `y = act(A_s . (A_t . x) . W)` on plain tensors. Sharing is inferred from
/// adjacency ranks (2 = shared, 3 = per-frame / per-joint).
pub fn layer_forward(x: &Tensor, p: &LayerParams, activation: Activation) -> Result<Tensor> {
    let mut tape = Tape::new();
    let x0 = tape.constant(x.clone());
    let a_s = tape.constant(p.a_s.clone());
    let a_t = tape.constant(p.a_t.clone());
    let w = tape.constant(p.w.clone());
    let y = separable_layer(&mut tape, x0, a_s, a_t, w, activation)?;
    Ok(tape.value(y).clone())
}

pub fn nonseparable_layer_forward(
    x: &Tensor,
    p: &NonSepLayerParams,
    activation: Activation,
) -> Result<Tensor> {
    let mut tape = Tape::new();
    let x0 = tape.constant(x.clone());
    let a_st = tape.constant(p.a_st.clone());
    let w = tape.constant(p.w.clone());
    let y = nonseparable_layer(&mut tape, x0, a_st, w, activation)?;
    Ok(tape.value(y).clone())
}

/// Attend body 1 over body 2 and vice versa; returns both re-weighted
/// embeddings.
pub fn cross_attention(
    b1: &Tensor,
    b2: &Tensor,
    p: &AttentionParams,
) -> Result<(Tensor, Tensor)> {
    let mut tape = Tape::new();
    let i1 = tape.constant(b1.clone());
    let i2 = tape.constant(b2.clone());
    let w = [
        tape.constant(p.w1.clone()),
        tape.constant(p.w2.clone()),
        tape.constant(p.w3.clone()),
        tape.constant(p.w4.clone()),
    ];
    let (o1, o2) = cross_attention_pair(&mut tape, i1, i2, &w)?;
    Ok((tape.value(o1).clone(), tape.value(o2).clone()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HierarchyDirection {
    Down,
    Up,
}

/// Node-axis linear map with the down or up matrix.
pub fn hierarchy_apply(
    x: &Tensor,
    p: &HierarchyParams,
    direction: HierarchyDirection,
) -> Result<Tensor> {
    let m = match direction {
        HierarchyDirection::Down => &p.down,
        HierarchyDirection::Up => &p.up,
    };
    let mut tape = Tape::new();
    let x0 = tape.constant(x.clone());
    let mid = tape.constant(m.clone());
    let y = node_project(&mut tape, x0, mid)?;
    Ok(tape.value(y).clone())
}

/// `out[n,v,c] = sum_k D[k,n] h[k,v,c] + bias[n]` on plain tensors.
pub fn fc_decode(h: &Tensor, weight: &Tensor, bias: &Tensor) -> Result<Tensor> {
    let mut tape = Tape::new();
    let h0 = tape.constant(h.clone());
    let w = tape.constant(weight.clone());
    let b = tape.constant(bias.clone());
    let y = slot_map(&mut tape, h0, w, b)?;
    Ok(tape.value(y).clone())
}

/// Temporal-convolution decoder on plain tensors.
pub fn tcn_decode(
    h: &Tensor,
    convs: &[crate::model::params::ConvParams],
    resample: &Tensor,
    bias: &Tensor,
) -> Result<Tensor> {
    if let Some(c) = convs.first() {
        if c.taps.len() % 2 == 0 {
            return Err(Error::Argument {
                op: "tcn_decode",
                message: format!("kernel must be odd, got {}", c.taps.len()),
            });
        }
    }
    let mut tape = Tape::new();
    let h0 = tape.constant(h.clone());
    let conv_ids: Vec<(Vec<NodeId>, NodeId)> = convs
        .iter()
        .map(|c| {
            (
                c.taps.iter().map(|t| tape.constant(t.clone())).collect(),
                tape.constant(c.bias.clone()),
            )
        })
        .collect();
    let r = tape.constant(resample.clone());
    let b = tape.constant(bias.clone());
    let y = tcn_block(&mut tape, h0, &conv_ids, r, b)?;
    Ok(tape.value(y).clone())
}
