use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::tensor::{matmul_batched, matmul_nt, matmul_tn, reduce_to_shape, Tensor};

/// Elementwise nonlinearity applied by the `activate` tape op.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Linear,
    Relu,
    Tanh,
    LeakyRelu(f64),
}

impl Activation {
    pub fn apply(&self, x: f64) -> f64 {
        match *self {
            Activation::Linear => x,
            Activation::Relu => {
                if x > 0.0 {
                    x
                } else {
                    0.0
                }
            }
            Activation::Tanh => x.tanh(),
            Activation::LeakyRelu(slope) => {
                if x >= 0.0 {
                    x
                } else {
                    slope * x
                }
            }
        }
    }

    /// Derivative given input `x` and output `y`.
    fn derivative(&self, x: f64, y: f64) -> f64 {
        match *self {
            Activation::Linear => 1.0,
            Activation::Relu => {
                if x > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Tanh => 1.0 - y * y,
            Activation::LeakyRelu(slope) => {
                if x >= 0.0 {
                    1.0
                } else {
                    slope
                }
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Activation::LeakyRelu(slope) = *self {
            if !(slope > 0.0 && slope < 1.0) {
                return Err(Error::Argument {
                    op: "activation",
                    message: format!("leaky_relu slope {slope} must lie in (0, 1)"),
                });
            }
        }
        Ok(())
    }
}

/// Handle to a node on a [`Tape`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct NodeId(usize);

#[derive(Clone, Debug)]
enum Op {
    Leaf,
    MatMul { a: NodeId, b: NodeId },
    Add { a: NodeId, b: NodeId },
    Mul { a: NodeId, b: NodeId },
    Scale { a: NodeId, factor: f64 },
    Activate { a: NodeId, kind: Activation },
    Reshape { a: NodeId },
    Permute { a: NodeId, perm: Vec<usize> },
    SoftmaxLast { a: NodeId },
    SumAll { a: NodeId },
    MeanAll { a: NodeId },
    SumLast { a: NodeId },
    Sqrt { a: NodeId },
}

struct Node {
    value: Tensor,
    op: Op,
    is_param: bool,
}

/// Wengert-list tape: ops evaluate eagerly on insertion, and `backward`
/// replays the list in reverse to accumulate vector-Jacobian products.
///
/// The op set is exactly what the forecasting model needs; anything else is
/// out of contract.
#[derive(Default)]
pub struct Tape {
    nodes: Vec<Node>,
}

impl Tape {
    pub fn new() -> Self {
        Tape { nodes: Vec::new() }
    }

    fn push(&mut self, value: Tensor, op: Op, is_param: bool) -> NodeId {
        self.nodes.push(Node {
            value,
            op,
            is_param,
        });
        NodeId(self.nodes.len() - 1)
    }

    /// Register a parameter tensor (gradients are reported for these).
    pub fn leaf(&mut self, t: Tensor) -> NodeId {
        self.push(t, Op::Leaf, true)
    }

    /// Register a non-parameter input.
    pub fn constant(&mut self, t: Tensor) -> NodeId {
        self.push(t, Op::Leaf, false)
    }

    pub fn value(&self, id: NodeId) -> &Tensor {
        &self.nodes[id.0].value
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Batched matrix product; batch extent 1 broadcasts.
    pub fn matmul(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        let out = matmul_batched(self.value(a), self.value(b))?;
        Ok(self.push(out, Op::MatMul { a, b }, false))
    }

    /// Elementwise sum with extent-1 broadcasting (equal ranks).
    pub fn add(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        let out = self.value(a).add(self.value(b))?;
        Ok(self.push(out, Op::Add { a, b }, false))
    }

    pub fn sub(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        let nb = self.scale(b, -1.0);
        self.add(a, nb)
    }

    /// Elementwise product; shapes must match exactly.
    pub fn mul(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        if self.value(a).shape() != self.value(b).shape() {
            return Err(Error::Dimension {
                op: "mul",
                left: self.value(a).shape().to_vec(),
                right: self.value(b).shape().to_vec(),
            });
        }
        let out = self.value(a).mul(self.value(b))?;
        Ok(self.push(out, Op::Mul { a, b }, false))
    }

    pub fn scale(&mut self, a: NodeId, factor: f64) -> NodeId {
        let out = self.value(a).scale(factor);
        self.push(out, Op::Scale { a, factor }, false)
    }

    pub fn activate(&mut self, a: NodeId, kind: Activation) -> Result<NodeId> {
        kind.validate()?;
        let out = self.value(a).map(|x| kind.apply(x));
        Ok(self.push(out, Op::Activate { a, kind }, false))
    }

    pub fn reshape(&mut self, a: NodeId, shape: &[usize]) -> Result<NodeId> {
        let out = self.value(a).reshape(shape)?;
        Ok(self.push(out, Op::Reshape { a }, false))
    }

    pub fn permute(&mut self, a: NodeId, perm: &[usize]) -> Result<NodeId> {
        let out = self.value(a).permute(perm)?;
        Ok(self.push(
            out,
            Op::Permute {
                a,
                perm: perm.to_vec(),
            },
            false,
        ))
    }

    /// Numerically-stable softmax over the last axis.
    pub fn softmax_last(&mut self, a: NodeId) -> Result<NodeId> {
        let x = self.value(a);
        if x.rank() == 0 {
            return Err(Error::Argument {
                op: "softmax_last",
                message: "softmax needs rank >= 1".into(),
            });
        }
        let last = *x.shape().last().unwrap();
        let rows = x.numel() / last;
        let mut data = x.data().to_vec();
        for r in 0..rows {
            let row = &mut data[r * last..(r + 1) * last];
            let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let mut sum = 0.0;
            for v in row.iter_mut() {
                *v = (*v - max).exp();
                sum += *v;
            }
            for v in row.iter_mut() {
                *v /= sum;
            }
        }
        let out = Tensor::new(x.shape().to_vec(), data)?;
        Ok(self.push(out, Op::SoftmaxLast { a }, false))
    }

    pub fn sum_all(&mut self, a: NodeId) -> NodeId {
        let out = Tensor::scalar(self.value(a).sum());
        self.push(out, Op::SumAll { a }, false)
    }

    pub fn mean_all(&mut self, a: NodeId) -> NodeId {
        let out = Tensor::scalar(self.value(a).mean());
        self.push(out, Op::MeanAll { a }, false)
    }

    /// Sum over the last axis: `[.., L] -> [..]`.
    pub fn sum_last(&mut self, a: NodeId) -> Result<NodeId> {
        let x = self.value(a);
        if x.rank() == 0 {
            return Err(Error::Argument {
                op: "sum_last",
                message: "sum_last needs rank >= 1".into(),
            });
        }
        let last = *x.shape().last().unwrap();
        let rows = x.numel() / last;
        let mut data = vec![0.0; rows];
        for (r, item) in data.iter_mut().enumerate() {
            *item = x.data()[r * last..(r + 1) * last].iter().sum();
        }
        let shape = x.shape()[..x.rank() - 1].to_vec();
        let out = Tensor::new(shape, data)?;
        Ok(self.push(out, Op::SumLast { a }, false))
    }

    /// Elementwise square root; inputs must be nonnegative.
    pub fn sqrt(&mut self, a: NodeId) -> Result<NodeId> {
        if self.value(a).data().iter().any(|&v| v < 0.0) {
            return Err(Error::NonFinite {
                op: "sqrt",
                message: "negative input".into(),
            });
        }
        let out = self.value(a).map(f64::sqrt);
        Ok(self.push(out, Op::Sqrt { a }, false))
    }

    /// Reverse pass from a scalar `loss` node.
    ///
    /// Visits nodes in reverse insertion order (reverse topological order for
    /// a Wengert list) exactly once. Parameter leaves the loss does not reach
    /// get zero gradients.
    pub fn backward(&self, loss: NodeId) -> Result<Gradients> {
        if !self.value(loss).is_scalar() {
            return Err(Error::Contract {
                op: "backward",
                message: format!(
                    "loss must be scalar, got shape {:?}",
                    self.value(loss).shape()
                ),
            });
        }
        let mut grads: Vec<Option<Tensor>> = vec![None; self.nodes.len()];
        grads[loss.0] = Some(Tensor::new(
            self.value(loss).shape().to_vec(),
            vec![1.0],
        )?);

        for i in (0..self.nodes.len()).rev() {
            let g = match grads[i].take() {
                Some(g) => g,
                None => continue,
            };
            match &self.nodes[i].op {
                Op::Leaf => {
                    grads[i] = Some(g); // keep for reporting
                    continue;
                }
                Op::MatMul { a, b } => {
                    let (ta, tb) = (self.value(*a), self.value(*b));
                    let da = matmul_nt(&g, tb)?;
                    self.accumulate(&mut grads, *a, sum_batch_if_needed(&da, ta.shape()))?;
                    let db = matmul_tn(ta, &g)?;
                    self.accumulate(&mut grads, *b, sum_batch_if_needed(&db, tb.shape()))?;
                }
                Op::Add { a, b } => {
                    let da = reduce_to_shape(&g, self.value(*a).shape());
                    self.accumulate(&mut grads, *a, da)?;
                    let db = reduce_to_shape(&g, self.value(*b).shape());
                    self.accumulate(&mut grads, *b, db)?;
                }
                Op::Mul { a, b } => {
                    let da = g.mul(self.value(*b))?;
                    self.accumulate(&mut grads, *a, da)?;
                    let db = g.mul(self.value(*a))?;
                    self.accumulate(&mut grads, *b, db)?;
                }
                Op::Scale { a, factor } => {
                    self.accumulate(&mut grads, *a, g.scale(*factor))?;
                }
                Op::Activate { a, kind } => {
                    let x = self.value(*a);
                    let y = &self.nodes[i].value;
                    let data: Vec<f64> = g
                        .data()
                        .iter()
                        .zip(x.data().iter().zip(y.data()))
                        .map(|(&gv, (&xv, &yv))| gv * kind.derivative(xv, yv))
                        .collect();
                    self.accumulate(&mut grads, *a, Tensor::new(x.shape().to_vec(), data)?)?;
                }
                Op::Reshape { a } => {
                    let da = g.reshape(self.value(*a).shape())?;
                    self.accumulate(&mut grads, *a, da)?;
                }
                Op::Permute { a, perm } => {
                    let mut inverse = vec![0usize; perm.len()];
                    for (pos, &src) in perm.iter().enumerate() {
                        inverse[src] = pos;
                    }
                    self.accumulate(&mut grads, *a, g.permute(&inverse)?)?;
                }
                Op::SoftmaxLast { a } => {
                    let y = &self.nodes[i].value;
                    let last = *y.shape().last().unwrap();
                    let rows = y.numel() / last;
                    let mut data = vec![0.0; y.numel()];
                    for r in 0..rows {
                        let ys = &y.data()[r * last..(r + 1) * last];
                        let gs = &g.data()[r * last..(r + 1) * last];
                        let dot: f64 = ys.iter().zip(gs).map(|(&yv, &gv)| yv * gv).sum();
                        for c in 0..last {
                            data[r * last + c] = ys[c] * (gs[c] - dot);
                        }
                    }
                    self.accumulate(&mut grads, *a, Tensor::new(y.shape().to_vec(), data)?)?;
                }
                Op::SumAll { a } => {
                    let da = Tensor::filled(self.value(*a).shape(), g.item());
                    self.accumulate(&mut grads, *a, da)?;
                }
                Op::MeanAll { a } => {
                    let n = self.value(*a).numel() as f64;
                    let da = Tensor::filled(self.value(*a).shape(), g.item() / n);
                    self.accumulate(&mut grads, *a, da)?;
                }
                Op::SumLast { a } => {
                    let shape = self.value(*a).shape().to_vec();
                    let last = *shape.last().unwrap();
                    let mut data = vec![0.0; self.value(*a).numel()];
                    for (r, &gv) in g.data().iter().enumerate() {
                        for c in 0..last {
                            data[r * last + c] = gv;
                        }
                    }
                    self.accumulate(&mut grads, *a, Tensor::new(shape, data)?)?;
                }
                Op::Sqrt { a } => {
                    let y = &self.nodes[i].value;
                    // subgradient 0 at the origin keeps gradients finite
                    let data: Vec<f64> = g
                        .data()
                        .iter()
                        .zip(y.data())
                        .map(|(&gv, &yv)| if yv > 0.0 { gv * 0.5 / yv } else { 0.0 })
                        .collect();
                    self.accumulate(&mut grads, *a, Tensor::new(y.shape().to_vec(), data)?)?;
                }
            }
        }

        Ok(Gradients {
            grads: grads
                .into_iter()
                .enumerate()
                .map(|(i, g)| {
                    if self.nodes[i].is_param {
                        Some(g.unwrap_or_else(|| Tensor::zeros(self.nodes[i].value.shape())))
                    } else {
                        None
                    }
                })
                .collect(),
        })
    }

    fn accumulate(
        &self,
        grads: &mut [Option<Tensor>],
        id: NodeId,
        delta: Tensor,
    ) -> Result<()> {
        debug_assert_eq!(self.nodes[id.0].value.shape(), delta.shape());
        grads[id.0] = Some(match grads[id.0].take() {
            Some(g) => g.add(&delta)?,
            None => delta,
        });
        Ok(())
    }
}

/// Reduce a full-batch gradient back to a broadcast operand's batch extent.
fn sum_batch_if_needed(g: &Tensor, operand_shape: &[usize]) -> Tensor {
    if g.shape()[0] == operand_shape[0] {
        return g.clone();
    }
    let target = [vec![1usize], g.shape()[1..].to_vec()].concat();
    reduce_to_shape(g, &target)
}

/// Per-node gradients produced by [`Tape::backward`].
pub struct Gradients {
    grads: Vec<Option<Tensor>>,
}

impl Gradients {
    /// Gradient of a parameter leaf (same shape as the leaf).
    pub fn of(&self, id: NodeId) -> &Tensor {
        self.grads[id.0]
            .as_ref()
            .expect("gradient requested for a non-parameter node")
    }
}
