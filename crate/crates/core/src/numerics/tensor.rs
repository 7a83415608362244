use crate::error::{Error, Result};

/// Dense row-major array of 64-bit floats.
///
/// A rank-0 tensor (empty shape) holds a single scalar. Values are treated
/// as immutable once a tensor leaves the function that built it.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor {
    shape: Vec<usize>,
    data: Vec<f64>,
}

impl Tensor {
    pub fn new(shape: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        let expected: usize = shape.iter().product();
        if data.len() != expected {
            return Err(Error::Argument {
                op: "tensor_new",
                message: format!(
                    "shape {:?} needs {} values, got {}",
                    shape,
                    expected,
                    data.len()
                ),
            });
        }
        Ok(Tensor { shape, data })
    }

    pub fn zeros(shape: &[usize]) -> Self {
        let n: usize = shape.iter().product();
        Tensor {
            shape: shape.to_vec(),
            data: vec![0.0; n],
        }
    }

    pub fn filled(shape: &[usize], value: f64) -> Self {
        let n: usize = shape.iter().product();
        Tensor {
            shape: shape.to_vec(),
            data: vec![value; n],
        }
    }

    pub fn scalar(value: f64) -> Self {
        Tensor {
            shape: vec![],
            data: vec![value],
        }
    }

    /// Identity matrix of side `n`.
    pub fn eye(n: usize) -> Self {
        let mut t = Tensor::zeros(&[n, n]);
        for i in 0..n {
            t.data[i * n + i] = 1.0;
        }
        t
    }

    pub fn from_fn(shape: &[usize], mut f: impl FnMut(&[usize]) -> f64) -> Self {
        let n: usize = shape.iter().product();
        let mut data = Vec::with_capacity(n);
        let mut idx = vec![0usize; shape.len()];
        for _ in 0..n {
            data.push(f(&idx));
            for ax in (0..shape.len()).rev() {
                idx[ax] += 1;
                if idx[ax] < shape[ax] {
                    break;
                }
                idx[ax] = 0;
            }
        }
        Tensor {
            shape: shape.to_vec(),
            data,
        }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn rank(&self) -> usize {
        self.shape.len()
    }

    pub fn numel(&self) -> usize {
        self.data.len()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub(crate) fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn is_scalar(&self) -> bool {
        self.data.len() == 1 && self.shape.iter().all(|&e| e == 1)
    }

    /// Value of a rank-0/one-element tensor.
    pub fn item(&self) -> f64 {
        debug_assert!(self.is_scalar());
        self.data[0]
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Flat offset of a multi-index.
    pub fn offset(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.shape.len());
        let mut off = 0;
        for (ax, &i) in idx.iter().enumerate() {
            debug_assert!(i < self.shape[ax]);
            off = off * self.shape[ax] + i;
        }
        off
    }

    pub fn at(&self, idx: &[usize]) -> f64 {
        self.data[self.offset(idx)]
    }

    pub fn reshape(&self, shape: &[usize]) -> Result<Tensor> {
        let n: usize = shape.iter().product();
        if n != self.data.len() {
            return Err(Error::Dimension {
                op: "reshape",
                left: self.shape.clone(),
                right: shape.to_vec(),
            });
        }
        Ok(Tensor {
            shape: shape.to_vec(),
            data: self.data.clone(),
        })
    }

    /// Axis permutation; `perm[i]` names the source axis placed at position `i`.
    pub fn permute(&self, perm: &[usize]) -> Result<Tensor> {
        if perm.len() != self.shape.len() {
            return Err(Error::Argument {
                op: "permute",
                message: format!("perm {:?} does not match rank {}", perm, self.shape.len()),
            });
        }
        let mut seen = vec![false; perm.len()];
        for &p in perm {
            if p >= perm.len() || seen[p] {
                return Err(Error::Argument {
                    op: "permute",
                    message: format!("invalid permutation {perm:?}"),
                });
            }
            seen[p] = true;
        }
        let out_shape: Vec<usize> = perm.iter().map(|&p| self.shape[p]).collect();
        let mut out = Tensor::zeros(&out_shape);
        let mut idx = vec![0usize; out_shape.len()];
        let mut src = vec![0usize; out_shape.len()];
        for o in 0..out.data.len() {
            for (i, &p) in perm.iter().enumerate() {
                src[p] = idx[i];
            }
            out.data[o] = self.data[self.offset(&src)];
            for ax in (0..out_shape.len()).rev() {
                idx[ax] += 1;
                if idx[ax] < out_shape[ax] {
                    break;
                }
                idx[ax] = 0;
            }
        }
        Ok(out)
    }

    /// Contiguous sub-tensor along axis 0.
    pub fn slice_axis0(&self, start: usize, len: usize) -> Result<Tensor> {
        if self.shape.is_empty() || start + len > self.shape[0] {
            return Err(Error::Argument {
                op: "slice_axis0",
                message: format!(
                    "slice [{start}, {}) out of bounds for shape {:?}",
                    start + len,
                    self.shape
                ),
            });
        }
        let row: usize = self.shape[1..].iter().product();
        let mut shape = self.shape.clone();
        shape[0] = len;
        Ok(Tensor {
            shape,
            data: self.data[start * row..(start + len) * row].to_vec(),
        })
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Tensor {
        Tensor {
            shape: self.shape.clone(),
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn scale(&self, c: f64) -> Tensor {
        self.map(|v| c * v)
    }

    pub fn add(&self, other: &Tensor) -> Result<Tensor> {
        broadcast_zip("add", self, other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Tensor) -> Result<Tensor> {
        broadcast_zip("sub", self, other, |a, b| a - b)
    }

    pub fn mul(&self, other: &Tensor) -> Result<Tensor> {
        broadcast_zip("mul", self, other, |a, b| a * b)
    }

    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        self.sum() / self.data.len() as f64
    }

    /// Standard deviation around the sample mean.
    pub fn std(&self) -> f64 {
        let m = self.mean();
        (self.data.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / self.data.len() as f64).sqrt()
    }

    pub fn norm2(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs_diff(&self, other: &Tensor) -> f64 {
        debug_assert_eq!(self.shape, other.shape);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Shape of the result of broadcasting `a` against `b` (extent-1 axes stretch;
/// ranks must match).
pub fn broadcast_shape(op: &'static str, a: &[usize], b: &[usize]) -> Result<Vec<usize>> {
    if a.len() != b.len() {
        return Err(Error::Dimension {
            op,
            left: a.to_vec(),
            right: b.to_vec(),
        });
    }
    a.iter()
        .zip(b)
        .map(|(&x, &y)| {
            if x == y || x == 1 || y == 1 {
                Ok(x.max(y))
            } else {
                Err(Error::Dimension {
                    op,
                    left: a.to_vec(),
                    right: b.to_vec(),
                })
            }
        })
        .collect()
}

fn broadcast_zip(
    op: &'static str,
    a: &Tensor,
    b: &Tensor,
    f: impl Fn(f64, f64) -> f64,
) -> Result<Tensor> {
    if a.shape == b.shape {
        return Ok(Tensor {
            shape: a.shape.clone(),
            data: a.data.iter().zip(&b.data).map(|(&x, &y)| f(x, y)).collect(),
        });
    }
    let shape = broadcast_shape(op, &a.shape, &b.shape)?;
    let mut out = Tensor::zeros(&shape);
    let mut idx = vec![0usize; shape.len()];
    let mut ia = vec![0usize; shape.len()];
    let mut ib = vec![0usize; shape.len()];
    for o in 0..out.data.len() {
        for ax in 0..shape.len() {
            ia[ax] = if a.shape[ax] == 1 { 0 } else { idx[ax] };
            ib[ax] = if b.shape[ax] == 1 { 0 } else { idx[ax] };
        }
        out.data[o] = f(a.data[a.offset(&ia)], b.data[b.offset(&ib)]);
        for ax in (0..shape.len()).rev() {
            idx[ax] += 1;
            if idx[ax] < shape[ax] {
                break;
            }
            idx[ax] = 0;
        }
    }
    Ok(out)
}

/// Reduce `t` (shaped like the broadcast result) back onto `target_shape` by
/// summing over the axes that were stretched from extent 1.
pub fn reduce_to_shape(t: &Tensor, target_shape: &[usize]) -> Tensor {
    if t.shape() == target_shape {
        return t.clone();
    }
    let mut out = Tensor::zeros(target_shape);
    let shape = t.shape().to_vec();
    let mut idx = vec![0usize; shape.len()];
    let mut tgt = vec![0usize; shape.len()];
    for o in 0..t.data.len() {
        for ax in 0..shape.len() {
            tgt[ax] = if target_shape[ax] == 1 { 0 } else { idx[ax] };
        }
        let off = out.offset(&tgt);
        out.data[off] += t.data[o];
        for ax in (0..shape.len()).rev() {
            idx[ax] += 1;
            if idx[ax] < shape[ax] {
                break;
            }
            idx[ax] = 0;
        }
    }
    out
}

/// Batched matrix product `[B,M,K] x [B,K,N] -> [B,M,N]`.
///
/// A batch extent of 1 on either side broadcasts against the other.
pub fn matmul_batched(a: &Tensor, b: &Tensor) -> Result<Tensor> {
    let (sa, sb) = (a.shape(), b.shape());
    let mismatch = || Error::Dimension {
        op: "matmul_batched",
        left: sa.to_vec(),
        right: sb.to_vec(),
    };
    if sa.len() != 3 || sb.len() != 3 || sa[2] != sb[1] {
        return Err(mismatch());
    }
    let (ba, bb) = (sa[0], sb[0]);
    if ba != bb && ba != 1 && bb != 1 {
        return Err(mismatch());
    }
    let batch = ba.max(bb);
    let (m, k, n) = (sa[1], sa[2], sb[2]);
    let mut out = Tensor::zeros(&[batch, m, n]);
    for bi in 0..batch {
        let pa = if ba == 1 { 0 } else { bi } * m * k;
        let pb = if bb == 1 { 0 } else { bi } * k * n;
        let po = bi * m * n;
        // i-p-j order keeps b and out accesses sequential
        for i in 0..m {
            let row = &mut out.data[po + i * n..po + (i + 1) * n];
            for p in 0..k {
                let aip = a.data[pa + i * k + p];
                if aip == 0.0 {
                    continue;
                }
                let brow = &b.data[pb + p * n..pb + (p + 1) * n];
                for (o, &bv) in row.iter_mut().zip(brow) {
                    *o += aip * bv;
                }
            }
        }
    }
    Ok(out)
}

/// `[B,M,N] x [B,K,N]^T -> [B,M,K]` without materializing the transpose.
pub(crate) fn matmul_nt(a: &Tensor, b: &Tensor) -> Result<Tensor> {
    let (sa, sb) = (a.shape(), b.shape());
    let mismatch = || Error::Dimension {
        op: "matmul_nt",
        left: sa.to_vec(),
        right: sb.to_vec(),
    };
    if sa.len() != 3 || sb.len() != 3 || sa[2] != sb[2] {
        return Err(mismatch());
    }
    let (ba, bb) = (sa[0], sb[0]);
    if ba != bb && ba != 1 && bb != 1 {
        return Err(mismatch());
    }
    let batch = ba.max(bb);
    let (m, n, k) = (sa[1], sa[2], sb[1]);
    let mut out = Tensor::zeros(&[batch, m, k]);
    for bi in 0..batch {
        let pa = if ba == 1 { 0 } else { bi } * m * n;
        let pb = if bb == 1 { 0 } else { bi } * k * n;
        let po = bi * m * k;
        for i in 0..m {
            let arow = &a.data[pa + i * n..pa + (i + 1) * n];
            for p in 0..k {
                let brow = &b.data[pb + p * n..pb + (p + 1) * n];
                let mut acc = 0.0;
                for (av, bv) in arow.iter().zip(brow) {
                    acc += av * bv;
                }
                out.data[po + i * k + p] = acc;
            }
        }
    }
    Ok(out)
}

/// `[B,M,K]^T x [B,M,N] -> [B,K,N]` without materializing the transpose.
pub(crate) fn matmul_tn(a: &Tensor, b: &Tensor) -> Result<Tensor> {
    let (sa, sb) = (a.shape(), b.shape());
    let mismatch = || Error::Dimension {
        op: "matmul_tn",
        left: sa.to_vec(),
        right: sb.to_vec(),
    };
    if sa.len() != 3 || sb.len() != 3 || sa[1] != sb[1] {
        return Err(mismatch());
    }
    let (ba, bb) = (sa[0], sb[0]);
    if ba != bb && ba != 1 && bb != 1 {
        return Err(mismatch());
    }
    let batch = ba.max(bb);
    let (m, k, n) = (sa[1], sa[2], sb[2]);
    let mut out = Tensor::zeros(&[batch, k, n]);
    for bi in 0..batch {
        let pa = if ba == 1 { 0 } else { bi } * m * k;
        let pb = if bb == 1 { 0 } else { bi } * m * n;
        let po = bi * k * n;
        for i in 0..m {
            let brow = &b.data[pb + i * n..pb + (i + 1) * n];
            for p in 0..k {
                let aip = a.data[pa + i * k + p];
                if aip == 0.0 {
                    continue;
                }
                let orow = &mut out.data[po + p * n..po + (p + 1) * n];
                for (o, &bv) in orow.iter_mut().zip(brow) {
                    *o += aip * bv;
                }
            }
        }
    }
    Ok(out)
}
