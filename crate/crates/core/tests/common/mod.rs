//! Independent scalar-loop oracles shared by the integration suites. These
//! deliberately avoid the library's tape kernels.

use duet_core::numerics::{Activation, Tensor};

/// Triple-loop batched matmul with extent-1 batch broadcast.
pub fn matmul_oracle(a: &Tensor, b: &Tensor) -> Tensor {
    let (ba, m, k) = (a.shape()[0], a.shape()[1], a.shape()[2]);
    let (bb, _, n) = (b.shape()[0], b.shape()[1], b.shape()[2]);
    let batch = ba.max(bb);
    Tensor::from_fn(&[batch, m, n], |idx| {
        let (bi, i, j) = (idx[0], idx[1], idx[2]);
        let mut acc = 0.0;
        for p in 0..k {
            acc += a.at(&[if ba == 1 { 0 } else { bi }, i, p])
                * b.at(&[if bb == 1 { 0 } else { bi }, p, j]);
        }
        acc
    })
}

/// Five-level nested-loop evaluation of one separable layer. Adjacencies may
/// be shared (rank 2) or per-slice (rank 3).
pub fn layer_oracle(
    x: &Tensor,
    a_s: &Tensor,
    a_t: &Tensor,
    w: &Tensor,
    activation: Activation,
) -> Tensor {
    let (t_len, v_len, c_in) = (x.shape()[0], x.shape()[1], x.shape()[2]);
    let c_out = w.shape()[1];
    let at = |v: usize, tp: usize, t: usize| -> f64 {
        if a_t.rank() == 2 {
            a_t.at(&[tp, t])
        } else {
            a_t.at(&[v, tp, t])
        }
    };
    let asp = |t: usize, vp: usize, v: usize| -> f64 {
        if a_s.rank() == 2 {
            a_s.at(&[vp, v])
        } else {
            a_s.at(&[t, vp, v])
        }
    };
    // temporal, then spatial, then channels, then activation
    let y1 = Tensor::from_fn(&[t_len, v_len, c_in], |idx| {
        let (tp, v, c) = (idx[0], idx[1], idx[2]);
        (0..t_len).map(|t| at(v, tp, t) * x.at(&[t, v, c])).sum()
    });
    let y2 = Tensor::from_fn(&[t_len, v_len, c_in], |idx| {
        let (t, vp, c) = (idx[0], idx[1], idx[2]);
        (0..v_len).map(|v| asp(t, vp, v) * y1.at(&[t, v, c])).sum()
    });
    Tensor::from_fn(&[t_len, v_len, c_out], |idx| {
        let (t, v, co) = (idx[0], idx[1], idx[2]);
        let mut acc = 0.0;
        for ci in 0..c_in {
            acc += y2.at(&[t, v, ci]) * w.at(&[ci, co]);
        }
        activation.apply(acc)
    })
}

/// Kronecker product `[ma*mb, na*nb]` with `a` on the coarse block index.
pub fn kron(a: &Tensor, b: &Tensor) -> Tensor {
    let (ma, na) = (a.shape()[0], a.shape()[1]);
    let (mb, nb) = (b.shape()[0], b.shape()[1]);
    Tensor::from_fn(&[ma * mb, na * nb], |idx| {
        let (i, j) = (idx[0], idx[1]);
        a.at(&[i / mb, j / nb]) * b.at(&[i % mb, j % nb])
    })
}

/// Direct per-element evaluation of the cross-attention equations.
#[allow(clippy::too_many_arguments)]
pub fn attention_oracle(
    b1: &Tensor,
    b2: &Tensor,
    w1: &Tensor,
    w2: &Tensor,
    w3: &Tensor,
    w4: &Tensor,
    slope: f64,
) -> (Tensor, Tensor) {
    let (t_len, j_len, c_len) = (b1.shape()[0], b1.shape()[1], b1.shape()[2]);
    let m_len = b2.shape()[1];
    let emb = |src: &Tensor, w: &Tensor, t: usize, j: usize, c: usize| -> f64 {
        let mut acc = 0.0;
        for ci in 0..c_len {
            acc += src.at(&[t, j, ci]) * w.at(&[ci, c]);
        }
        acc
    };
    let score = |t: usize, j: usize, m: usize| -> f64 {
        let mut e1 = 0.0;
        let mut e2 = 0.0;
        for c in 0..c_len {
            e1 += emb(b1, w1, t, j, c) * w3.at(&[c, 0]);
            e2 += emb(b2, w2, t, m, c) * w4.at(&[c, 0]);
        }
        let s = e1 + e2;
        if s >= 0.0 {
            s
        } else {
            slope * s
        }
    };
    let out1 = Tensor::from_fn(&[t_len, j_len, c_len], |idx| {
        let (t, j, c) = (idx[0], idx[1], idx[2]);
        let max = (0..m_len)
            .map(|m| score(t, j, m))
            .fold(f64::NEG_INFINITY, f64::max);
        let denom: f64 = (0..m_len).map(|m| (score(t, j, m) - max).exp()).sum();
        (0..m_len)
            .map(|m| (score(t, j, m) - max).exp() / denom * emb(b2, w2, t, m, c))
            .sum()
    });
    let out2 = Tensor::from_fn(&[t_len, m_len, c_len], |idx| {
        let (t, m, c) = (idx[0], idx[1], idx[2]);
        let max = (0..j_len)
            .map(|j| score(t, j, m))
            .fold(f64::NEG_INFINITY, f64::max);
        let denom: f64 = (0..j_len).map(|j| (score(t, j, m) - max).exp()).sum();
        (0..j_len)
            .map(|j| (score(t, j, m) - max).exp() / denom * emb(b1, w1, t, j, c))
            .sum()
    });
    (out1, out2)
}

/// Sliding-window evaluation of one same-padded temporal convolution.
pub fn conv1d_oracle(x: &Tensor, taps: &[Tensor], bias: &Tensor) -> Tensor {
    let (k_len, v_len, c_len) = (x.shape()[0], x.shape()[1], x.shape()[2]);
    let c_out = taps[0].shape()[1];
    let half = (taps.len() as isize - 1) / 2;
    Tensor::from_fn(&[k_len, v_len, c_out], |idx| {
        let (t, v, co) = (idx[0], idx[1], idx[2]);
        let mut acc = bias.at(&[co]);
        for (d, tap) in taps.iter().enumerate() {
            let src = t as isize + d as isize - half;
            if src < 0 || src >= k_len as isize {
                continue;
            }
            for ci in 0..c_len {
                acc += tap.at(&[ci, co]) * x.at(&[src as usize, v, ci]);
            }
        }
        acc
    })
}

/// Loop evaluation of the slot decoder `out[n] = sum_k D[k,n] h[k] + bias[n]`.
pub fn fc_oracle(h: &Tensor, weight: &Tensor, bias: &Tensor) -> Tensor {
    let (k_len, v_len, c_len) = (h.shape()[0], h.shape()[1], h.shape()[2]);
    let n_len = weight.shape()[1];
    Tensor::from_fn(&[n_len, v_len, c_len], |idx| {
        let (n, v, c) = (idx[0], idx[1], idx[2]);
        let mut acc = bias.at(&[n]);
        for k in 0..k_len {
            acc += weight.at(&[k, n]) * h.at(&[k, v, c]);
        }
        acc
    })
}

