//! Orthonormal DCT/IDCT between time-domain trajectories and frequency
//! coefficients.
//!
//! Storage is 0-based: coefficient row 0 carries the `1/sqrt(1+delta)`
//! factor of the textbook 1-based row 1, so row 0 of the basis is the
//! constant vector `1/sqrt(T)`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};
use crate::numerics::Tensor;

/// Orthonormal type-II DCT basis for a fixed frame count.
#[derive(Clone, Debug)]
pub struct DctBasis {
    length: usize,
    matrix: Tensor, // [T, T], row i = i-th coefficient's analysis vector
}

impl DctBasis {
    pub fn length(&self) -> usize {
        self.length
    }

    pub fn matrix(&self) -> &Tensor {
        &self.matrix
    }

    /// First `k` analysis rows as a `[k, T]` tensor.
    pub fn truncated(&self, k: usize) -> Result<Tensor> {
        if k == 0 || k > self.length {
            return Err(Error::Argument {
                op: "dct_basis_truncated",
                message: format!("retain {k} out of range for T={}", self.length),
            });
        }
        self.matrix.slice_axis0(0, k)
    }

    /// Synthesis matrix `[T, k]` mapping `k` leading coefficients to frames.
    pub fn synthesis(&self, k: usize) -> Result<Tensor> {
        Ok(self.truncated(k)?.permute(&[1, 0])?)
    }
}

fn basis_cache() -> &'static Mutex<HashMap<usize, Arc<DctBasis>>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<DctBasis>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Basis for `t` frames, cached per length.
pub fn dct_basis(t: usize) -> Result<Arc<DctBasis>> {
    if t == 0 {
        return Err(Error::Argument {
            op: "dct_basis",
            message: "frame count must be positive".into(),
        });
    }
    let mut cache = basis_cache().lock().expect("basis cache poisoned");
    if let Some(b) = cache.get(&t) {
        return Ok(Arc::clone(b));
    }
    let tf = t as f64;
    let scale = (2.0 / tf).sqrt();
    let matrix = Tensor::from_fn(&[t, t], |idx| {
        let (i, tt) = (idx[0] as f64, idx[1] as f64);
        let alpha = std::f64::consts::PI / (2.0 * tf) * (2.0 * tt + 1.0) * i;
        let delta: f64 = if idx[0] == 0 { 1.0 } else { 0.0 };
        scale * (1.0 / (1.0 + delta).sqrt()) * alpha.cos()
    });
    let basis = Arc::new(DctBasis { length: t, matrix });
    cache.insert(t, Arc::clone(&basis));
    Ok(basis)
}

/// Apply the basis along axis 0 and keep the first `retain` coefficient rows.
pub fn dct_apply(x: &Tensor, basis: &DctBasis, retain: usize) -> Result<Tensor> {
    if x.rank() == 0 || x.shape()[0] != basis.length() {
        return Err(Error::Dimension {
            op: "dct_apply",
            left: x.shape().to_vec(),
            right: vec![basis.length()],
        });
    }
    let analysis = basis.truncated(retain)?; // [K, T]
    apply_axis0(&analysis, x)
}

/// Zero-pad coefficients to `t_out` rows and apply the inverse transform
/// along axis 0.
pub fn idct_apply(coeffs: &Tensor, t_out: usize) -> Result<Tensor> {
    if coeffs.rank() == 0 {
        return Err(Error::Argument {
            op: "idct_apply",
            message: "coefficients need rank >= 1".into(),
        });
    }
    let k = coeffs.shape()[0];
    if k > t_out {
        return Err(Error::Argument {
            op: "idct_apply",
            message: format!("{k} coefficient rows exceed {t_out} output frames"),
        });
    }
    let basis = dct_basis(t_out)?;
    let synthesis = basis.synthesis(k)?; // [T_out, K]
    apply_axis0(&synthesis, coeffs)
}

/// Left-multiply along axis 0: `out[i, rest] = sum_j m[i, j] * x[j, rest]`.
fn apply_axis0(m: &Tensor, x: &Tensor) -> Result<Tensor> {
    let rows = m.shape()[0];
    let inner = m.shape()[1];
    let rest: usize = x.shape()[1..].iter().product();
    let flat = x.reshape(&[1, inner, rest])?;
    let mr = m.reshape(&[1, rows, inner])?;
    let out = crate::numerics::matmul_batched(&mr, &flat)?;
    let mut shape = x.shape().to_vec();
    shape[0] = rows;
    out.reshape(&shape)
}
