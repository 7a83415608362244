use crate::error::{Error, Result};
use crate::numerics::rng::Rng;
use crate::numerics::tape::{NodeId, Tape};
use crate::numerics::tensor::Tensor;

/// Minimum number of coordinates probed when subsampling is requested.
pub const MIN_SUBSAMPLE: usize = 200;

/// Compare analytic gradients against central finite differences.
///
/// `build` assembles a scalar loss on the tape from parameter leaves handed
/// to it in the order of `params`. Returns the worst relative error
/// `|analytic - numeric| / max(1, |numeric|)` over the probed coordinates.
/// With `subsample = Some(n)`, at most `max(n, 200)` randomly chosen
/// coordinates are probed; `None` probes all of them.
pub fn finite_difference_check<F>(
    build: &F,
    params: &[Tensor],
    eps: f64,
    subsample: Option<usize>,
    rng: &mut Rng,
) -> Result<f64>
where
    F: Fn(&mut Tape, &[NodeId]) -> Result<NodeId>,
{
    if !(eps > 0.0) {
        return Err(Error::Argument {
            op: "finite_difference_check",
            message: format!("eps must be positive, got {eps}"),
        });
    }

    // Analytic side.
    let mut tape = Tape::new();
    let ids: Vec<NodeId> = params.iter().map(|p| tape.leaf(p.clone())).collect();
    let loss = build(&mut tape, &ids)?;
    let loss_value = tape.value(loss);
    if !loss_value.is_scalar() {
        return Err(Error::Contract {
            op: "finite_difference_check",
            message: format!("loss must be scalar, got {:?}", loss_value.shape()),
        });
    }
    if !loss_value.item().is_finite() {
        return Err(Error::NonFinite {
            op: "finite_difference_check",
            message: "loss evaluated non-finite at the base point".into(),
        });
    }
    let grads = tape.backward(loss)?;
    let analytic: Vec<Tensor> = ids.iter().map(|&id| grads.of(id).clone()).collect();

    let eval = |ps: &[Tensor]| -> Result<f64> {
        let mut t = Tape::new();
        let ids: Vec<NodeId> = ps.iter().map(|p| t.leaf(p.clone())).collect();
        let l = build(&mut t, &ids)?;
        let v = t.value(l).item();
        if !v.is_finite() {
            return Err(Error::NonFinite {
                op: "finite_difference_check",
                message: "loss evaluated non-finite at a perturbed point".into(),
            });
        }
        Ok(v)
    };

    let mut coords: Vec<(usize, usize)> = Vec::new();
    for (pi, p) in params.iter().enumerate() {
        for fi in 0..p.numel() {
            coords.push((pi, fi));
        }
    }
    if let Some(n) = subsample {
        let keep = n.max(MIN_SUBSAMPLE);
        if coords.len() > keep {
            // partial Fisher-Yates: the first `keep` entries become the sample
            for i in 0..keep {
                let j = i + rng.next_below((coords.len() - i) as u64) as usize;
                coords.swap(i, j);
            }
            coords.truncate(keep);
        }
    }

    let mut work: Vec<Tensor> = params.to_vec();
    let mut max_rel: f64 = 0.0;
    for (pi, fi) in coords {
        let orig = work[pi].data()[fi];
        work[pi].data_mut()[fi] = orig + eps;
        let fp = eval(&work)?;
        work[pi].data_mut()[fi] = orig - eps;
        let fm = eval(&work)?;
        work[pi].data_mut()[fi] = orig;
        let numeric = (fp - fm) / (2.0 * eps);
        let rel = (analytic[pi].data()[fi] - numeric).abs() / numeric.abs().max(1.0);
        max_rel = max_rel.max(rel);
    }
    Ok(max_rel)
}
