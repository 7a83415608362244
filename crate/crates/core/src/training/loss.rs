use crate::error::{Error, Result};
use crate::numerics::{NodeId, Tape, Tensor};

/// Mean per-joint position error: average Euclidean distance over the `V`
/// nodes of one frame, in the input's units (millimeters).
pub fn mpjpe(pred: &Tensor, gt: &Tensor) -> Result<f64> {
    if pred.shape() != gt.shape() || pred.rank() != 2 || pred.shape()[1] != 3 {
        return Err(Error::Dimension {
            op: "mpjpe",
            left: pred.shape().to_vec(),
            right: gt.shape().to_vec(),
        });
    }
    let v = pred.shape()[0];
    let mut acc = 0.0;
    for node in 0..v {
        let mut sq = 0.0;
        for axis in 0..3 {
            let d = pred.at(&[node, axis]) - gt.at(&[node, axis]);
            sq += d * d;
        }
        acc += sq.sqrt();
    }
    Ok(acc / v as f64)
}

/// Training loss: mean over the `N` future frames of the per-frame MPJPE.
pub fn sequence_loss(pred: &Tensor, gt: &Tensor) -> Result<f64> {
    if pred.shape() != gt.shape() || pred.rank() != 3 || pred.shape()[2] != 3 {
        return Err(Error::Dimension {
            op: "sequence_loss",
            left: pred.shape().to_vec(),
            right: gt.shape().to_vec(),
        });
    }
    let n = pred.shape()[0];
    let mut acc = 0.0;
    for frame in 0..n {
        acc += mpjpe(
            &pred.slice_axis0(frame, 1)?.reshape(&[pred.shape()[1], 3])?,
            &gt.slice_axis0(frame, 1)?.reshape(&[gt.shape()[1], 3])?,
        )?;
    }
    Ok(acc / n as f64)
}

/// Same loss as a differentiable scalar node on the tape.
pub fn sequence_loss_node(tape: &mut Tape, pred: NodeId, gt: &Tensor) -> Result<NodeId> {
    if tape.value(pred).shape() != gt.shape() {
        return Err(Error::Dimension {
            op: "sequence_loss",
            left: tape.value(pred).shape().to_vec(),
            right: gt.shape().to_vec(),
        });
    }
    let g = tape.constant(gt.clone());
    let d = tape.sub(pred, g)?;
    let sq = tape.mul(d, d)?;
    let per_node = tape.sum_last(sq)?; // [N, V]
    let dist = tape.sqrt(per_node)?;
    Ok(tape.mean_all(dist))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Rng;

    #[test]
    fn zero_for_equal_inputs() {
        let mut rng = Rng::new(1);
        let a = rng.uniform(-100.0, 100.0, &[7, 3]).unwrap();
        assert_eq!(mpjpe(&a, &a).unwrap(), 0.0);
        let s = rng.uniform(-100.0, 100.0, &[5, 7, 3]).unwrap();
        assert_eq!(sequence_loss(&s, &s).unwrap(), 0.0);
    }

    #[test]
    fn pythagorean_average() {
        // errors (3,4,0) and (0,0,0): (5 + 0) / 2 = 2.5
        let gt = Tensor::zeros(&[2, 3]);
        let pred = Tensor::new(vec![2, 3], vec![3.0, 4.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(mpjpe(&pred, &gt).unwrap(), 2.5);
    }

    #[test]
    fn constant_frame_error_passes_through_mean() {
        let gt = Tensor::zeros(&[4, 2, 3]);
        let mut pred = Tensor::zeros(&[4, 2, 3]);
        // every node offset by (0,3,4): per-frame mpjpe 5
        for frame in 0..4 {
            for node in 0..2 {
                let off = pred.offset(&[frame, node, 1]);
                pred.data_mut()[off] = 3.0;
                let off = pred.offset(&[frame, node, 2]);
                pred.data_mut()[off] = 4.0;
            }
        }
        assert_eq!(sequence_loss(&pred, &gt).unwrap(), 5.0);
    }

    #[test]
    fn scalar_loop_oracle() {
        let mut rng = Rng::new(2);
        let pred = rng.uniform(-50.0, 50.0, &[36, 3]).unwrap();
        let gt = rng.uniform(-50.0, 50.0, &[36, 3]).unwrap();
        let mut acc = 0.0;
        for v in 0..36 {
            let dx = pred.at(&[v, 0]) - gt.at(&[v, 0]);
            let dy = pred.at(&[v, 1]) - gt.at(&[v, 1]);
            let dz = pred.at(&[v, 2]) - gt.at(&[v, 2]);
            acc += (dx * dx + dy * dy + dz * dz).sqrt();
        }
        let oracle = acc / 36.0;
        assert!((mpjpe(&pred, &gt).unwrap() - oracle).abs() < 1e-12);
    }

    #[test]
    fn tape_loss_matches_plain_loss() {
        let mut rng = Rng::new(3);
        let pred = rng.uniform(-10.0, 10.0, &[4, 6, 3]).unwrap();
        let gt = rng.uniform(-10.0, 10.0, &[4, 6, 3]).unwrap();
        let plain = sequence_loss(&pred, &gt).unwrap();
        let mut tape = Tape::new();
        let p = tape.constant(pred.clone());
        let node = sequence_loss_node(&mut tape, p, &gt).unwrap();
        assert!((tape.value(node).item() - plain).abs() < 1e-12);
    }

    #[test]
    fn shape_mismatch_rejected() {
        let a = Tensor::zeros(&[3, 3]);
        let b = Tensor::zeros(&[4, 3]);
        assert!(mpjpe(&a, &b).is_err());
    }
}
