//! Finite-difference validation of every composite the model uses, plus the
//! full ablation-flag matrix at micro shapes.

use duet_core::model::forward::{
    build_forward, cross_attention_pair, node_project, nonseparable_layer, separable_layer,
    slot_map, ParamIds,
};
use duet_core::model::{Connectivity, DecoderKind, ModelConfig, ModelParams, SkeletonSpec};
use duet_core::numerics::rng::streams;
use duet_core::numerics::{
    finite_difference_check, Activation, NodeId, Rng, Tape, Tensor,
};
use duet_core::training::sequence_loss_node;
use duet_core::Result;

fn check<F>(build: F, params: &[Tensor], seed: u64) -> f64
where
    F: Fn(&mut Tape, &[NodeId]) -> Result<NodeId>,
{
    let mut rng = Rng::with_stream(seed, streams::GRADCHECK);
    finite_difference_check(&build, params, 1e-5, Some(200), &mut rng).unwrap()
}

#[test]
fn separable_layer_gradients() {
    let mut rng = Rng::new(21);
    let (t, v, c_in, c_out) = (4usize, 6usize, 3usize, 5usize);
    let x = rng.uniform(-1.0, 1.0, &[t, v, c_in]).unwrap();
    let params = vec![
        rng.uniform(-0.5, 0.5, &[v, v]).unwrap(),
        rng.uniform(-0.5, 0.5, &[t, t]).unwrap(),
        rng.uniform(-0.5, 0.5, &[c_in, c_out]).unwrap(),
    ];
    let err = check(
        |tape, ids| {
            let x0 = tape.constant(x.clone());
            let y = separable_layer(tape, x0, ids[0], ids[1], ids[2], Activation::Tanh)?;
            Ok(tape.sum_all(y))
        },
        &params,
        1,
    );
    assert!(err < 1e-5, "err {err}");
}

#[test]
fn per_frame_layer_gradients() {
    let mut rng = Rng::new(22);
    let (t, v, c) = (3usize, 4usize, 2usize);
    let x = rng.uniform(-1.0, 1.0, &[t, v, c]).unwrap();
    let params = vec![
        rng.uniform(-0.5, 0.5, &[t, v, v]).unwrap(),
        rng.uniform(-0.5, 0.5, &[v, t, t]).unwrap(),
        rng.uniform(-0.5, 0.5, &[c, c]).unwrap(),
    ];
    let err = check(
        |tape, ids| {
            let x0 = tape.constant(x.clone());
            let y = separable_layer(tape, x0, ids[0], ids[1], ids[2], Activation::Tanh)?;
            Ok(tape.sum_all(y))
        },
        &params,
        2,
    );
    assert!(err < 1e-5, "err {err}");
}

#[test]
fn nonseparable_layer_gradients() {
    let mut rng = Rng::new(23);
    let (t, v, c) = (3usize, 4usize, 2usize);
    let x = rng.uniform(-1.0, 1.0, &[t, v, c]).unwrap();
    let params = vec![
        rng.uniform(-0.3, 0.3, &[t * v, t * v]).unwrap(),
        rng.uniform(-0.5, 0.5, &[c, c]).unwrap(),
    ];
    let err = check(
        |tape, ids| {
            let x0 = tape.constant(x.clone());
            let y = nonseparable_layer(tape, x0, ids[0], ids[1], Activation::Tanh)?;
            Ok(tape.sum_all(y))
        },
        &params,
        3,
    );
    assert!(err < 1e-5, "err {err}");
}

#[test]
fn attention_gradients() {
    let mut rng = Rng::new(24);
    let (t, j, c) = (3usize, 3usize, 4usize);
    let b1 = rng.uniform(-1.0, 1.0, &[t, j, c]).unwrap();
    let b2 = rng.uniform(-1.0, 1.0, &[t, j, c]).unwrap();
    let params = vec![
        rng.uniform(-0.5, 0.5, &[c, c]).unwrap(),
        rng.uniform(-0.5, 0.5, &[c, c]).unwrap(),
        rng.uniform(-0.5, 0.5, &[c, 1]).unwrap(),
        rng.uniform(-0.5, 0.5, &[c, 1]).unwrap(),
    ];
    let err = check(
        |tape, ids| {
            let i1 = tape.constant(b1.clone());
            let i2 = tape.constant(b2.clone());
            let (o1, o2) = cross_attention_pair(tape, i1, i2, &[ids[0], ids[1], ids[2], ids[3]])?;
            let s1 = tape.sum_all(o1);
            let s2 = tape.sum_all(o2);
            tape.add(s1, s2)
        },
        &params,
        4,
    );
    assert!(err < 1e-5, "err {err}");
}

#[test]
fn decoder_and_hierarchy_gradients() {
    let mut rng = Rng::new(25);
    let (k, v, c, n) = (5usize, 4usize, 3usize, 3usize);
    let h = rng.uniform(-1.0, 1.0, &[k, v, c]).unwrap();
    // fc decoder
    let params = vec![
        rng.uniform(-0.5, 0.5, &[k, n]).unwrap(),
        rng.uniform(-0.5, 0.5, &[n]).unwrap(),
    ];
    let err = check(
        |tape, ids| {
            let h0 = tape.constant(h.clone());
            let y = slot_map(tape, h0, ids[0], ids[1])?;
            let sq = tape.mul(y, y)?;
            Ok(tape.sum_all(sq))
        },
        &params,
        5,
    );
    assert!(err < 1e-5, "fc err {err}");
    // hierarchy projection
    let params = vec![rng.uniform(-0.5, 0.5, &[v, 2]).unwrap()];
    let err = check(
        |tape, ids| {
            let h0 = tape.constant(h.clone());
            let y = node_project(tape, h0, ids[0])?;
            Ok(tape.sum_all(y))
        },
        &params,
        6,
    );
    assert!(err < 1e-5, "hierarchy err {err}");
}

#[test]
fn sequence_loss_gradients_through_full_model() {
    let cfg = micro_config(true, false, None, DecoderKind::Fc, Connectivity::Learnable);
    let err = model_matrix_error(&cfg, 7);
    assert!(err < 1e-5, "err {err}");
}

fn micro_config(
    separable: bool,
    attention: bool,
    hierarchy: Option<usize>,
    decoder: DecoderKind,
    connectivity: Connectivity,
) -> ModelConfig {
    let mut cfg = ModelConfig::best_practices(3, 2, 8, 4, 8, 3);
    cfg.channels = vec![3, 8, 8, 3];
    cfg.separable = separable;
    cfg.attention = attention;
    cfg.hierarchy = hierarchy;
    cfg.decoder = decoder;
    cfg.connectivity = connectivity;
    cfg.activation = Activation::Tanh;
    cfg
}

fn model_matrix_error(cfg: &ModelConfig, seed: u64) -> f64 {
    cfg.validate().unwrap();
    let skeleton = SkeletonSpec::chain(cfg.joints_per_body, cfg.bodies);
    let mut rng = Rng::with_stream(seed, streams::INIT);
    let params = ModelParams::init(cfg, &skeleton, &mut rng).unwrap();
    let x_in = rng
        .uniform(-2.0, 2.0, &[cfg.t_obs, cfg.node_count(), 3])
        .unwrap();
    let x_out = rng
        .uniform(-2.0, 2.0, &[cfg.n_fut, cfg.node_count(), 3])
        .unwrap();
    let flat: Vec<Tensor> = params.named().into_iter().map(|(_, t)| t.clone()).collect();
    check(
        |tape, ids| {
            let pid = ParamIds::from_flat(cfg, ids)?;
            let out = build_forward(tape, cfg, &pid, &x_in)?;
            sequence_loss_node(tape, out, &x_out)
        },
        &flat,
        seed,
    )
}

#[test]
fn every_ablation_flag_combination_passes_gradcheck() {
    let mut failures = Vec::new();
    let mut seed = 100u64;
    for separable in [true, false] {
        for attention in [false, true] {
            for hierarchy in [None, Some(4)] {
                for decoder in [
                    DecoderKind::Fc,
                    DecoderKind::Tcn {
                        kernel: 3,
                        layers: 2,
                    },
                ] {
                    let connectivities: &[Connectivity] = if separable {
                        &[Connectivity::Learnable, Connectivity::KinematicTree]
                    } else {
                        &[Connectivity::Learnable]
                    };
                    for &connectivity in connectivities {
                        seed += 1;
                        let cfg =
                            micro_config(separable, attention, hierarchy, decoder, connectivity);
                        let err = model_matrix_error(&cfg, seed);
                        if err >= 1e-5 {
                            failures.push(format!(
                                "sep={separable} att={attention} hier={hierarchy:?} dec={decoder:?} conn={connectivity:?}: {err}"
                            ));
                        }
                    }
                }
            }
        }
    }
    assert!(failures.is_empty(), "gradcheck failures:\n{}", failures.join("\n"));
}
