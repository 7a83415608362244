//! Acceptance suite. Each test prints one `criterion N PASS/FAIL` line with
//! the measured quantities (run with `--nocapture` to see them); criterion 8
//! (command-line determinism) lives in the CLI crate's acceptance target.

mod common;

use std::time::Instant;

use common::{kron, layer_oracle};
use duet_core::data::{synth_generate, window, NormalizeMode, SynthStyle};
use duet_core::frequency::{dct_apply, dct_basis, idct_apply};
use duet_core::init::{
    bound_for, sample_matrix, seed_stability_study, variance_probe, InitScheme, InitSpec,
    StudyConfig,
};
use duet_core::model::forward::{build_forward, ParamIds};
use duet_core::model::{
    layer_forward, nonseparable_layer_forward, Connectivity, DecoderKind, LayerParams,
    ModelConfig, ModelParams, NonSepLayerParams, SkeletonSpec,
};
use duet_core::numerics::rng::streams;
use duet_core::numerics::{
    finite_difference_check, matmul_batched, Activation, Rng, Tensor,
};
use duet_core::training::{
    evaluate, evaluate_zero_velocity, mpjpe, sequence_loss, sequence_loss_node, train, LrDecay,
    TrainConfig,
};
use duet_core::model::model_output;

fn report(criterion: u32, ok: bool, detail: &str) {
    println!(
        "criterion {criterion} {}: {detail}",
        if ok { "PASS" } else { "FAIL" }
    );
    assert!(ok, "criterion {criterion} FAIL: {detail}");
}

#[test]
fn criterion_1_dct_correctness() {
    let started = Instant::now();
    let mut rng = Rng::new(1001);
    let mut max_resid: f64 = 0.0;
    let mut max_round: f64 = 0.0;
    for t in 1..=128usize {
        let basis = dct_basis(t).unwrap();
        let m = basis.matrix().reshape(&[1, t, t]).unwrap();
        let mt = basis.matrix().permute(&[1, 0]).unwrap().reshape(&[1, t, t]).unwrap();
        let prod = matmul_batched(&m, &mt).unwrap();
        for i in 0..t {
            for j in 0..t {
                let expect = if i == j { 1.0 } else { 0.0 };
                max_resid = max_resid.max((prod.at(&[0, i, j]) - expect).abs());
            }
        }
        for _ in 0..100 {
            let x = rng.uniform(-10.0, 10.0, &[t]).unwrap();
            let c = dct_apply(&x, &basis, t).unwrap();
            let back = idct_apply(&c, t).unwrap();
            max_round = max_round.max(back.max_abs_diff(&x));
        }
    }
    let elapsed = started.elapsed().as_secs_f64();
    let ok = max_resid < 1e-10 && max_round < 1e-10 && elapsed < 10.0;
    report(
        1,
        ok,
        &format!(
            "orthonormality residual {max_resid:.2e}, round-trip error {max_round:.2e}, {elapsed:.2}s (T in 1..=128, 100 signals each)"
        ),
    );
}

fn gradcheck_config(
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

#[test]
fn criterion_2_gradient_correctness() {
    let started = Instant::now();
    let mut worst: f64 = 0.0;
    let mut worst_name = String::new();
    let mut combos = 0usize;
    let mut seed = 500u64;
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
                    let conns: &[Connectivity] = if separable {
                        &[Connectivity::Learnable, Connectivity::KinematicTree]
                    } else {
                        &[Connectivity::Learnable]
                    };
                    for &connectivity in conns {
                        seed += 1;
                        combos += 1;
                        let cfg = gradcheck_config(
                            separable,
                            attention,
                            hierarchy,
                            decoder,
                            connectivity,
                        );
                        cfg.validate().unwrap();
                        let skeleton = SkeletonSpec::chain(3, 2);
                        let mut rng = Rng::with_stream(seed, streams::INIT);
                        let params = ModelParams::init(&cfg, &skeleton, &mut rng).unwrap();
                        let x_in = rng
                            .uniform(-2.0, 2.0, &[cfg.t_obs, cfg.node_count(), 3])
                            .unwrap();
                        let x_out = rng
                            .uniform(-2.0, 2.0, &[cfg.n_fut, cfg.node_count(), 3])
                            .unwrap();
                        let flat: Vec<Tensor> =
                            params.named().into_iter().map(|(_, t)| t.clone()).collect();
                        let mut check_rng = Rng::with_stream(seed, streams::GRADCHECK);
                        let err = finite_difference_check(
                            &|tape, ids| {
                                let pid = ParamIds::from_flat(&cfg, ids)?;
                                let out = build_forward(tape, &cfg, &pid, &x_in)?;
                                sequence_loss_node(tape, out, &x_out)
                            },
                            &flat,
                            1e-5,
                            Some(200),
                            &mut check_rng,
                        )
                        .unwrap();
                        if err > worst {
                            worst = err;
                            worst_name = format!(
                                "sep={separable} att={attention} hier={hierarchy:?} dec={decoder:?} conn={connectivity:?}"
                            );
                        }
                    }
                }
            }
        }
    }
    let elapsed = started.elapsed().as_secs_f64();
    let ok = worst < 1e-5 && elapsed < 120.0;
    report(
        2,
        ok,
        &format!(
            "{combos} flag combinations, worst relative error {worst:.2e} ({worst_name}), {elapsed:.2}s"
        ),
    );
}

#[test]
fn criterion_3_layer_oracle_equivalence() {
    let mut rng = Rng::new(1003);
    let mut worst_loop: f64 = 0.0;
    for case in 0..100 {
        let (t, v, c_in, c_out) = (3usize, 4usize, 2usize, 3usize);
        let p = LayerParams {
            a_s: rng.uniform(-1.0, 1.0, &[v, v]).unwrap(),
            a_t: rng.uniform(-1.0, 1.0, &[t, t]).unwrap(),
            w: rng.uniform(-1.0, 1.0, &[c_in, c_out]).unwrap(),
        };
        let x = rng.uniform(-2.0, 2.0, &[t, v, c_in]).unwrap();
        let act = if case % 2 == 0 {
            Activation::Relu
        } else {
            Activation::Tanh
        };
        let got = layer_forward(&x, &p, act).unwrap();
        let want = layer_oracle(&x, &p.a_s, &p.a_t, &p.w, act);
        worst_loop = worst_loop.max(got.max_abs_diff(&want));
    }
    let mut worst_kron: f64 = 0.0;
    for t in 1..=4usize {
        for v in 1..=4usize {
            let c = 2usize;
            let p = LayerParams {
                a_s: rng.uniform(-1.0, 1.0, &[v, v]).unwrap(),
                a_t: rng.uniform(-1.0, 1.0, &[t, t]).unwrap(),
                w: rng.uniform(-1.0, 1.0, &[c, c]).unwrap(),
            };
            let x = rng.uniform(-2.0, 2.0, &[t, v, c]).unwrap();
            let sep = layer_forward(&x, &p, Activation::Tanh).unwrap();
            let np = NonSepLayerParams {
                a_st: kron(&p.a_t, &p.a_s),
                w: p.w.clone(),
            };
            let flat = nonseparable_layer_forward(&x, &np, Activation::Tanh).unwrap();
            worst_kron = worst_kron.max(sep.max_abs_diff(&flat));
        }
    }
    let ok = worst_loop < 1e-12 && worst_kron < 1e-12;
    report(
        3,
        ok,
        &format!(
            "nested-loop oracle diff {worst_loop:.2e} (100 cases), Kronecker equivalence diff {worst_kron:.2e}"
        ),
    );
}

#[test]
fn criterion_4_initialization_theory() {
    let started = Instant::now();
    let mut cfg = ModelConfig::best_practices(18, 2, 50, 25, 3, 8);
    cfg.channels = vec![3; 9];
    cfg.activation = Activation::Linear;
    cfg.residual_skips = false;
    let mut rng = Rng::with_stream(1004, streams::PROBE);
    let strict = variance_probe(&cfg, InitScheme::PaperStrict, 100, 1.0, &mut rng).unwrap();
    let strict_final = strict.last().unwrap().mean;
    let naive = variance_probe(&cfg, InitScheme::NaiveUniform(1.0), 100, 1.0, &mut rng).unwrap();
    let naive_final = naive.last().unwrap().mean;
    let elapsed = started.elapsed().as_secs_f64();
    let ok = (0.5..2.0).contains(&strict_final) && naive_final > 1e3 && elapsed < 60.0;
    report(
        4,
        ok,
        &format!(
            "paper_strict output/input std ratio {strict_final:.3} (100 trials, V=36, T=50, L=8, linear), naive_uniform(1) ratio {naive_final:.2e}, {elapsed:.2}s"
        ),
    );
}

#[test]
fn criterion_5_bound_fidelity() {
    let mut rng = Rng::new(1005);
    // symbolic bound identity on 20 random (k, n)
    let mut symbolic_ok = true;
    for _ in 0..20 {
        let k = if rng.next_below(2) == 0 { 1.0 } else { 2.0 };
        let n = 1 + rng.next_below(200) as usize;
        let paper = bound_for(
            InitSpec {
                scheme: InitScheme::Paper,
                k,
            },
            n,
            n,
        );
        symbolic_ok &= paper == (k / n as f64).sqrt();
        let strict = bound_for(
            InitSpec {
                scheme: InitScheme::PaperStrict,
                k,
            },
            n,
            n,
        );
        symbolic_ok &= strict == (3.0 * k / n as f64).sqrt();
    }
    // empirical variance at 1e5 samples
    let spec = InitSpec {
        scheme: InitScheme::Paper,
        k: 2.0,
    };
    let n = 36usize;
    let t = sample_matrix(spec, n, n, &[100_000], &mut rng).unwrap();
    let var_paper = t.data().iter().map(|v| v * v).sum::<f64>() / t.numel() as f64;
    let expect_paper = 2.0 / (3.0 * n as f64);
    let spec = InitSpec {
        scheme: InitScheme::PaperStrict,
        k: 2.0,
    };
    let t = sample_matrix(spec, n, n, &[100_000], &mut rng).unwrap();
    let var_strict = t.data().iter().map(|v| v * v).sum::<f64>() / t.numel() as f64;
    let expect_strict = 2.0 / n as f64;
    let ok = symbolic_ok
        && (var_paper - expect_paper).abs() < 0.05 * expect_paper
        && (var_strict - expect_strict).abs() < 0.05 * expect_strict;
    report(
        5,
        ok,
        &format!(
            "bounds symbolically exact over 20 (k,n); variance paper {var_paper:.5} vs k/(3n)={expect_paper:.5}, strict {var_strict:.5} vs k/n={expect_strict:.5}"
        ),
    );
}

#[test]
fn criterion_6_trainability() {
    let started = Instant::now();
    let style = SynthStyle::default();
    let mut rng = Rng::with_stream(2024, streams::SYNTH);
    let seqs = synth_generate(&mut rng, 8, 100, 9, 2, &style).unwrap();
    let skeleton = SkeletonSpec::chain(9, 2);
    let all = window(&seqs, &skeleton, 50, 25, 1, NormalizeMode::CenterLast).unwrap();
    let train_windows: Vec<_> = all.iter().filter(|w| w.start <= 15).cloned().collect();
    let eval_windows: Vec<_> = all.iter().filter(|w| w.start >= 22).cloned().collect();

    let cfg = ModelConfig::best_practices(9, 2, 50, 25, 16, 3);
    let params =
        ModelParams::init(&cfg, &skeleton, &mut Rng::with_stream(2024, streams::INIT)).unwrap();
    let tcfg = TrainConfig {
        steps: 1600,
        batch_size: 8,
        learning_rate: 3e-2,
        lr_decay: Some(LrDecay {
            factor: 0.5,
            period: Some(300),
        }),
        seed: 2024,
        ..TrainConfig::default()
    };
    let run = train(&cfg, &skeleton, params, &train_windows, &tcfg).unwrap();
    assert!(run.diverged.is_none(), "criterion 6 FAIL: diverged");
    let step0 = run.curve[0];
    let final_loss = train_windows
        .iter()
        .map(|w| {
            sequence_loss(&model_output(&cfg, &run.params, &w.input).unwrap(), &w.target).unwrap()
        })
        .sum::<f64>()
        / train_windows.len() as f64;
    let ratio = final_loss / step0;

    let horizons = [200usize, 400, 600, 1000];
    let model_report = evaluate(&cfg, &run.params, &eval_windows, &horizons).unwrap();
    let zv_report = evaluate_zero_velocity(&eval_windows, &horizons).unwrap();
    let beats_all = model_report
        .overall
        .iter()
        .zip(&zv_report.overall)
        .all(|(m, z)| m < z);
    let elapsed = started.elapsed().as_secs_f64();
    let ok = ratio < 0.05 && beats_all && run.curve.len() <= 2000 && elapsed < 600.0;
    report(
        6,
        ok,
        &format!(
            "final/step-0 loss {final_loss:.1}/{step0:.1} = {ratio:.4} (<0.05) in {} steps; held-out MPJPE {:?} vs zero-velocity {:?} mm at {horizons:?} ms; {elapsed:.1}s",
            run.curve.len(),
            model_report.overall.iter().map(|v| v.round() as i64).collect::<Vec<_>>(),
            zv_report.overall.iter().map(|v| v.round() as i64).collect::<Vec<_>>(),
        ),
    );
}

#[test]
fn criterion_7_mpjpe_oracle_and_invariances() {
    let mut rng = Rng::new(1007);
    // 1000 random cases against the scalar-loop oracle
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let v = 1 + rng.next_below(40) as usize;
        let pred = rng.uniform(-500.0, 500.0, &[v, 3]).unwrap();
        let gt = rng.uniform(-500.0, 500.0, &[v, 3]).unwrap();
        let mut acc = 0.0;
        for node in 0..v {
            let mut sq = 0.0;
            for axis in 0..3 {
                let d = pred.at(&[node, axis]) - gt.at(&[node, axis]);
                sq += d * d;
            }
            acc += sq.sqrt();
        }
        let oracle = acc / v as f64;
        worst = worst.max((mpjpe(&pred, &gt).unwrap() - oracle).abs());
    }

    // exact invariances on integer-valued data (all arithmetic exact)
    let quads: [[f64; 3]; 6] = [
        [0.0, 0.0, 0.0],
        [3.0, 4.0, 0.0],
        [1.0, 2.0, 2.0],
        [2.0, 3.0, 6.0],
        [4.0, 4.0, 7.0],
        [1.0, 4.0, 8.0],
    ];
    let mut exact_ok = true;
    for _ in 0..200 {
        let v = 2 + rng.next_below(20) as usize;
        let gt = Tensor::from_fn(&[v, 3], |_| rng.next_below(2000) as f64 - 1000.0);
        let pred = Tensor::from_fn(&[v, 3], |idx| {
            let q = quads[(idx[0] * 31 + 7) % quads.len()];
            gt.at(idx) + q[idx[1]]
        });
        let base = mpjpe(&pred, &gt).unwrap();
        // translation by an integer vector
        let c = [
            rng.next_below(4000) as f64 - 2000.0,
            rng.next_below(4000) as f64 - 2000.0,
            rng.next_below(4000) as f64 - 2000.0,
        ];
        let shift = |t: &Tensor| Tensor::from_fn(&[v, 3], |idx| t.at(idx) + c[idx[1]]);
        exact_ok &= mpjpe(&shift(&pred), &shift(&gt)).unwrap() == base;
        // joint permutation applied to both
        let perm = rng.shuffled_indices(v);
        let permute = |t: &Tensor| Tensor::from_fn(&[v, 3], |idx| t.at(&[perm[idx[0]], idx[1]]));
        exact_ok &= mpjpe(&permute(&pred), &permute(&gt)).unwrap() == base;
        // nonnegative, zero iff equal
        exact_ok &= base >= 0.0;
        exact_ok &= mpjpe(&gt, &gt).unwrap() == 0.0;
        if pred != gt {
            exact_ok &= base > 0.0;
        }
    }
    let ok = worst < 1e-12 && exact_ok;
    report(
        7,
        ok,
        &format!(
            "scalar-loop oracle diff {worst:.2e} over 1000 cases; translation/permutation invariance exact on 200 integer cases"
        ),
    );
}

#[test]
fn criterion_9_init_study_pipeline() {
    let style = SynthStyle::default();
    let mut rng = Rng::with_stream(2024, streams::SYNTH);
    let seqs = synth_generate(&mut rng, 8, 100, 9, 2, &style).unwrap();
    let skeleton = SkeletonSpec::chain(9, 2);
    let mut cfg = ModelConfig::best_practices(9, 2, 30, 25, 8, 2);
    cfg.channels = vec![3, 8, 3];
    let windows = window(&seqs, &skeleton, 30, 25, 4, NormalizeMode::CenterLast).unwrap();
    let train_windows: Vec<_> = windows.iter().filter(|w| w.start <= 28).cloned().collect();
    let eval_windows: Vec<_> = windows.iter().filter(|w| w.start > 28).cloned().collect();
    let tcfg = TrainConfig {
        steps: 100,
        batch_size: 4,
        learning_rate: 1e-3,
        seed: 0,
        ..TrainConfig::default()
    };
    let study = StudyConfig {
        schemes: vec![
            InitScheme::NaiveUniform(1.0),
            InitScheme::Glorot,
            InitScheme::He,
            InitScheme::Paper,
        ],
        seeds: vec![1, 2, 3, 4, 5],
        horizons_ms: vec![200, 400, 600, 1000],
    };
    let outcome = seed_stability_study(
        &cfg,
        &skeleton,
        &train_windows,
        &eval_windows,
        &tcfg,
        &study,
    )
    .unwrap();
    let diverged = outcome.runs.iter().filter(|r| r.diverged_at.is_some()).count();
    let schemes_with_rows = study
        .schemes
        .iter()
        .filter(|s| {
            outcome
                .summary
                .iter()
                .any(|row| row.scheme == **s && row.mean.is_finite() && row.std.is_finite())
        })
        .count();
    let all_finite = outcome
        .summary
        .iter()
        .all(|row| row.mean.is_finite() && row.std.is_finite());
    let ok = schemes_with_rows == 4 && all_finite && outcome.runs.len() == 20;
    let sample: Vec<String> = outcome
        .summary
        .iter()
        .filter(|r| r.horizon_ms == 1000)
        .map(|r| format!("{:?} {:.1}±{:.1}", r.scheme, r.mean, r.std))
        .collect();
    report(
        9,
        ok,
        &format!(
            "20 runs (4 schemes x 5 seeds), {diverged} diverged; finite summary rows for all schemes; 1000 ms rows: {}",
            sample.join(", ")
        ),
    );
}
