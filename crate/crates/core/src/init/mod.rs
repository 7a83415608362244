//! Parameter initialization schemes and the empirical studies around them:
//! variance-matched uniform bounds for the adjacency and weight matrices,
//! Glorot/He/naive baselines, a forward variance-propagation probe, and a
//! seed-stability study.

mod probe;
mod study;

pub use probe::{variance_probe, LayerRatio};
pub use study::{seed_stability_study, StudyConfig, StudyOutcome, StudyRun, StudySummaryRow};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{Activation, Rng, Tensor};

/// How a tensor is drawn at initialization time.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitScheme {
    /// Uniform bounds `sqrt(k/n)` exactly as the variance analysis prints
    /// them (sampled variance `k/(3n)`).
    Paper,
    /// Bounds scaled by `sqrt(3)` so the sampled variance equals `k/n`,
    /// satisfying the variance-preservation constraint exactly.
    PaperStrict,
    Glorot,
    He,
    NaiveUniform(f64),
}

/// Scheme plus the activation gain `k` (2 for ReLU, 1 for symmetric
/// activations).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InitSpec {
    pub scheme: InitScheme,
    pub k: f64,
}

impl InitSpec {
    pub fn new(scheme: InitScheme, activation: Activation) -> Self {
        InitSpec {
            scheme,
            k: gain_k(activation),
        }
    }
}

/// Activation gain: `k = 2` for ReLU, `k = 1` for symmetric activations.
pub fn gain_k(activation: Activation) -> f64 {
    match activation {
        Activation::Relu => 2.0,
        _ => 1.0,
    }
}

/// Bound of the variance-analysis uniform distribution, `sqrt(k/n)`.
pub fn paper_bound(k: f64, n: usize) -> f64 {
    (k / n as f64).sqrt()
}

/// `paper_bound` scaled so a `U[-a, a]` draw has variance exactly `k/n`.
pub fn paper_strict_bound(k: f64, n: usize) -> f64 {
    (3.0 * k / n as f64).sqrt()
}

pub fn glorot_bound(fan_in: usize, fan_out: usize) -> f64 {
    (6.0 / (fan_in + fan_out) as f64).sqrt()
}

pub fn he_bound(fan_in: usize) -> f64 {
    (6.0 / fan_in as f64).sqrt()
}

/// Uniform bound for one matrix under `spec`.
///
/// `fan_in` doubles as the variance divisor `n` of the paper scheme: the
/// node count for spatial adjacencies, the frame count for temporal ones,
/// and the input width for weight matrices.
pub fn bound_for(spec: InitSpec, fan_in: usize, fan_out: usize) -> f64 {
    match spec.scheme {
        InitScheme::Paper => paper_bound(spec.k, fan_in),
        InitScheme::PaperStrict => paper_strict_bound(spec.k, fan_in),
        InitScheme::Glorot => glorot_bound(fan_in, fan_out),
        InitScheme::He => he_bound(fan_in),
        InitScheme::NaiveUniform(b) => b,
    }
}

/// Sample a matrix of `shape` with the scheme's symmetric uniform bound.
pub fn sample_matrix(
    spec: InitSpec,
    fan_in: usize,
    fan_out: usize,
    shape: &[usize],
    rng: &mut Rng,
) -> Result<Tensor> {
    let bound = bound_for(spec, fan_in, fan_out);
    if !(bound > 0.0) {
        return Err(Error::Argument {
            op: "init",
            message: format!("nonpositive init bound {bound}"),
        });
    }
    rng.uniform_symmetric(bound, shape)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn printed_bounds_match_formulas() {
        assert!((paper_bound(2.0, 36) - (2.0f64 / 36.0).sqrt()).abs() < 1e-15);
        assert!((paper_bound(2.0, 36) - 0.2357).abs() < 1e-4);
        assert!((paper_bound(1.0, 50) - 0.1414).abs() < 1e-4);
        assert_eq!(
            paper_strict_bound(1.0, 50),
            3.0f64.sqrt() * paper_bound(1.0, 50)
        );
    }

    #[test]
    fn gain_follows_activation() {
        assert_eq!(gain_k(Activation::Relu), 2.0);
        assert_eq!(gain_k(Activation::Tanh), 1.0);
        assert_eq!(gain_k(Activation::Linear), 1.0);
    }

    #[test]
    fn sampled_variance_tracks_scheme() {
        let mut rng = Rng::new(77);
        let spec = InitSpec {
            scheme: InitScheme::Paper,
            k: 2.0,
        };
        let n_v = 36;
        let t = sample_matrix(spec, n_v, n_v, &[100_000], &mut rng).unwrap();
        let var = t.data().iter().map(|v| v * v).sum::<f64>() / t.numel() as f64;
        let expect = 2.0 / (3.0 * n_v as f64);
        assert!(
            (var - expect).abs() < 0.05 * expect,
            "var {var} expect {expect}"
        );

        let strict = InitSpec {
            scheme: InitScheme::PaperStrict,
            k: 2.0,
        };
        let t = sample_matrix(strict, n_v, n_v, &[100_000], &mut rng).unwrap();
        let var = t.data().iter().map(|v| v * v).sum::<f64>() / t.numel() as f64;
        let expect = 2.0 / n_v as f64;
        assert!(
            (var - expect).abs() < 0.05 * expect,
            "strict var {var} expect {expect}"
        );
    }

    #[test]
    fn samples_are_zero_mean() {
        let mut rng = Rng::new(3);
        for scheme in [
            InitScheme::Paper,
            InitScheme::PaperStrict,
            InitScheme::Glorot,
            InitScheme::He,
            InitScheme::NaiveUniform(1.0),
        ] {
            let spec = InitSpec { scheme, k: 1.0 };
            let a = bound_for(spec, 36, 36);
            let n = 50_000;
            let t = sample_matrix(spec, 36, 36, &[n], &mut rng).unwrap();
            let tol = 3.0 * a / (3.0 * n as f64).sqrt();
            assert!(t.mean().abs() < tol, "{scheme:?} mean {}", t.mean());
        }
    }
}
