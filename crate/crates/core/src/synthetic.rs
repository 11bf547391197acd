//! Seeded toy datasets for examples and tests.
//!
//! Two classes of noisy sinusoids. Both share a per-channel carrier wave;
//! class 1 adds a half-sine bump over a fixed stretch of time steps, so the
//! discriminative signal is local and window substitution can flip it.

use std::collections::HashMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::classifier::CentroidClassifier;
use crate::error::{Error, Result};
use crate::series::{FeatureWeights, LabeledDataset, MtsInstance};

#[derive(Debug, Clone, PartialEq)]
pub struct SinusoidSpec {
    pub t: usize,
    pub d: usize,
    pub n_train: usize,
    pub n_test: usize,
    /// Standard deviation of the additive Gaussian noise.
    pub noise: f64,
    /// Half-open range of time steps carrying the class-1 bump.
    pub bump: (usize, usize),
    pub amplitude: f64,
    pub seed: u64,
}

impl Default for SinusoidSpec {
    fn default() -> Self {
        Self { t: 30, d: 3, n_train: 20, n_test: 10, noise: 0.3, bump: (5, 15), amplitude: 2.0, seed: 0 }
    }
}

fn carrier(s: usize, ch: usize, t: usize) -> f64 {
    let phase = ch as f64 * std::f64::consts::FRAC_PI_3;
    (2.0 * std::f64::consts::TAU * s as f64 / t as f64 + phase).sin()
}

fn draw(spec: &SinusoidSpec, id: String, class: usize, rng: &mut ChaCha8Rng, noise: &Normal<f64>) -> Result<MtsInstance> {
    let (a, b) = spec.bump;
    let mut values = Vec::with_capacity(spec.t * spec.d);
    for s in 0..spec.t {
        let bump = if class == 1 && (a..b).contains(&s) {
            spec.amplitude * (std::f64::consts::PI * (s - a) as f64 / (b - a) as f64).sin()
        } else {
            0.0
        };
        for ch in 0..spec.d {
            values.push(carrier(s, ch, spec.t) + bump + noise.sample(rng));
        }
    }
    MtsInstance::new(id, spec.t, spec.d, values)
}

/// Train and test splits with alternating labels `0, 1, 0, ...`. Ids are
/// `train-<i>` and `test-<i>`.
pub fn sinusoid_fixture(spec: &SinusoidSpec) -> Result<(LabeledDataset, LabeledDataset)> {
    let (a, b) = spec.bump;
    if a >= b || b > spec.t {
        return Err(Error::invalid(format!("bump range {a}..{b} does not fit {} steps", spec.t)));
    }
    if spec.n_train < 2 || spec.n_test == 0 {
        return Err(Error::invalid("need at least two training and one test instance"));
    }
    let noise = Normal::new(0.0, spec.noise).map_err(|e| Error::invalid(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut split = |prefix: &str, n: usize| -> Result<LabeledDataset> {
        let labels: Vec<usize> = (0..n).map(|i| i % 2).collect();
        let instances = labels
            .iter()
            .enumerate()
            .map(|(i, &c)| draw(spec, format!("{prefix}-{i}"), c, &mut rng, &noise))
            .collect::<Result<Vec<_>>>()?;
        LabeledDataset::new(instances, labels, 2)
    };
    let train = split("train", spec.n_train)?;
    let test = split("test", spec.n_test)?;
    Ok((train, test))
}

/// Saliency weights of every instance in `data`, keyed by id.
pub fn saliency_weights(model: &CentroidClassifier, data: &LabeledDataset) -> Result<HashMap<String, FeatureWeights>> {
    data.instances()
        .iter()
        .map(|x| Ok((x.id().to_string(), model.saliency(x)?)))
        .collect()
}
