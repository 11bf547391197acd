#![allow(dead_code)]

pub mod oracle;

use mtsce::synthetic::{saliency_weights, sinusoid_fixture, SinusoidSpec};
use mtsce::{CentroidClassifier, EngineConfig, LabeledDataset, MtsInstance};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// The desk fixture: reference set with saliency weights, test set, model.
pub fn fixture() -> (LabeledDataset, LabeledDataset, CentroidClassifier) {
    fixture_with(&SinusoidSpec::default())
}

pub fn fixture_with(spec: &SinusoidSpec) -> (LabeledDataset, LabeledDataset, CentroidClassifier) {
    let (train, test) = sinusoid_fixture(spec).unwrap();
    let model = CentroidClassifier::fit(&train, 1.0).unwrap();
    let reference = train.clone().with_weights(saliency_weights(&model, &train).unwrap()).unwrap();
    (reference, test, model)
}

/// A random small problem: shape, bump placement, noise and seed vary.
pub fn random_problem(seed: u64) -> (LabeledDataset, LabeledDataset, CentroidClassifier) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let t = rng.random_range(6..=16);
    let d = rng.random_range(1..=3);
    let a = rng.random_range(0..t - 2);
    let b = rng.random_range(a + 2..=t);
    let spec = SinusoidSpec {
        t,
        d,
        n_train: rng.random_range(6..=12),
        n_test: 2,
        noise: rng.random_range(0.1..0.6),
        bump: (a, b),
        amplitude: rng.random_range(1.0..3.0),
        seed,
    };
    fixture_with(&spec)
}

/// Small, fast search settings.
pub fn tiny_config(seed: u64) -> EngineConfig {
    EngineConfig { pop_size: 8, generations: 4, partitions: 3, seed, ..Default::default() }
}

pub fn random_series(rng: &mut ChaCha8Rng, id: &str, t: usize, d: usize) -> MtsInstance {
    let values = (0..t * d).map(|_| rng.random_range(-3.0..3.0)).collect();
    MtsInstance::new(id, t, d, values).unwrap()
}

/// Write the fixture as `train.ts`, `test.ts` and `weights.csv` under
/// `dir`, keyed the way the `.ts` reader assigns ids (record position).
pub fn write_fixture_files(dir: &std::path::Path) {
    use mtsce::ingest::{serialize_ts, serialize_weights};
    let (reference, test, _) = fixture();
    std::fs::write(dir.join("train.ts"), serialize_ts(&reference, "fixture").unwrap()).unwrap();
    std::fs::write(dir.join("test.ts"), serialize_ts(&test, "fixture").unwrap()).unwrap();
    let weights = reference.weights().unwrap();
    let by_position = reference
        .instances()
        .iter()
        .enumerate()
        .map(|(i, x)| (i.to_string(), weights[x.id()].clone()))
        .collect();
    std::fs::write(dir.join("weights.csv"), serialize_weights(&by_position)).unwrap();
}
