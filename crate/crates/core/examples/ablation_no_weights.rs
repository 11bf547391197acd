//! Weights versus no-weights search on the synthetic fixture.
//!
//! Without weights the window search starts from half the series length
//! and places windows by position alone; with saliency weights it follows
//! the neighbor's most influential stretch.

use std::time::Instant;

use mtsce::metrics::{summarize, ExplainedInstance, YnnMode};
use mtsce::synthetic::{saliency_weights, sinusoid_fixture, SinusoidSpec};
use mtsce::{explain_batch, CentroidClassifier, EngineConfig, MtsInstance};

fn main() -> mtsce::Result<()> {
    let (train, test) = sinusoid_fixture(&SinusoidSpec::default())?;
    let model = CentroidClassifier::fit(&train, 1.0)?;
    let reference = train.clone().with_weights(saliency_weights(&model, &train)?)?;

    for use_weights in [true, false] {
        let config = EngineConfig { use_weights, ..Default::default() };
        let started = Instant::now();
        let outcomes = explain_batch(&model, &test, &reference, &config)?;
        let ces: Vec<Vec<MtsInstance>> = outcomes
            .iter()
            .map(|o| o.report().map(|r| r.ces.iter().map(|c| c.instance.clone()).collect()).unwrap_or_default())
            .collect();
        let instances: Vec<ExplainedInstance<'_>> = test
            .instances()
            .iter()
            .zip(&ces)
            .map(|(q, c)| ExplainedInstance { query: q, counterfactuals: c })
            .collect();
        let m = summarize(&model, &instances, &reference, test.len(), YnnMode::Prose)?;
        println!(
            "weights={use_weights:<5} cov={:>5.1} val={:.2} spa={:.3} conf={:.3} l1={:.3} l2={:.3} dtw={:.3} ces={} ({:.2?})",
            m.cov,
            m.val.unwrap_or(f64::NAN),
            m.spa.unwrap_or(f64::NAN),
            m.conf.unwrap_or(f64::NAN),
            m.l1.unwrap_or(f64::NAN),
            m.l2.unwrap_or(f64::NAN),
            m.dtw.unwrap_or(f64::NAN),
            m.n_ces,
            started.elapsed()
        );
    }
    Ok(())
}
