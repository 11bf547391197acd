//! Explain one query of the synthetic fixture and print its counterfactual
//! set and the best member.

use mtsce::synthetic::{saliency_weights, sinusoid_fixture, SinusoidSpec};
use mtsce::{explain, CentroidClassifier, Classifier, EngineConfig};

fn main() -> mtsce::Result<()> {
    let (train, test) = sinusoid_fixture(&SinusoidSpec::default())?;
    let model = CentroidClassifier::fit(&train, 1.0)?;
    let reference = train.clone().with_weights(saliency_weights(&model, &train)?)?;

    let query = &test.instances()[0];
    let report = explain(&model, query, &reference, &EngineConfig::default())?;

    println!(
        "query {} (class {}) -> NUN {} (class {})",
        report.query_id, report.query_class, report.nun_id, report.target_class
    );
    println!("naive window length: {:?}", report.naive_length);
    for p in &report.probes {
        println!("  probe k={:<2} window={:?} survivors={}", p.length, p.window, p.survivors);
    }
    println!("{} counterfactuals:", report.ces.len());
    for (j, ce) in report.ces.iter().enumerate() {
        let mark = if Some(j) == report.best_index { '*' } else { ' ' };
        println!(
            " {mark} m1={:.3} m2={:.3} m3={:.3} window=[{}, {}] changed={}",
            ce.m1,
            ce.m2,
            ce.m3,
            ce.window.start(),
            ce.window.end(),
            ce.genome.popcount()
        );
    }
    if let Some(best) = report.best() {
        println!("best predicted as {}", model.predict(&best.instance)?);
    }
    println!("classifier calls: {:?}", report.call_counts);
    Ok(())
}
