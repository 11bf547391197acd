//! A batch run scored with the evaluation metrics, written as report files
//! and re-scored from disk.

use mtsce::report::{metrics_from_reports, ClassifierSpec, MetricsScope, ReportFile, RunManifest};
use mtsce::synthetic::{saliency_weights, sinusoid_fixture, SinusoidSpec};
use mtsce::{explain_batch, CentroidClassifier, EngineConfig, YnnMode};

fn main() -> mtsce::Result<()> {
    let (train, test) = sinusoid_fixture(&SinusoidSpec::default())?;
    let model = CentroidClassifier::fit(&train, 1.0)?;
    let reference = train.clone().with_weights(saliency_weights(&model, &train)?)?;
    let config = EngineConfig { seed: 3, ..Default::default() };

    let outcomes = explain_batch(&model, &test, &reference, &config)?;
    let manifest = RunManifest::new(
        config,
        ClassifierSpec::Centroid { temperature: 1.0 },
        Vec::new(),
        YnnMode::Prose,
        MetricsScope::All,
    );
    let reports: Vec<ReportFile> = outcomes.iter().map(|o| ReportFile::from_outcome(o, manifest.clone())).collect();

    // round-trip through the on-disk format
    let dir = std::env::temp_dir().join("mtsce-benchmark-example");
    std::fs::create_dir_all(&dir)?;
    let mut reloaded = Vec::new();
    for (i, r) in reports.iter().enumerate() {
        let path = dir.join(format!("{i:04}.json"));
        std::fs::write(&path, r.to_json()?)?;
        reloaded.push(ReportFile::from_json(&std::fs::read_to_string(&path)?)?);
    }

    for scope in [MetricsScope::All, MetricsScope::Best] {
        let m = metrics_from_reports(&model, &reloaded, &test, &reference, scope, YnnMode::Prose)?;
        println!(
            "{scope:<4} cov={:.0} val={:.2} spa={:.3} conf={:.3} ynn={:.2} l1={:.2} l2={:.2} dtw={:.2} ces={}",
            m.cov,
            m.val.unwrap_or(f64::NAN),
            m.spa.unwrap_or(f64::NAN),
            m.conf.unwrap_or(f64::NAN),
            m.ynn.unwrap_or(f64::NAN),
            m.l1.unwrap_or(f64::NAN),
            m.l2.unwrap_or(f64::NAN),
            m.dtw.unwrap_or(f64::NAN),
            m.n_ces
        );
    }
    println!("reports in {}", dir.display());
    Ok(())
}
