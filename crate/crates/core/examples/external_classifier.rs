//! Explain a model that lives in another process. The classifier speaks
//! line-delimited JSON on stdin/stdout; here the example re-runs itself
//! with `serve` to play that role.

use std::io;

use mtsce::classifier::serve;
use mtsce::synthetic::{sinusoid_fixture, SinusoidSpec};
use mtsce::{explain, CentroidClassifier, Classifier, EngineConfig, ExternalClassifier};

fn main() -> mtsce::Result<()> {
    let (train, test) = sinusoid_fixture(&SinusoidSpec::default())?;
    let local = CentroidClassifier::fit(&train, 1.0)?;

    if std::env::args().nth(1).as_deref() == Some("serve") {
        return serve(&local, io::stdin().lock(), io::stdout().lock());
    }

    let exe = std::env::current_exe()?;
    let remote = ExternalClassifier::spawn(&format!("'{}' serve", exe.display()), train.n_classes())?;
    let query = &test.instances()[0];
    println!("local  {:?}", local.predict_proba(query)?.as_slice());
    println!("remote {:?}", remote.predict_proba(query)?.as_slice());

    let config = EngineConfig { generations: 10, ..Default::default() };
    let report = explain(&remote, query, &train, &config)?;
    println!(
        "{} counterfactuals via the bridge, {} classifier calls",
        report.ces.len(),
        report.call_counts.total()
    );
    Ok(())
}
