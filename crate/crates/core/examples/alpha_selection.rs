//! The counterfactual set does not depend on `alpha`; only the choice of
//! the best member does. Sweep `alpha` over one set.

use mtsce::cli::ALPHA_GRID;
use mtsce::synthetic::{saliency_weights, sinusoid_fixture, SinusoidSpec};
use mtsce::{explain, CentroidClassifier, EngineConfig};

fn main() -> mtsce::Result<()> {
    let (train, test) = sinusoid_fixture(&SinusoidSpec::default())?;
    let model = CentroidClassifier::fit(&train, 1.0)?;
    let reference = train.clone().with_weights(saliency_weights(&model, &train)?)?;
    let report = explain(&model, &test.instances()[1], &reference, &EngineConfig::default())?;

    println!("{} counterfactuals", report.ces.len());
    println!("alpha  best  m1     sparsity");
    for alpha in ALPHA_GRID {
        let r = report.with_alpha(alpha)?;
        if let (Some(i), Some(best)) = (r.best_index, r.best()) {
            println!("{alpha:<5}  {i:<4}  {:.3}  {:.3}", best.m1, 1.0 - best.m2);
        }
    }
    Ok(())
}
