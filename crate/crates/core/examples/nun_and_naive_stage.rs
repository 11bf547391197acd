//! Nearest unlike neighbor, its most influential window, and the naive
//! counterfactual grown from it.

use mtsce::distance::DistanceKind;
use mtsce::nun::find_nun;
use mtsce::series::hamming;
use mtsce::subsequence::{find_subsequence, naive_stage};
use mtsce::synthetic::{saliency_weights, sinusoid_fixture, SinusoidSpec};
use mtsce::{CentroidClassifier, Classifier, Error};

fn main() -> mtsce::Result<()> {
    let (train, test) = sinusoid_fixture(&SinusoidSpec::default())?;
    let model = CentroidClassifier::fit(&train, 1.0)?;
    let reference = train.clone().with_weights(saliency_weights(&model, &train)?)?;
    let query = &test.instances()[0];

    let nun = find_nun(&model, query, &reference, 0.51, DistanceKind::L2)?.ok_or(Error::NoUnlikeNeighbor)?;
    println!(
        "query {} (class {}) -> NUN {} (class {}, confidence {:.3}, distance {:.3})",
        query.id(),
        model.predict(query)?,
        nun.nun.id(),
        nun.target_class,
        nun.confidence,
        nun.distance
    );

    let weights = reference.weights_for(nun.nun.id()).ok_or_else(|| Error::MissingWeights(nun.nun.id().into()))?;
    for ell in [2, 5, 10] {
        let w = find_subsequence(weights, ell)?;
        println!("top window of length {ell:>2}: [{}, {}]", w.start(), w.end());
    }

    let naive = naive_stage(&model, query, &nun, weights, 0.51)?;
    println!(
        "naive CE: window [{}, {}], length {}, P(target) {:.3}, {} cells changed, {} probes",
        naive.window.start(),
        naive.window.end(),
        naive.length,
        naive.confidence,
        hamming(&naive.c0, query)?,
        naive.probes
    );
    Ok(())
}
