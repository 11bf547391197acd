//! Nearest unlike neighbor retrieval.

use crate::classifier::Classifier;
use crate::distance::DistanceKind;
use crate::error::{Error, Result};
use crate::series::{LabeledDataset, MtsInstance};

/// The donor instance and the class it is predicted as.
#[derive(Debug, Clone, PartialEq)]
pub struct NunResult {
    pub nun: MtsInstance,
    pub nun_index: usize,
    /// Predicted class of the neighbor; the counterfactual target.
    pub target_class: usize,
    /// Probability the classifier gives the neighbor for `target_class`.
    pub confidence: f64,
    pub distance: f64,
}

/// Reference candidates that pass the unlike-and-confident filter, as
/// `(index, predicted class, confidence)`.
pub fn unlike_candidates<C: Classifier + ?Sized>(
    classifier: &C,
    query: &MtsInstance,
    reference: &LabeledDataset,
    theta: f64,
) -> Result<Vec<(usize, usize, f64)>> {
    let query_class = classifier.predict(query)?;
    let mut out = Vec::new();
    for (i, r) in reference.instances().iter().enumerate() {
        query.check_same_shape(r)?;
        let proba = classifier.predict_proba(r)?;
        let class = proba.argmax();
        let conf = proba.get(class);
        if class != query_class && conf >= theta {
            out.push((i, class, conf));
        }
    }
    Ok(out)
}

/// Closest reference instance whose predicted class differs from the
/// query's and whose own-class confidence is at least `theta`.
///
/// Filtering uses predicted labels, never the stored ones. Distance ties
/// resolve to the lower reference index. `Ok(None)` means no candidate
/// survived the filter.
pub fn find_nun<C: Classifier + ?Sized>(
    classifier: &C,
    query: &MtsInstance,
    reference: &LabeledDataset,
    theta: f64,
    kind: DistanceKind,
) -> Result<Option<NunResult>> {
    if reference.is_empty() {
        return Err(Error::invalid("reference set is empty"));
    }
    if !(0.0..=1.0).contains(&theta) {
        return Err(Error::invalid(format!("theta must be in [0, 1], got {theta}")));
    }
    let mut best: Option<NunResult> = None;
    for (index, class, confidence) in unlike_candidates(classifier, query, reference, theta)? {
        let candidate = &reference.instances()[index];
        let distance = kind.distance(query, candidate)?;
        if best.as_ref().is_none_or(|b| distance < b.distance) {
            best = Some(NunResult {
                nun: candidate.clone(),
                nun_index: index,
                target_class: class,
                confidence,
                distance,
            });
        }
    }
    Ok(best)
}
