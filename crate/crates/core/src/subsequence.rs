//! Most-influential window search and the naive substitution stage.

use crate::classifier::Classifier;
use crate::error::{Error, Result};
use crate::nun::NunResult;
use crate::series::{substitute_full, FeatureWeights, MtsInstance, Subsequence};

/// Window of length `ell` with the largest weight sum, found with a
/// running sum in one pass. Ties keep the earliest start.
pub fn find_subsequence(weights: &FeatureWeights, ell: usize) -> Result<Subsequence> {
    let w = weights.as_slice();
    let t = w.len();
    if ell == 0 || ell > t {
        return Err(Error::invalid(format!("window length {ell} must be in 1..={t}")));
    }
    let mut start = 0;
    let mut max_sum: f64 = w[..ell].iter().sum();
    let mut curr = max_sum;
    for i in 1..=t - ell {
        curr = curr - w[i - 1] + w[i + ell - 1];
        if curr > max_sum {
            max_sum = curr;
            start = i;
        }
    }
    Subsequence::with_len(start, ell, t)
}

/// Outcome of the naive stage: the first full substitution that reaches
/// the confidence threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct NaiveResult {
    pub c0: MtsInstance,
    pub window: Subsequence,
    pub length: usize,
    /// `P(f(c0) = target)`.
    pub confidence: f64,
    /// Number of classifier probes spent, one per tried length.
    pub probes: usize,
}

/// Grow the substituted window from length 2 until the target-class
/// probability of the substituted series reaches `theta`.
///
/// `weights` are the neighbor's. At length `t` the result equals the
/// neighbor itself, which passed the same threshold during retrieval, so
/// the loop terminates for any deterministic classifier.
pub fn naive_stage<C: Classifier + ?Sized>(
    classifier: &C,
    query: &MtsInstance,
    nun: &NunResult,
    weights: &FeatureWeights,
    theta: f64,
) -> Result<NaiveResult> {
    query.check_same_shape(&nun.nun)?;
    let t = query.len();
    if weights.len() != t {
        return Err(Error::shape(format!("weights have length {}, series {t}", weights.len())));
    }
    if t < 2 {
        return Err(Error::invalid("series of length 1 have no window of length 2"));
    }
    for ell in 2..=t {
        let window = find_subsequence(weights, ell)?;
        let c0 = substitute_full(query, &nun.nun, window)?;
        let confidence = classifier.predict_proba(&c0)?.get(nun.target_class);
        if confidence >= theta {
            return Ok(NaiveResult { c0, window, length: ell, confidence, probes: ell - 1 });
        }
    }
    Err(Error::Prediction(format!(
        "full substitution of the neighbor did not reach theta = {theta}; the classifier is not deterministic"
    )))
}
