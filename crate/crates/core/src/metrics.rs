//! Aggregate quality measures over explained instances.
//!
//! Every measure except coverage is a mean over instances of a mean over
//! that instance's counterfactuals. Instances without counterfactuals are
//! left out of those means; they only lower coverage.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::classifier::Classifier;
use crate::distance::{dist_dtw, dist_l1, dist_l2, knn_indices, DistanceKind};
use crate::error::{Error, Result};
use crate::series::{hamming, LabeledDataset, MtsInstance};

/// A query and the counterfactuals being scored for it.
#[derive(Debug, Clone, Copy)]
pub struct ExplainedInstance<'a> {
    pub query: &'a MtsInstance,
    pub counterfactuals: &'a [MtsInstance],
}

/// Direction of the neighborhood-agreement score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum YnnMode {
    /// Fraction of neighbors agreeing with the counterfactual's class.
    #[default]
    Prose,
    /// One minus that fraction.
    Literal,
}

impl fmt::Display for YnnMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            YnnMode::Prose => "prose",
            YnnMode::Literal => "literal",
        })
    }
}

impl FromStr for YnnMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "prose" => Ok(YnnMode::Prose),
            "literal" => Ok(YnnMode::Literal),
            other => Err(Error::invalid(format!("unknown ynn mode {other:?}"))),
        }
    }
}

/// Mean over non-empty instances of `score(...) / |counterfactuals|`, where
/// `score` returns the sum over one instance's counterfactuals.
fn mean_of_instance_sums<F>(instances: &[ExplainedInstance<'_>], what: &'static str, mut score: F) -> Result<f64>
where
    F: FnMut(&MtsInstance, &[MtsInstance]) -> Result<f64>,
{
    let mut total = 0.0;
    let mut n = 0usize;
    for inst in instances {
        if inst.counterfactuals.is_empty() {
            continue;
        }
        total += score(inst.query, inst.counterfactuals)? / inst.counterfactuals.len() as f64;
        n += 1;
    }
    if n == 0 {
        return Err(Error::Undefined(what));
    }
    Ok(total / n as f64)
}

fn nested_mean<F>(instances: &[ExplainedInstance<'_>], what: &'static str, mut score: F) -> Result<f64>
where
    F: FnMut(&MtsInstance, &MtsInstance) -> Result<f64>,
{
    mean_of_instance_sums(instances, what, |q, ces| ces.iter().map(|ce| score(q, ce)).sum())
}

/// Mean fraction of unchanged cells.
pub fn sparsity(instances: &[ExplainedInstance<'_>]) -> Result<f64> {
    nested_mean(instances, "sparsity", |q, ce| {
        Ok(1.0 - hamming(q, ce)? as f64 / q.cells() as f64)
    })
}

/// Mean of `1 - P(f(ce) = f(query))`.
pub fn confidence_metric<C: Classifier + ?Sized>(classifier: &C, instances: &[ExplainedInstance<'_>]) -> Result<f64> {
    mean_of_instance_sums(instances, "confidence", |q, ces| {
        let original = classifier.predict(q)?;
        ces.iter()
            .map(|ce| classifier.predict_proba(ce).map(|p| 1.0 - p.get(original)))
            .sum()
    })
}

/// Mean fraction of counterfactuals whose predicted class differs from
/// the query's.
pub fn validity<C: Classifier + ?Sized>(classifier: &C, instances: &[ExplainedInstance<'_>]) -> Result<f64> {
    mean_of_instance_sums(instances, "validity", |q, ces| {
        let original = classifier.predict(q)?;
        let mut valid = 0.0;
        for ce in ces {
            if classifier.predict(ce)? != original {
                valid += 1.0;
            }
        }
        Ok(valid)
    })
}

/// Neighborhood agreement: for each counterfactual, the share of its `k`
/// DTW-nearest reference instances predicted as the counterfactual's class.
pub fn ynn<C: Classifier + ?Sized>(
    classifier: &C,
    instances: &[ExplainedInstance<'_>],
    reference: &LabeledDataset,
    k: usize,
    mode: YnnMode,
) -> Result<f64> {
    if reference.len() < k || k == 0 {
        return Err(Error::invalid(format!(
            "yNN needs k in 1..={} reference instances, got k = {k}",
            reference.len()
        )));
    }
    let predicted: Vec<usize> = reference
        .instances()
        .iter()
        .map(|r| classifier.predict(r))
        .collect::<Result<_>>()?;
    nested_mean(instances, "yNN", |_, ce| {
        let class = classifier.predict(ce)?;
        let neighbors = knn_indices(ce, reference.instances(), k, DistanceKind::Dtw)?;
        let agree = neighbors.iter().filter(|&&i| predicted[i] == class).count() as f64 / k as f64;
        Ok(match mode {
            YnnMode::Prose => agree,
            YnnMode::Literal => 1.0 - agree,
        })
    })
}

/// Percentage of attempted queries with at least one counterfactual.
pub fn coverage(instances: &[ExplainedInstance<'_>], attempted: usize) -> Result<f64> {
    if attempted == 0 {
        return Err(Error::Undefined("coverage"));
    }
    let found = instances.iter().filter(|i| !i.counterfactuals.is_empty()).count();
    if found > attempted {
        return Err(Error::invalid(format!("{found} explained instances but only {attempted} attempted")));
    }
    Ok(100.0 * found as f64 / attempted as f64)
}

/// Mean L1, L2 and DTW distance between each counterfactual and its query,
/// averaged per instance first.
pub fn proximity_means(instances: &[ExplainedInstance<'_>]) -> Result<(f64, f64, f64)> {
    Ok((
        nested_mean(instances, "l1", |q, ce| dist_l1(q, ce))?,
        nested_mean(instances, "l2", |q, ce| dist_l2(q, ce))?,
        nested_mean(instances, "dtw", |q, ce| dist_dtw(q, ce))?,
    ))
}

/// All measures at once. Fields are `None` when undefined (no
/// counterfactual anywhere).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsSummary {
    pub cov: f64,
    pub val: Option<f64>,
    pub spa: Option<f64>,
    pub conf: Option<f64>,
    pub ynn: Option<f64>,
    pub l1: Option<f64>,
    pub l2: Option<f64>,
    pub dtw: Option<f64>,
    pub n_instances: usize,
    pub n_ces: usize,
}

fn defined(r: Result<f64>) -> Result<Option<f64>> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(Error::Undefined(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Number of neighbors used by yNN.
pub const YNN_K: usize = 5;

pub fn summarize<C: Classifier + ?Sized>(
    classifier: &C,
    instances: &[ExplainedInstance<'_>],
    reference: &LabeledDataset,
    attempted: usize,
    ynn_mode: YnnMode,
) -> Result<MetricsSummary> {
    let proximity = match proximity_means(instances) {
        Ok((a, b, c)) => (Some(a), Some(b), Some(c)),
        Err(Error::Undefined(_)) => (None, None, None),
        Err(e) => return Err(e),
    };
    Ok(MetricsSummary {
        cov: coverage(instances, attempted)?,
        val: defined(validity(classifier, instances))?,
        spa: defined(sparsity(instances))?,
        conf: defined(confidence_metric(classifier, instances))?,
        ynn: defined(ynn(classifier, instances, reference, YNN_K.min(reference.len()), ynn_mode))?,
        l1: proximity.0,
        l2: proximity.1,
        dtw: proximity.2,
        n_instances: attempted,
        n_ces: instances.iter().map(|i| i.counterfactuals.len()).sum(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifier::CentroidClassifier;

    fn series(v: &[f64]) -> MtsInstance {
        MtsInstance::new("s", v.len(), 1, v.to_vec()).unwrap()
    }

    #[test]
    fn sparsity_hand_count() {
        let q = series(&[0.0; 8]);
        let mut a = vec![0.0; 8];
        a[0] = 1.0;
        a[1] = 1.0;
        let mut b = vec![0.0; 8];
        b[..4].fill(1.0);
        let ces = [series(&a), series(&b)];
        let inst = [ExplainedInstance { query: &q, counterfactuals: &ces }];
        assert!((sparsity(&inst).unwrap() - 0.625).abs() < 1e-15);
    }

    #[test]
    fn sparsity_extremes_and_undefined() {
        let q = series(&[0.0; 4]);
        let same = [q.clone()];
        let full = [series(&[1.0; 4])];
        assert_eq!(sparsity(&[ExplainedInstance { query: &q, counterfactuals: &same }]).unwrap(), 1.0);
        assert_eq!(sparsity(&[ExplainedInstance { query: &q, counterfactuals: &full }]).unwrap(), 0.0);
        let none: [MtsInstance; 0] = [];
        assert!(matches!(
            sparsity(&[ExplainedInstance { query: &q, counterfactuals: &none }]),
            Err(Error::Undefined(_))
        ));
    }

    #[test]
    fn coverage_counts() {
        let q = series(&[0.0; 2]);
        let one = [q.clone()];
        let none: [MtsInstance; 0] = [];
        let mut insts = vec![ExplainedInstance { query: &q, counterfactuals: &one }; 7];
        assert_eq!(coverage(&insts, 7).unwrap(), 100.0);
        insts.extend(vec![ExplainedInstance { query: &q, counterfactuals: &none }; 3]);
        assert_eq!(coverage(&insts, 10).unwrap(), 70.0);
        assert_eq!(coverage(&insts[7..], 10).unwrap(), 0.0);
        assert!(coverage(&[], 0).is_err());
    }

    #[test]
    fn validity_and_confidence_on_binary_model() {
        let train = LabeledDataset::new(vec![series(&[0.0, 0.0]), series(&[4.0, 4.0])], vec![0, 1], 2).unwrap();
        let model = CentroidClassifier::fit(&train, 1.0).unwrap();
        let q = series(&[0.0, 0.0]);
        let ces = [series(&[4.0, 4.0]), series(&[3.5, 4.0]), series(&[4.0, 3.0]), series(&[0.5, 0.0])];
        let inst = [ExplainedInstance { query: &q, counterfactuals: &ces }];
        assert_eq!(validity(&model, &inst).unwrap(), 0.75);
        let expected: f64 = ces
            .iter()
            .map(|c| 1.0 - model.predict_proba(c).unwrap().get(0))
            .sum::<f64>()
            / 4.0;
        assert!((confidence_metric(&model, &inst).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn ynn_agreement_directions() {
        let train = LabeledDataset::new(
            (0..6).map(|i| series(&[i as f64 * 0.1, 0.0])).chain([series(&[9.0, 9.0])]).collect(),
            vec![0, 0, 0, 0, 0, 0, 1],
            2,
        )
        .unwrap();
        let model = CentroidClassifier::fit(&train, 1.0).unwrap();
        let q = series(&[9.0, 9.0]);
        let ce = [series(&[0.0, 0.0])];
        let inst = [ExplainedInstance { query: &q, counterfactuals: &ce }];
        assert_eq!(ynn(&model, &inst, &train, 5, YnnMode::Prose).unwrap(), 1.0);
        assert_eq!(ynn(&model, &inst, &train, 5, YnnMode::Literal).unwrap(), 0.0);
        assert!(ynn(&model, &inst, &train, 8, YnnMode::Prose).is_err());
    }
}
