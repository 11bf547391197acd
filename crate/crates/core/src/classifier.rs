//! The prediction contract and its implementations.
//!
//! [`CentroidClassifier`] is a small self-contained model: a softmax over
//! negative scaled Euclidean distances to per-class mean series. It is
//! smooth in its input, so substituting donor values moves probabilities
//! continuously.
//!
//! [`ExternalClassifier`] drives a child process over a line protocol, one
//! JSON document per line:
//!
//! ```text
//! -> {"op":"hello"}
//! <- {"n_classes":K}
//! -> {"op":"predict","series":[[...d reals...], ...t rows...]}
//! <- {"proba":[...K reals...]}
//! ```

use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, ChildStdout, Command, Stdio};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use crate::distance::dist_l2;
use crate::error::{Error, Result};
use crate::series::{FeatureWeights, LabeledDataset, MtsInstance};

const SUM_TOLERANCE: f64 = 1e-9;
const EXTERNAL_TOLERANCE: f64 = 1e-6;

/// Class probabilities: entries in `[0, 1]` summing to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbabilityVector(Vec<f64>);

impl ProbabilityVector {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::Prediction("empty probability vector".into()));
        }
        if probs.iter().any(|p| !p.is_finite() || !(0.0..=1.0).contains(p)) {
            return Err(Error::Prediction(format!("probabilities out of [0, 1]: {probs:?}")));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::Prediction(format!("probabilities sum to {sum}")));
        }
        Ok(Self(probs))
    }

    /// Accept a vector that is a valid distribution up to `1e-6` of
    /// serialization noise, renormalizing it. Larger deviations are errors.
    pub fn renormalized(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() || probs.iter().any(|p| !p.is_finite()) {
            return Err(Error::Prediction(format!("invalid probabilities {probs:?}")));
        }
        if probs
            .iter()
            .any(|&p| p < -EXTERNAL_TOLERANCE || p > 1.0 + EXTERNAL_TOLERANCE)
        {
            return Err(Error::Prediction(format!("probabilities out of [0, 1]: {probs:?}")));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > EXTERNAL_TOLERANCE {
            return Err(Error::Prediction(format!("probabilities sum to {sum}")));
        }
        let clamped: Vec<f64> = probs.iter().map(|p| p.clamp(0.0, 1.0)).collect();
        let total: f64 = clamped.iter().sum();
        Self::new(clamped.into_iter().map(|p| p / total).collect())
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, class: usize) -> f64 {
        self.0[class]
    }

    /// Most probable class; ties go to the lowest index.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &p) in self.0.iter().enumerate().skip(1) {
            if p > self.0[best] {
                best = i;
            }
        }
        best
    }

    pub fn max(&self) -> f64 {
        self.0[self.argmax()]
    }
}

/// Anything that maps a series to class probabilities, deterministically.
pub trait Classifier: Send + Sync {
    fn n_classes(&self) -> usize;

    fn predict_proba(&self, x: &MtsInstance) -> Result<ProbabilityVector>;

    fn predict(&self, x: &MtsInstance) -> Result<usize> {
        Ok(self.predict_proba(x)?.argmax())
    }
}

impl<C: Classifier + ?Sized> Classifier for &C {
    fn n_classes(&self) -> usize {
        (**self).n_classes()
    }

    fn predict_proba(&self, x: &MtsInstance) -> Result<ProbabilityVector> {
        (**self).predict_proba(x)
    }
}

impl<C: Classifier + ?Sized> Classifier for Box<C> {
    fn n_classes(&self) -> usize {
        (**self).n_classes()
    }

    fn predict_proba(&self, x: &MtsInstance) -> Result<ProbabilityVector> {
        (**self).predict_proba(x)
    }
}

impl<C: Classifier + ?Sized> Classifier for Arc<C> {
    fn n_classes(&self) -> usize {
        (**self).n_classes()
    }

    fn predict_proba(&self, x: &MtsInstance) -> Result<ProbabilityVector> {
        (**self).predict_proba(x)
    }
}

/// Numerically stable softmax.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

/// Nearest-centroid model with a softmax over `-temperature * distance`.
#[derive(Debug, Clone)]
pub struct CentroidClassifier {
    centroids: Vec<MtsInstance>,
    temperature: f64,
}

impl CentroidClassifier {
    /// Fit per-class cell-wise means. Every class needs at least one instance.
    pub fn fit(train: &LabeledDataset, temperature: f64) -> Result<Self> {
        if !(temperature.is_finite() && temperature > 0.0) {
            return Err(Error::Fit(format!("temperature must be positive, got {temperature}")));
        }
        let (t, d) = train.shape().ok_or_else(|| Error::Fit("empty training set".into()))?;
        let k = train.n_classes();
        let mut sums = vec![vec![0.0; t * d]; k];
        let mut counts = vec![0usize; k];
        for (inst, &label) in train.instances().iter().zip(train.labels()) {
            counts[label] += 1;
            for (s, v) in sums[label].iter_mut().zip(inst.values()) {
                *s += v;
            }
        }
        if let Some(empty) = counts.iter().position(|&c| c == 0) {
            return Err(Error::Fit(format!("class {empty} has no training instances")));
        }
        let centroids = sums
            .into_iter()
            .zip(&counts)
            .enumerate()
            .map(|(c, (sum, &n))| {
                let mean = sum.into_iter().map(|v| v / n as f64).collect();
                MtsInstance::new(format!("centroid-{c}"), t, d, mean)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { centroids, temperature })
    }

    pub fn from_centroids(centroids: Vec<MtsInstance>, temperature: f64) -> Result<Self> {
        if centroids.is_empty() {
            return Err(Error::Fit("no centroids".into()));
        }
        if !(temperature.is_finite() && temperature > 0.0) {
            return Err(Error::Fit(format!("temperature must be positive, got {temperature}")));
        }
        for c in &centroids[1..] {
            centroids[0].check_same_shape(c)?;
        }
        Ok(Self { centroids, temperature })
    }

    pub fn centroids(&self) -> &[MtsInstance] {
        &self.centroids
    }

    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    /// Per-time-step evidence for the predicted class against its nearest
    /// rival centroid, averaged over channels. A stand-in for CAM weights.
    pub fn saliency(&self, x: &MtsInstance) -> Result<FeatureWeights> {
        let own = self.predict(x)?;
        let rival = self
            .centroids
            .iter()
            .enumerate()
            .filter(|(c, _)| *c != own)
            .map(|(c, cen)| dist_l2(x, cen).map(|dist| (dist, c)))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
            .map(|(_, c)| c);
        let (t, d) = x.shape();
        let Some(rival) = rival else {
            return FeatureWeights::new(vec![0.0; t]);
        };
        let (mine, theirs) = (&self.centroids[own], &self.centroids[rival]);
        let weights = (0..t)
            .map(|s| {
                (0..d)
                    .map(|ch| {
                        let v = x.get(s, ch);
                        (v - theirs.get(s, ch)).powi(2) - (v - mine.get(s, ch)).powi(2)
                    })
                    .sum::<f64>()
                    / d as f64
            })
            .collect();
        FeatureWeights::new(weights)
    }
}

impl Classifier for CentroidClassifier {
    fn n_classes(&self) -> usize {
        self.centroids.len()
    }

    fn predict_proba(&self, x: &MtsInstance) -> Result<ProbabilityVector> {
        let logits = self
            .centroids
            .iter()
            .map(|c| dist_l2(x, c).map(|dist| -self.temperature * dist))
            .collect::<Result<Vec<_>>>()?;
        ProbabilityVector::new(softmax(&logits))
    }
}

/// Wraps a classifier and counts prediction calls.
#[derive(Debug)]
pub struct CountingClassifier<C> {
    inner: C,
    calls: AtomicU64,
}

impl<C: Classifier> CountingClassifier<C> {
    pub fn new(inner: C) -> Self {
        Self { inner, calls: AtomicU64::new(0) }
    }

    pub fn calls(&self) -> u64 {
        self.calls.load(Ordering::SeqCst)
    }

    pub fn inner(&self) -> &C {
        &self.inner
    }
}

impl<C: Classifier> Classifier for CountingClassifier<C> {
    fn n_classes(&self) -> usize {
        self.inner.n_classes()
    }

    fn predict_proba(&self, x: &MtsInstance) -> Result<ProbabilityVector> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        self.inner.predict_proba(x)
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "lowercase")]
pub enum Request {
    Hello,
    Predict { series: Vec<Vec<f64>> },
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HelloReply {
    pub n_classes: usize,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PredictReply {
    pub proba: Vec<f64>,
}

struct Channel {
    child: Child,
    stdin: ChildStdin,
    stdout: BufReader<ChildStdout>,
}

impl Channel {
    fn round_trip(&mut self, request: &Request) -> Result<String> {
        let mut line = serde_json::to_string(request)?;
        line.push('\n');
        self.stdin
            .write_all(line.as_bytes())
            .and_then(|()| self.stdin.flush())
            .map_err(|e| Error::Prediction(format!("cannot write to classifier process: {e}")))?;
        let mut reply = String::new();
        let n = self
            .stdout
            .read_line(&mut reply)
            .map_err(|e| Error::Prediction(format!("cannot read from classifier process: {e}")))?;
        if n == 0 {
            let status = self.child.try_wait().ok().flatten();
            return Err(Error::Prediction(match status {
                Some(s) => format!("classifier process exited ({s})"),
                None => "classifier process closed its output".into(),
            }));
        }
        Ok(reply)
    }
}

/// Bridge to a model running in a child process (`sh -c <command>`).
/// Requests are serialized over the single child.
pub struct ExternalClassifier {
    channel: Mutex<Channel>,
    n_classes: usize,
}

impl ExternalClassifier {
    /// Launch `command` and perform the handshake.
    pub fn spawn(command: &str, n_classes: usize) -> Result<Self> {
        let mut child = Command::new("sh")
            .arg("-c")
            .arg(command)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .spawn()?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = BufReader::new(child.stdout.take().expect("piped stdout"));
        let mut channel = Channel { child, stdin, stdout };
        let reply = channel.round_trip(&Request::Hello)?;
        let hello: HelloReply = serde_json::from_str(reply.trim())
            .map_err(|e| Error::Prediction(format!("bad handshake reply {:?}: {e}", reply.trim())))?;
        if hello.n_classes != n_classes {
            return Err(Error::Prediction(format!(
                "classifier process reports {} classes, expected {n_classes}",
                hello.n_classes
            )));
        }
        Ok(Self { channel: Mutex::new(channel), n_classes })
    }
}

impl Classifier for ExternalClassifier {
    fn n_classes(&self) -> usize {
        self.n_classes
    }

    fn predict_proba(&self, x: &MtsInstance) -> Result<ProbabilityVector> {
        let request = Request::Predict { series: x.rows() };
        let reply = {
            let mut channel = self
                .channel
                .lock()
                .map_err(|_| Error::Prediction("classifier channel poisoned".into()))?;
            channel.round_trip(&request)?
        };
        let parsed: PredictReply = serde_json::from_str(reply.trim())
            .map_err(|e| Error::Prediction(format!("malformed reply {:?}: {e}", reply.trim())))?;
        if parsed.proba.len() != self.n_classes {
            return Err(Error::Prediction(format!(
                "reply has {} probabilities, expected {}",
                parsed.proba.len(),
                self.n_classes
            )));
        }
        ProbabilityVector::renormalized(parsed.proba)
    }
}

impl Drop for ExternalClassifier {
    fn drop(&mut self) {
        if let Ok(channel) = self.channel.get_mut() {
            let _ = channel.child.kill();
            let _ = channel.child.wait();
        }
    }
}

/// Serve `classifier` over the line protocol until `input` is exhausted.
pub fn serve<C, R, W>(classifier: &C, input: R, mut output: W) -> Result<()>
where
    C: Classifier + ?Sized,
    R: BufRead,
    W: Write,
{
    for line in input.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let request: Request = serde_json::from_str(&line)?;
        let reply = match request {
            Request::Hello => serde_json::to_string(&HelloReply { n_classes: classifier.n_classes() })?,
            Request::Predict { series } => {
                let x = MtsInstance::from_rows("query", &series)?;
                let proba = classifier.predict_proba(&x)?;
                serde_json::to_string(&PredictReply { proba: proba.as_slice().to_vec() })?
            }
        };
        writeln!(output, "{reply}")?;
        output.flush()?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_class_train() -> LabeledDataset {
        let a = MtsInstance::new("a", 2, 1, vec![0.0, 0.0]).unwrap();
        let b = MtsInstance::new("b", 2, 1, vec![4.0, 4.0]).unwrap();
        LabeledDataset::new(vec![a, b], vec![0, 1], 2).unwrap()
    }

    #[test]
    fn limit_case_at_centroid() {
        let model = CentroidClassifier::fit(&two_class_train(), 50.0).unwrap();
        let p = model.predict_proba(&MtsInstance::new("q", 2, 1, vec![0.0, 0.0]).unwrap()).unwrap();
        assert!(p.get(0) > 1.0 - 1e-12);
        assert_eq!(p.argmax(), 0);
    }

    #[test]
    fn equidistant_tie_goes_to_class_zero() {
        let model = CentroidClassifier::fit(&two_class_train(), 1.0).unwrap();
        let p = model.predict_proba(&MtsInstance::new("q", 2, 1, vec![2.0, 2.0]).unwrap()).unwrap();
        assert_eq!(p.as_slice(), &[0.5, 0.5]);
        assert_eq!(p.argmax(), 0);
    }

    #[test]
    fn empty_class_fails_to_fit() {
        let a = MtsInstance::new("a", 2, 1, vec![0.0, 0.0]).unwrap();
        let ds = LabeledDataset::new(vec![a], vec![0], 2).unwrap();
        assert!(matches!(CentroidClassifier::fit(&ds, 1.0), Err(Error::Fit(_))));
        assert!(CentroidClassifier::fit(&two_class_train(), 0.0).is_err());
    }

    #[test]
    fn probability_vector_validation() {
        assert!(ProbabilityVector::new(vec![0.2, 0.8]).is_ok());
        assert!(ProbabilityVector::new(vec![0.2, 0.7]).is_err());
        assert!(ProbabilityVector::new(vec![-0.1, 1.1]).is_err());
        let p = ProbabilityVector::renormalized(vec![0.3, 0.7 + 5e-7]).unwrap();
        assert!((p.as_slice().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(ProbabilityVector::renormalized(vec![0.3, 0.71]).is_err());
    }

    #[test]
    fn counter_counts() {
        let model = CountingClassifier::new(CentroidClassifier::fit(&two_class_train(), 1.0).unwrap());
        assert_eq!(model.calls(), 0);
        let x = MtsInstance::new("q", 2, 1, vec![1.0, 1.0]).unwrap();
        model.predict_proba(&x).unwrap();
        model.predict(&x).unwrap();
        assert_eq!(model.calls(), 2);
    }

    #[test]
    fn saliency_prefers_discriminative_steps() {
        let a = MtsInstance::new("a", 3, 1, vec![0.0, 0.0, 0.0]).unwrap();
        let b = MtsInstance::new("b", 3, 1, vec![0.0, 5.0, 0.0]).unwrap();
        let ds = LabeledDataset::new(vec![a.clone(), b], vec![0, 1], 2).unwrap();
        let model = CentroidClassifier::fit(&ds, 1.0).unwrap();
        let w = model.saliency(&a).unwrap();
        assert_eq!(w.as_slice(), &[0.0, 25.0, 0.0]);
    }

    #[test]
    fn serve_answers_protocol() {
        let model = CentroidClassifier::fit(&two_class_train(), 1.0).unwrap();
        let input = "{\"op\":\"hello\"}\n{\"op\":\"predict\",\"series\":[[0.0],[0.0]]}\n";
        let mut out = Vec::new();
        serve(&model, input.as_bytes(), &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "{\"n_classes\":2}");
        let reply: PredictReply = serde_json::from_str(lines.next().unwrap()).unwrap();
        let x = MtsInstance::new("q", 2, 1, vec![0.0, 0.0]).unwrap();
        assert_eq!(reply.proba, model.predict_proba(&x).unwrap().as_slice());
    }
}
