//! Multivariate time series, datasets and window substitution.
//!
//! A series is stored time-major: row `i` holds the `d` channel values at
//! time step `i`. Everything here is immutable once built; substitution
//! returns a fresh instance.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One multivariate time series: `t` time steps by `d` channels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MtsInstance {
    id: String,
    t: usize,
    d: usize,
    values: Vec<f64>,
}

impl MtsInstance {
    /// Build from a flat time-major buffer of length `t * d`.
    pub fn new(id: impl Into<String>, t: usize, d: usize, values: Vec<f64>) -> Result<Self> {
        if t == 0 || d == 0 {
            return Err(Error::shape(format!("series must be non-empty, got {t}x{d}")));
        }
        if values.len() != t * d {
            return Err(Error::shape(format!(
                "expected {} values for {t}x{d}, got {}",
                t * d,
                values.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!(
                "non-finite value at time {} channel {}",
                pos / d,
                pos % d
            )));
        }
        Ok(Self { id: id.into(), t, d, values })
    }

    /// Build from rows, one row of `d` channel values per time step.
    pub fn from_rows(id: impl Into<String>, rows: &[Vec<f64>]) -> Result<Self> {
        let t = rows.len();
        let d = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::shape("rows have differing channel counts"));
        }
        Self::new(id, t, d, rows.concat())
    }

    pub fn zeros(id: impl Into<String>, t: usize, d: usize) -> Result<Self> {
        Self::new(id, t, d, vec![0.0; t * d])
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    /// Number of time steps.
    pub fn len(&self) -> usize {
        self.t
    }

    /// Always false: empty series cannot be constructed.
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Number of channels.
    pub fn channels(&self) -> usize {
        self.d
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.t, self.d)
    }

    pub fn cells(&self) -> usize {
        self.t * self.d
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, step: usize, channel: usize) -> f64 {
        self.values[step * self.d + channel]
    }

    /// Channel values at one time step.
    pub fn step(&self, step: usize) -> &[f64] {
        &self.values[step * self.d..(step + 1) * self.d]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.values.chunks(self.d).map(<[f64]>::to_vec).collect()
    }

    pub fn with_id(&self, id: impl Into<String>) -> Self {
        Self { id: id.into(), ..self.clone() }
    }

    /// True when both series hold bit-identical values.
    pub fn same_values(&self, other: &MtsInstance) -> bool {
        self.shape() == other.shape()
            && self
                .values
                .iter()
                .zip(&other.values)
                .all(|(a, b)| a.to_bits() == b.to_bits())
    }

    pub(crate) fn check_same_shape(&self, other: &MtsInstance) -> Result<()> {
        if self.shape() != other.shape() {
            return Err(Error::shape(format!(
                "{:?} has shape {:?}, {:?} has shape {:?}",
                self.id,
                self.shape(),
                other.id,
                other.shape()
            )));
        }
        Ok(())
    }
}

/// Inclusive time window `[start, end]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Subsequence {
    #[serde(rename = "s")]
    start: usize,
    #[serde(rename = "e")]
    end: usize,
}

impl Subsequence {
    /// Window `[start, end]` inside a series of length `t`.
    pub fn new(start: usize, end: usize, t: usize) -> Result<Self> {
        if start > end || end >= t {
            return Err(Error::invalid(format!(
                "window [{start}, {end}] does not fit a series of length {t}"
            )));
        }
        Ok(Self { start, end })
    }

    /// Window of `len` steps beginning at `start`.
    pub fn with_len(start: usize, len: usize, t: usize) -> Result<Self> {
        if len == 0 {
            return Err(Error::invalid("window length must be positive"));
        }
        Self::new(start, start + len - 1, t)
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn end(&self) -> usize {
        self.end
    }

    pub fn len(&self) -> usize {
        self.end - self.start + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, step: usize) -> bool {
        (self.start..=self.end).contains(&step)
    }
}

/// Per-time-step importance, already averaged over channels.
/// Entries may be negative.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureWeights(Vec<f64>);

impl FeatureWeights {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::invalid("feature weights must be non-empty"));
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::invalid("feature weights must be finite"));
        }
        Ok(Self(weights))
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
}

/// Binary matrix over a window: `rows` time steps by `cols` channels.
/// This is also the genome searched by the evolutionary stage.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Mask {
    rows: usize,
    cols: usize,
    bits: Vec<bool>,
}

impl Mask {
    pub fn new(rows: usize, cols: usize, bits: Vec<bool>) -> Result<Self> {
        if rows == 0 || cols == 0 || bits.len() != rows * cols {
            return Err(Error::shape(format!(
                "mask of {rows}x{cols} needs {} bits, got {}",
                rows * cols,
                bits.len()
            )));
        }
        Ok(Self { rows, cols, bits })
    }

    pub fn filled(rows: usize, cols: usize, value: bool) -> Self {
        Self { rows, cols, bits: vec![value; rows * cols] }
    }

    pub fn from_rows(rows: &[Vec<u8>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::shape("mask rows have differing widths"));
        }
        let bits = rows.iter().flatten().map(|&b| b != 0).collect();
        Self::new(rows.len(), cols, bits)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub(crate) fn bits_mut(&mut self) -> &mut [bool] {
        &mut self.bits
    }

    pub fn get(&self, row: usize, col: usize) -> bool {
        self.bits[row * self.cols + col]
    }

    pub fn popcount(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn to_rows(&self) -> Vec<Vec<u8>> {
        self.bits
            .chunks(self.cols)
            .map(|r| r.iter().map(|&b| u8::from(b)).collect())
            .collect()
    }
}

/// Copy `donor` into `base` on the window cells where `mask` is set.
pub fn substitute_window(
    base: &MtsInstance,
    donor: &MtsInstance,
    window: Subsequence,
    mask: &Mask,
) -> Result<MtsInstance> {
    base.check_same_shape(donor)?;
    if window.end() >= base.len() {
        return Err(Error::shape(format!(
            "window [{}, {}] exceeds series length {}",
            window.start(),
            window.end(),
            base.len()
        )));
    }
    if mask.rows() != window.len() || mask.cols() != base.channels() {
        return Err(Error::shape(format!(
            "mask is {}x{}, window needs {}x{}",
            mask.rows(),
            mask.cols(),
            window.len(),
            base.channels()
        )));
    }
    let d = base.channels();
    let mut values = base.values.clone();
    for (r, row) in mask.bits.chunks(d).enumerate() {
        let offset = (window.start() + r) * d;
        for (c, &on) in row.iter().enumerate() {
            if on {
                values[offset + c] = donor.values[offset + c];
            }
        }
    }
    Ok(MtsInstance { id: base.id.clone(), t: base.t, d, values })
}

/// Replace the whole window with the donor's values.
pub fn substitute_full(
    base: &MtsInstance,
    donor: &MtsInstance,
    window: Subsequence,
) -> Result<MtsInstance> {
    substitute_window(base, donor, window, &Mask::filled(window.len(), base.channels(), true))
}

/// Number of cells whose stored values differ (exact comparison).
pub fn hamming(a: &MtsInstance, b: &MtsInstance) -> Result<usize> {
    a.check_same_shape(b)?;
    #[allow(clippy::float_cmp)]
    Ok(a.values.iter().zip(&b.values).filter(|(x, y)| x != y).count())
}

/// Reference or test collection of labelled series.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    instances: Vec<MtsInstance>,
    labels: Vec<usize>,
    n_classes: usize,
    class_names: Vec<String>,
    weights: Option<HashMap<String, FeatureWeights>>,
}

impl LabeledDataset {
    pub fn new(instances: Vec<MtsInstance>, labels: Vec<usize>, n_classes: usize) -> Result<Self> {
        let names = (0..n_classes).map(|c| c.to_string()).collect();
        Self::with_class_names(instances, labels, names)
    }

    pub fn with_class_names(
        instances: Vec<MtsInstance>,
        labels: Vec<usize>,
        class_names: Vec<String>,
    ) -> Result<Self> {
        let n_classes = class_names.len();
        if n_classes == 0 {
            return Err(Error::invalid("a dataset needs at least one class"));
        }
        if labels.len() != instances.len() {
            return Err(Error::shape(format!(
                "{} labels for {} instances",
                labels.len(),
                instances.len()
            )));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= n_classes) {
            return Err(Error::invalid(format!("label {bad} out of range for {n_classes} classes")));
        }
        if let Some(first) = instances.first() {
            for inst in &instances[1..] {
                first.check_same_shape(inst)?;
            }
        }
        Ok(Self { instances, labels, n_classes, class_names, weights: None })
    }

    /// Attach per-instance feature weights, keyed by instance id.
    pub fn with_weights(mut self, weights: HashMap<String, FeatureWeights>) -> Result<Self> {
        if let Some((t, _)) = self.shape() {
            if let Some((id, w)) = weights.iter().find(|(_, w)| w.len() != t) {
                return Err(Error::shape(format!(
                    "weights for {id:?} have length {}, series length is {t}",
                    w.len()
                )));
            }
        }
        self.weights = Some(weights);
        Ok(self)
    }

    pub fn instances(&self) -> &[MtsInstance] {
        &self.instances
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    /// `(t, d)` shared by all instances, or `None` for an empty dataset.
    pub fn shape(&self) -> Option<(usize, usize)> {
        self.instances.first().map(MtsInstance::shape)
    }

    pub fn weights(&self) -> Option<&HashMap<String, FeatureWeights>> {
        self.weights.as_ref()
    }

    pub fn weights_for(&self, id: &str) -> Option<&FeatureWeights> {
        self.weights.as_ref().and_then(|w| w.get(id))
    }

    pub fn find(&self, id: &str) -> Option<&MtsInstance> {
        self.instances.iter().find(|i| i.id() == id)
    }

    /// Keep only the instances at `indices`, in the given order.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        let instances = indices.iter().map(|&i| self.instances[i].clone()).collect();
        let labels = indices.iter().map(|&i| self.labels[i]).collect();
        let mut out = Self::with_class_names(instances, labels, self.class_names.clone())?;
        out.weights = self.weights.clone();
        Ok(out)
    }
}
