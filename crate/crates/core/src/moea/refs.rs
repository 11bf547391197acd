use crate::error::{Error, Result};

/// Evenly spaced directions on the unit simplex.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferencePointSet {
    dims: usize,
    points: Vec<Vec<f64>>,
}

impl ReferencePointSet {
    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

fn compose(remaining: usize, slots: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if slots == 1 {
        prefix.push(remaining);
        out.push(prefix.clone());
        prefix.pop();
        return;
    }
    for first in 0..=remaining {
        prefix.push(first);
        compose(remaining - first, slots - 1, prefix, out);
        prefix.pop();
    }
}

/// Das-Dennis structured points: every vector with coordinates in
/// `{0, 1/p, ..., 1}` summing to one, in ascending lexicographic order.
/// There are `C(p + m - 1, m - 1)` of them.
pub fn das_dennis(m: usize, p: usize) -> Result<ReferencePointSet> {
    if m < 2 || p < 1 {
        return Err(Error::invalid(format!("das-dennis needs m >= 2 and p >= 1, got m={m}, p={p}")));
    }
    let mut counts = Vec::new();
    compose(p, m, &mut Vec::with_capacity(m), &mut counts);
    let points = counts
        .into_iter()
        .map(|c| c.into_iter().map(|n| n as f64 / p as f64).collect())
        .collect();
    Ok(ReferencePointSet { dims: m, points })
}
