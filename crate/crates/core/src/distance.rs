//! L1, L2 and dependent multivariate DTW over [`MtsInstance`]s.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::MtsInstance;

/// Which distance a search or objective uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DistanceKind {
    L1,
    #[default]
    L2,
    Dtw,
}

impl DistanceKind {
    pub fn distance(self, a: &MtsInstance, b: &MtsInstance) -> Result<f64> {
        match self {
            DistanceKind::L1 => dist_l1(a, b),
            DistanceKind::L2 => dist_l2(a, b),
            DistanceKind::Dtw => dist_dtw(a, b),
        }
    }
}

impl fmt::Display for DistanceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DistanceKind::L1 => "l1",
            DistanceKind::L2 => "l2",
            DistanceKind::Dtw => "dtw",
        })
    }
}

impl FromStr for DistanceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "l1" => Ok(DistanceKind::L1),
            "l2" | "euclidean" => Ok(DistanceKind::L2),
            "dtw" => Ok(DistanceKind::Dtw),
            other => Err(Error::invalid(format!("unknown distance {other:?}"))),
        }
    }
}

pub fn dist_l1(a: &MtsInstance, b: &MtsInstance) -> Result<f64> {
    a.check_same_shape(b)?;
    Ok(a.values().iter().zip(b.values()).map(|(x, y)| (x - y).abs()).sum())
}

pub fn dist_l2(a: &MtsInstance, b: &MtsInstance) -> Result<f64> {
    a.check_same_shape(b)?;
    Ok(a.values()
        .iter()
        .zip(b.values())
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt())
}

fn step_cost(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Dependent DTW: local cost is the Euclidean distance between the
/// channel vectors at two time steps; steps (1,0), (0,1), (1,1); no band.
/// Series lengths may differ, channel counts may not.
pub fn dist_dtw(a: &MtsInstance, b: &MtsInstance) -> Result<f64> {
    if a.channels() != b.channels() {
        return Err(Error::shape(format!(
            "dtw needs equal channel counts, got {} and {}",
            a.channels(),
            b.channels()
        )));
    }
    let (n, m) = (a.len(), b.len());
    // two rolling rows of the accumulated cost matrix
    let mut prev = vec![f64::INFINITY; m + 1];
    let mut curr = vec![f64::INFINITY; m + 1];
    prev[0] = 0.0;
    for i in 1..=n {
        curr[0] = f64::INFINITY;
        let ai = a.step(i - 1);
        for j in 1..=m {
            let best = prev[j - 1].min(prev[j]).min(curr[j - 1]);
            curr[j] = step_cost(ai, b.step(j - 1)) + best;
        }
        std::mem::swap(&mut prev, &mut curr);
    }
    Ok(prev[m])
}

/// Indices of the `k` pool members closest to `query`, nearest first.
/// Equal distances keep the lower index first.
pub fn knn_indices(
    query: &MtsInstance,
    pool: &[MtsInstance],
    k: usize,
    kind: DistanceKind,
) -> Result<Vec<usize>> {
    if pool.is_empty() {
        return Err(Error::invalid("k-nn over an empty pool"));
    }
    if k == 0 || k > pool.len() {
        return Err(Error::invalid(format!("k = {k} must be in 1..={}", pool.len())));
    }
    let mut scored = pool
        .iter()
        .enumerate()
        .map(|(i, p)| kind.distance(query, p).map(|dist| (dist, i)))
        .collect::<Result<Vec<_>>>()?;
    scored.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    Ok(scored.into_iter().take(k).map(|(_, i)| i).collect())
}
