//! On-disk artifacts: per-query report files, the run manifest they embed,
//! and metric recomputation from saved reports.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::classifier::Classifier;
use crate::engine::{BatchOutcome, CallCounts, CounterfactualReport, EngineConfig};
use crate::error::{Error, Result};
use crate::metrics::{summarize, ExplainedInstance, MetricsSummary, YnnMode};
use crate::series::{LabeledDataset, MtsInstance, Subsequence};

pub const TOOL_NAME: &str = env!("CARGO_PKG_NAME");
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Hex SHA-256 of `bytes`.
pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// How the classifier under explanation was obtained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ClassifierSpec {
    Centroid { temperature: f64 },
    External { command: String },
}

/// Which counterfactuals of each report enter the metrics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricsScope {
    /// Every counterfactual in the set.
    #[default]
    All,
    /// Only the selected best one.
    Best,
}

impl fmt::Display for MetricsScope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MetricsScope::All => "all",
            MetricsScope::Best => "best",
        })
    }
}

impl FromStr for MetricsScope {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "all" => Ok(MetricsScope::All),
            "best" => Ok(MetricsScope::Best),
            other => Err(Error::invalid(format!("unknown metrics scope {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetEntry {
    pub role: String,
    pub path: String,
    pub sha256: String,
}

/// Everything needed to reproduce a run. Reports embed it without
/// timestamps so that reruns are byte-identical; the run-level
/// `manifest.json` carries them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub config: EngineConfig,
    pub classifier: ClassifierSpec,
    pub datasets: Vec<DatasetEntry>,
    pub seed: u64,
    pub ynn_mode: YnnMode,
    pub scope: MetricsScope,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamps: Option<Timestamps>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Timestamps {
    /// Milliseconds since the Unix epoch.
    pub started_ms: u64,
    pub finished_ms: u64,
}

impl RunManifest {
    pub fn new(
        config: EngineConfig,
        classifier: ClassifierSpec,
        datasets: Vec<DatasetEntry>,
        ynn_mode: YnnMode,
        scope: MetricsScope,
    ) -> Self {
        Self {
            tool: TOOL_NAME.to_string(),
            version: TOOL_VERSION.to_string(),
            seed: config.seed,
            config,
            classifier,
            datasets,
            ynn_mode,
            scope,
            timestamps: None,
        }
    }

    pub fn dataset(&self, role: &str) -> Option<&DatasetEntry> {
        self.datasets.iter().find(|d| d.role == role)
    }
}

/// One counterfactual as stored on disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CeRecord {
    /// Time-major rows.
    pub series: Vec<Vec<f64>>,
    pub m1: f64,
    pub m2: f64,
    pub m3: f64,
    pub window: Subsequence,
    pub mask: Vec<Vec<u8>>,
    pub predicted_class: usize,
}

/// Report for one query. Failed queries keep `nun_id: null`, no
/// counterfactuals, and the failure reason.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportFile {
    pub manifest: RunManifest,
    pub query_id: String,
    pub query_class: Option<usize>,
    pub nun_id: Option<String>,
    pub target_class: Option<usize>,
    pub ces: Vec<CeRecord>,
    pub best_index: Option<usize>,
    pub naive_length: Option<usize>,
    pub call_counts: Option<CallCounts>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
}

impl ReportFile {
    pub fn from_report(report: &CounterfactualReport, manifest: RunManifest) -> Self {
        Self {
            manifest,
            query_id: report.query_id.clone(),
            query_class: Some(report.query_class),
            nun_id: Some(report.nun_id.clone()),
            target_class: Some(report.target_class),
            ces: report
                .ces
                .iter()
                .map(|c| CeRecord {
                    series: c.instance.rows(),
                    m1: c.m1,
                    m2: c.m2,
                    m3: c.m3,
                    window: c.window,
                    mask: c.genome.to_rows(),
                    predicted_class: c.predicted_class,
                })
                .collect(),
            best_index: report.best_index,
            naive_length: report.naive_length,
            call_counts: Some(report.call_counts),
            failure: None,
        }
    }

    pub fn from_outcome(outcome: &BatchOutcome, manifest: RunManifest) -> Self {
        match outcome {
            BatchOutcome::Explained(r) => Self::from_report(r, manifest),
            BatchOutcome::Failed { query_id, reason } => Self {
                manifest,
                query_id: query_id.clone(),
                query_class: None,
                nun_id: None,
                target_class: None,
                ces: Vec::new(),
                best_index: None,
                naive_length: None,
                call_counts: None,
                failure: Some(reason.clone()),
            },
        }
    }

    /// Stored counterfactuals as series, ids `<query>-ce<j>`.
    pub fn counterfactuals(&self) -> Result<Vec<MtsInstance>> {
        self.ces
            .iter()
            .enumerate()
            .map(|(j, c)| MtsInstance::from_rows(format!("{}-ce{j}", self.query_id), &c.series))
            .collect()
    }

    /// Counterfactuals selected by `scope`.
    pub fn scoped(&self, scope: MetricsScope) -> Result<Vec<MtsInstance>> {
        let all = self.counterfactuals()?;
        Ok(match (scope, self.best_index) {
            (MetricsScope::All, _) => all,
            (MetricsScope::Best, Some(i)) => {
                let best = all
                    .into_iter()
                    .nth(i)
                    .ok_or_else(|| Error::invalid(format!("best_index {i} out of range")))?;
                vec![best]
            }
            (MetricsScope::Best, None) => Vec::new(),
        })
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Recompute the summary from saved reports. Queries are looked up in
/// `test` by id; every report counts as one attempt.
pub fn metrics_from_reports<C: Classifier + ?Sized>(
    classifier: &C,
    reports: &[ReportFile],
    test: &LabeledDataset,
    reference: &LabeledDataset,
    scope: MetricsScope,
    ynn_mode: YnnMode,
) -> Result<MetricsSummary> {
    if reports.is_empty() {
        return Err(Error::invalid("no reports"));
    }
    let mut queries = Vec::with_capacity(reports.len());
    let mut ces = Vec::with_capacity(reports.len());
    for r in reports {
        let q = test
            .find(&r.query_id)
            .ok_or_else(|| Error::invalid(format!("query {:?} not found in the test set", r.query_id)))?;
        queries.push(q);
        ces.push(r.scoped(scope)?);
    }
    let instances: Vec<ExplainedInstance<'_>> = queries
        .iter()
        .zip(&ces)
        .map(|(q, c)| ExplainedInstance { query: q, counterfactuals: c })
        .collect();
    summarize(classifier, &instances, reference, reports.len(), ynn_mode)
}

/// Pretty JSON with a trailing newline.
pub fn metrics_json(summary: &MetricsSummary) -> Result<String> {
    let mut s = serde_json::to_string_pretty(summary)?;
    s.push('\n');
    Ok(s)
}
