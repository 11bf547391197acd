//! Counterfactual explanations for multivariate time series classifiers.
//!
//! Given a query series and a reference set, [`engine::explain`] finds the
//! nearest unlike neighbor, substitutes its most influential window into
//! the query, and refines which cells to substitute with a constrained
//! NSGA-III search over binary masks. The result is a set of
//! counterfactuals trading off target-class confidence, sparsity and
//! proximity, plus the single best one under a user weight `alpha`.

pub mod classifier;
pub mod cli;
pub mod distance;
pub mod engine;
pub mod error;
pub mod ingest;
pub mod metrics;
pub mod moea;
pub mod nun;
pub mod report;
pub mod series;
pub mod subsequence;
pub mod synthetic;

pub use classifier::{CentroidClassifier, Classifier, ExternalClassifier, ProbabilityVector};
pub use distance::DistanceKind;
pub use engine::{explain, explain_batch, BatchOutcome, Counterfactual, CounterfactualReport, EngineConfig};
pub use error::{Error, Result};
pub use metrics::{MetricsSummary, YnnMode};
pub use moea::ObjectiveMode;
pub use series::{FeatureWeights, LabeledDataset, Mask, MtsInstance, Subsequence};
