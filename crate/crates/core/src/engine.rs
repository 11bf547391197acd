//! End-to-end counterfactual search for one query series.
//!
//! 1. Retrieve the nearest unlike neighbor (NUN) and its class `c`.
//! 2. With feature weights: grow a full substitution of the NUN's most
//!    influential window until `P(f(C0) = c) >= theta`; `C0` seeds the
//!    result set and its length bounds the search. Without weights the
//!    bound is half the series length.
//! 3. Binary-search window lengths. Every probe runs NSGA-III over
//!    substitution masks of the probe window; a probe with feasible
//!    survivors adds them to the set and shrinks the upper bound,
//!    otherwise the lower bound grows.
//! 4. Deduplicate, then pick the best counterfactual by
//!    `alpha * m1 + (1 - alpha) * (1 - m2)`.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifier::{Classifier, CountingClassifier};
use crate::distance::DistanceKind;
use crate::error::{Error, Result};
use crate::moea::{
    binary_sampling, das_dennis, nsga3_evolve, GenerationStats, MaskCandidate, Nsga3Params,
    ObjectiveMode,
};
use crate::nun::{find_nun, NunResult};
use crate::series::{hamming, substitute_full, substitute_window, FeatureWeights, LabeledDataset, Mask, MtsInstance, Subsequence};
use crate::subsequence::{find_subsequence, naive_stage};

/// Where probe windows go when no feature weights are available.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowPlacement {
    /// Start at `floor((t - k) / 2)`.
    #[default]
    Center,
    /// Start at 0.
    Start,
    /// Try start, center and end; keep the one whose full substitution
    /// gives the highest target-class probability.
    BestOfThree,
}

impl fmt::Display for WindowPlacement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WindowPlacement::Center => "center",
            WindowPlacement::Start => "start",
            WindowPlacement::BestOfThree => "best_of_three",
        })
    }
}

impl FromStr for WindowPlacement {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "center" => Ok(WindowPlacement::Center),
            "start" => Ok(WindowPlacement::Start),
            "best_of_three" | "scan_best_of_three" => Ok(WindowPlacement::BestOfThree),
            other => Err(Error::invalid(format!("unknown window placement {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EngineConfig {
    pub theta: f64,
    pub alpha: f64,
    pub pop_size: usize,
    pub generations: usize,
    pub crossover_prob: f64,
    /// Per-bit flip rate; `None` means `1 / (k * d)` for a `k`-step window.
    pub mutation_prob: Option<f64>,
    pub partitions: usize,
    pub distance: DistanceKind,
    pub objective_mode: ObjectiveMode,
    pub seed: u64,
    pub use_weights: bool,
    pub window_placement: WindowPlacement,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            theta: 0.51,
            alpha: 0.5,
            pop_size: 30,
            generations: 50,
            crossover_prob: 0.9,
            mutation_prob: None,
            partitions: 6,
            distance: DistanceKind::L2,
            objective_mode: ObjectiveMode::CoSpPr,
            seed: 0,
            use_weights: true,
            window_placement: WindowPlacement::Center,
        }
    }
}

impl EngineConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("theta", self.theta), ("alpha", self.alpha), ("crossover probability", self.crossover_prob)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::invalid(format!("{name} = {v} is outside [0, 1]")));
            }
        }
        if let Some(pm) = self.mutation_prob {
            if !(0.0..=1.0).contains(&pm) {
                return Err(Error::invalid(format!("mutation probability {pm} is outside [0, 1]")));
            }
        }
        if self.pop_size < 2 {
            return Err(Error::invalid("population size must be at least 2"));
        }
        if self.generations == 0 {
            return Err(Error::invalid("at least one generation is required"));
        }
        if self.partitions == 0 {
            return Err(Error::invalid("at least one reference partition is required"));
        }
        Ok(())
    }

    /// Whether `theta` is low enough that the target class may not be the
    /// most probable one.
    pub fn theta_is_weak(&self) -> bool {
        self.theta < 0.5
    }

    fn mutation_for(&self, cells: usize) -> f64 {
        self.mutation_prob.unwrap_or(1.0 / cells as f64)
    }
}

/// One member of the counterfactual set.
#[derive(Debug, Clone, PartialEq)]
pub struct Counterfactual {
    pub instance: MtsInstance,
    pub m1: f64,
    pub m2: f64,
    pub m3: f64,
    pub window: Subsequence,
    pub genome: Mask,
    /// Class the classifier assigns to `instance`.
    pub predicted_class: usize,
}

impl Counterfactual {
    fn from_candidate(c: MaskCandidate, window: Subsequence, predicted_class: usize) -> Self {
        Self { instance: c.decoded, m1: c.m1, m2: c.m2, m3: c.m3, window, genome: c.genome, predicted_class }
    }
}

/// Record of one binary-search step.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeRecord {
    pub length: usize,
    /// `None` when the length was below the two-step minimum and skipped.
    pub window: Option<Subsequence>,
    pub survivors: usize,
}

/// Classifier calls spent per stage.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CallCounts {
    pub nun_search: u64,
    pub naive: u64,
    pub placement: u64,
    pub evolution: u64,
}

impl CallCounts {
    pub fn total(&self) -> u64 {
        self.nun_search + self.naive + self.placement + self.evolution
    }
}

/// Full output of [`explain`].
#[derive(Debug, Clone, PartialEq)]
pub struct CounterfactualReport {
    pub query_id: String,
    pub query_class: usize,
    pub nun_id: String,
    pub target_class: usize,
    pub ces: Vec<Counterfactual>,
    /// Index into `ces` chosen by [`select_best`]; `None` when `ces` is empty.
    pub best_index: Option<usize>,
    /// Length of the naive-stage window, when weights were used.
    pub naive_length: Option<usize>,
    pub probes: Vec<ProbeRecord>,
    pub call_counts: CallCounts,
    pub wall_time: Duration,
}

impl CounterfactualReport {
    pub fn best(&self) -> Option<&Counterfactual> {
        self.best_index.map(|i| &self.ces[i])
    }

    /// Re-select the best counterfactual for another `alpha`; the set itself
    /// does not depend on `alpha`.
    pub fn with_alpha(&self, alpha: f64) -> Result<Self> {
        let mut out = self.clone();
        out.best_index = best_of(&self.ces, alpha)?;
        Ok(out)
    }
}

fn best_of(ces: &[Counterfactual], alpha: f64) -> Result<Option<usize>> {
    if ces.is_empty() {
        return Ok(None);
    }
    let scores: Vec<(f64, f64)> = ces.iter().map(|c| (c.m1, c.m2)).collect();
    select_best(&scores, alpha).map(Some)
}

/// Index maximizing `alpha * m1 + (1 - alpha) * (1 - m2)` over
/// `(m1, m2)` pairs; the lowest index wins ties.
pub fn select_best(ces: &[(f64, f64)], alpha: f64) -> Result<usize> {
    if ces.is_empty() {
        return Err(Error::invalid("no counterfactuals to select from"));
    }
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::invalid(format!("alpha = {alpha} is outside [0, 1]")));
    }
    let score = |&(m1, m2): &(f64, f64)| alpha * m1 + (1.0 - alpha) * (1.0 - m2);
    let mut best = 0;
    for i in 1..ces.len() {
        if score(&ces[i]) > score(&ces[best]) {
            best = i;
        }
    }
    Ok(best)
}

/// Window used for a probe of length `k`. With weights this is the
/// max-sum window of the neighbor's weights; otherwise it follows
/// `placement` (the best-of-three rule is resolved in [`explain`]).
pub fn probe_window(weights: Option<&FeatureWeights>, placement: WindowPlacement, k: usize, t: usize) -> Result<Subsequence> {
    match (weights, placement) {
        (Some(w), _) => find_subsequence(w, k),
        (None, WindowPlacement::Start) => Subsequence::with_len(0, k, t),
        (None, _) => Subsequence::with_len((t.saturating_sub(k)) / 2, k, t),
    }
}

/// Evaluate one genome over `window`.
pub fn evaluate_mask<C: Classifier + ?Sized>(
    classifier: &C,
    query: &MtsInstance,
    nun: &NunResult,
    window: Subsequence,
    genome: &Mask,
    config: &EngineConfig,
) -> Result<(MaskCandidate, usize)> {
    let decoded = substitute_window(query, &nun.nun, window, genome)?;
    let proba = classifier.predict_proba(&decoded)?;
    let m1 = proba.get(nun.target_class);
    let m2 = hamming(&decoded, query)? as f64 / query.cells() as f64;
    let m3 = config.distance.distance(query, &decoded)?;
    let candidate = MaskCandidate { genome: genome.clone(), decoded, m1, m2, m3, feasible: m1 >= config.theta };
    Ok((candidate, proba.argmax()))
}

/// Result of running NSGA-III at one window length.
#[derive(Debug, Clone)]
pub struct ProbeOutcome {
    pub window: Subsequence,
    /// Feasible, valid survivors.
    pub survivors: Vec<Counterfactual>,
    pub evaluations: usize,
    pub trace: Vec<GenerationStats>,
}

/// Run the seeded NSGA-III search for window length `k`.
///
/// The random stream depends only on `config.seed` and `k`, so probing the
/// same length twice gives the same outcome regardless of search order.
pub fn run_probe<C: Classifier + ?Sized>(
    classifier: &C,
    query: &MtsInstance,
    nun: &NunResult,
    window: Subsequence,
    config: &EngineConfig,
) -> Result<ProbeOutcome> {
    let k = window.len();
    let d = query.channels();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(k as u64);

    let mode = config.objective_mode;
    let refs = das_dennis(mode.n_objectives(), config.partitions)?;
    let params = Nsga3Params {
        generations: config.generations,
        pop_size: config.pop_size,
        crossover_prob: config.crossover_prob,
        mutation_prob: config.mutation_for(k * d),
        theta: config.theta,
        mode,
    };

    // predicted classes ride along so validity needs no extra calls
    let evaluate = |g: &Mask| -> Result<MaskCandidate> {
        let (candidate, predicted) = evaluate_mask(classifier, query, nun, window, g, config)?;
        Ok(MaskCandidate { feasible: candidate.feasible && predicted == nun.target_class, ..candidate })
    };
    let initial = binary_sampling(k, d, config.pop_size, &mut rng)?
        .iter()
        .map(&evaluate)
        .collect::<Result<Vec<_>>>()?;
    let outcome = nsga3_evolve(initial, &evaluate, &refs, &params, &mut rng)?;
    let survivors = outcome
        .survivors
        .into_iter()
        .map(|c| Counterfactual::from_candidate(c, window, nun.target_class))
        .collect();
    Ok(ProbeOutcome {
        window,
        survivors,
        evaluations: config.pop_size + outcome.evaluations,
        trace: outcome.trace,
    })
}

fn best_of_three<C: Classifier + ?Sized>(
    classifier: &C,
    query: &MtsInstance,
    nun: &NunResult,
    k: usize,
) -> Result<Subsequence> {
    let t = query.len();
    let mut best: Option<(f64, Subsequence)> = None;
    for start in [0, (t - k) / 2, t - k] {
        let window = Subsequence::with_len(start, k, t)?;
        let conf = classifier.predict_proba(&substitute_full(query, &nun.nun, window)?)?.get(nun.target_class);
        if best.is_none_or(|(b, _)| conf > b) {
            best = Some((conf, window));
        }
    }
    Ok(best.expect("three candidates").1)
}

/// Explain why `classifier` assigns `query` its class by searching for
/// counterfactuals built from the nearest unlike neighbor in `reference`.
///
/// Fails with [`Error::NoUnlikeNeighbor`] when no reference instance is
/// predicted as another class with confidence at least `theta`.
pub fn explain<C: Classifier + ?Sized>(
    classifier: &C,
    query: &MtsInstance,
    reference: &LabeledDataset,
    config: &EngineConfig,
) -> Result<CounterfactualReport> {
    config.validate()?;
    let started = Instant::now();
    let t = query.len();
    if t < 2 {
        return Err(Error::invalid("series need at least two time steps"));
    }
    let model = CountingClassifier::new(classifier);
    let mut counts = CallCounts::default();

    let query_class = model.predict(query)?;
    let nun = find_nun(&model, query, reference, config.theta, config.distance)?
        .ok_or(Error::NoUnlikeNeighbor)?;
    counts.nun_search = model.calls();

    let weights = if config.use_weights && reference.weights().is_some() {
        Some(
            reference
                .weights_for(nun.nun.id())
                .ok_or_else(|| Error::MissingWeights(nun.nun.id().to_string()))?,
        )
    } else {
        None
    };

    let mut ces = Vec::new();
    let mut naive_length = None;
    let mut high = t / 2;
    if let Some(w) = weights {
        let before = model.calls();
        let naive = naive_stage(&model, query, &nun, w, config.theta)?;
        // the naive result needs its predicted class for the validity record
        let predicted = if config.theta > 0.5 {
            nun.target_class
        } else {
            model.predict(&naive.c0)?
        };
        counts.naive = model.calls() - before;
        let m2 = hamming(&naive.c0, query)? as f64 / query.cells() as f64;
        let m3 = config.distance.distance(query, &naive.c0)?;
        if predicted == nun.target_class {
            ces.push(Counterfactual {
                instance: naive.c0,
                m1: naive.confidence,
                m2,
                m3,
                window: naive.window,
                genome: Mask::filled(naive.length, query.channels(), true),
                predicted_class: predicted,
            });
        }
        naive_length = Some(naive.length);
        high = naive.length;
    }

    let mut probes = Vec::new();
    let mut low = 1;
    while low <= high {
        let k = (low + high) / 2;
        if k < 2 {
            probes.push(ProbeRecord { length: k, window: None, survivors: 0 });
            low = k + 1;
            continue;
        }
        let window = if weights.is_none() && config.window_placement == WindowPlacement::BestOfThree {
            let before = model.calls();
            let w = best_of_three(&model, query, &nun, k)?;
            counts.placement += model.calls() - before;
            w
        } else {
            probe_window(weights, config.window_placement, k, t)?
        };
        let before = model.calls();
        let outcome = run_probe(&model, query, &nun, window, config)?;
        counts.evolution += model.calls() - before;
        probes.push(ProbeRecord { length: k, window: Some(window), survivors: outcome.survivors.len() });
        if outcome.survivors.is_empty() {
            low = k + 1;
        } else {
            ces.extend(outcome.survivors);
            high = k - 1;
        }
    }

    let mut unique: Vec<Counterfactual> = Vec::with_capacity(ces.len());
    for ce in ces {
        if !unique.iter().any(|u| u.instance.same_values(&ce.instance)) {
            unique.push(ce);
        }
    }
    let best_index = best_of(&unique, config.alpha)?;

    Ok(CounterfactualReport {
        query_id: query.id().to_string(),
        query_class,
        nun_id: nun.nun.id().to_string(),
        target_class: nun.target_class,
        ces: unique,
        best_index,
        naive_length,
        probes,
        call_counts: counts,
        wall_time: started.elapsed(),
    })
}

/// Outcome of one query in a batch.
#[derive(Debug, Clone, PartialEq)]
pub enum BatchOutcome {
    Explained(CounterfactualReport),
    Failed { query_id: String, reason: String },
}

impl BatchOutcome {
    pub fn query_id(&self) -> &str {
        match self {
            BatchOutcome::Explained(r) => &r.query_id,
            BatchOutcome::Failed { query_id, .. } => query_id,
        }
    }

    pub fn report(&self) -> Option<&CounterfactualReport> {
        match self {
            BatchOutcome::Explained(r) => Some(r),
            BatchOutcome::Failed { .. } => None,
        }
    }
}

/// Explain every instance of `test`. Instance `i` runs with seed
/// `config.seed + i`. Failures are recorded, not propagated, except for
/// classifier errors, which abort the batch. Runs on the current rayon
/// pool; results come back in test order.
pub fn explain_batch<C: Classifier + ?Sized>(
    classifier: &C,
    test: &LabeledDataset,
    reference: &LabeledDataset,
    config: &EngineConfig,
) -> Result<Vec<BatchOutcome>> {
    config.validate()?;
    test.instances()
        .par_iter()
        .enumerate()
        .map(|(i, query)| {
            let cfg = EngineConfig { seed: config.seed.wrapping_add(i as u64), ..config.clone() };
            match explain(classifier, query, reference, &cfg) {
                Ok(report) => Ok(BatchOutcome::Explained(report)),
                Err(e @ (Error::NoUnlikeNeighbor | Error::MissingWeights(_))) => {
                    Ok(BatchOutcome::Failed { query_id: query.id().to_string(), reason: e.to_string() })
                }
                Err(e) => Err(e),
            }
        })
        .collect()
}
