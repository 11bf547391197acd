//! End-to-end behavior of the counterfactual search.

mod common;

use mtsce::classifier::CountingClassifier;
use mtsce::engine::{evaluate_mask, probe_window, run_probe, CounterfactualReport, WindowPlacement};
use mtsce::moea::{binary_sampling, constrained_dominates, das_dennis, nsga3_evolve, MaskCandidate, Nsga3Params, Sense};
use mtsce::nun::find_nun;
use mtsce::series::hamming;
use mtsce::subsequence::naive_stage;
use mtsce::synthetic::SinusoidSpec;
use mtsce::{explain, explain_batch, Classifier, EngineConfig, Error, LabeledDataset, Mask, ObjectiveMode};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{fixture, fixture_with, random_problem, tiny_config};

/// Everything but the wall time.
fn same_outcome(a: &CounterfactualReport, b: &CounterfactualReport) -> bool {
    a.ces == b.ces
        && a.best_index == b.best_index
        && a.probes == b.probes
        && a.call_counts == b.call_counts
        && (&a.query_id, &a.nun_id, a.target_class, a.naive_length)
            == (&b.query_id, &b.nun_id, b.target_class, b.naive_length)
}

#[test]
fn explain_is_deterministic() {
    let (reference, test, model) = fixture();
    let config = EngineConfig { seed: 3, ..tiny_config(3) };
    for q in test.instances().iter().take(4) {
        let a = explain(&model, q, &reference, &config).unwrap();
        let b = explain(&model, q, &reference, &config).unwrap();
        assert!(same_outcome(&a, &b));
    }
}

#[test]
fn batch_is_independent_of_thread_count() {
    let (reference, test, model) = fixture();
    let config = tiny_config(5);
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| explain_batch(&model, &test, &reference, &config).unwrap())
    };
    let (serial, parallel) = (run(1), run(4));
    assert_eq!(serial.len(), parallel.len());
    for (a, b) in serial.iter().zip(&parallel) {
        assert!(same_outcome(a.report().unwrap(), b.report().unwrap()));
    }
    // instance i runs with seed + i
    let third = explain(&model, &test.instances()[2], &reference, &EngineConfig { seed: 7, ..config }).unwrap();
    assert!(same_outcome(&third, serial[2].report().unwrap()));
}

#[test]
fn alpha_only_moves_the_selection() {
    let (reference, test, model) = fixture();
    for q in test.instances().iter().take(5) {
        let base = explain(&model, q, &reference, &EngineConfig { alpha: 0.5, ..tiny_config(1) }).unwrap();
        for alpha in [0.0, 0.1, 0.9, 1.0] {
            let r = explain(&model, q, &reference, &EngineConfig { alpha, ..tiny_config(1) }).unwrap();
            assert_eq!(r.ces, base.ces);
            assert_eq!(r.best_index, base.with_alpha(alpha).unwrap().best_index);
        }
    }
}

/// Seed 7, t = 16, d = 2, 12 reference instances: the binary search must
/// agree with a linear scan over every window length.
#[test]
fn binary_search_agrees_with_linear_scan() {
    let spec = SinusoidSpec { t: 16, d: 2, n_train: 12, n_test: 6, bump: (3, 9), seed: 7, ..Default::default() };
    let (reference, test, model) = fixture_with(&spec);
    let config = EngineConfig { pop_size: 12, generations: 8, seed: 7, ..Default::default() };
    let mut monotone_cases = 0;
    for q in test.instances() {
        let report = explain(&model, q, &reference, &config).unwrap();
        let nun = find_nun(&model, q, &reference, config.theta, config.distance).unwrap().unwrap();
        let w = reference.weights_for(nun.nun.id()).unwrap();
        let ell = report.naive_length.unwrap();

        let feasible: Vec<bool> = (0..=ell)
            .map(|k| {
                k >= 2 && {
                    let window = probe_window(Some(w), WindowPlacement::Center, k, q.len()).unwrap();
                    !run_probe(&model, q, &nun, window, &config).unwrap().survivors.is_empty()
                }
            })
            .collect();
        for p in &report.probes {
            assert_eq!(p.survivors > 0, feasible[p.length], "probe at k = {}", p.length);
        }
        // the final bracket: success at `high + 1` (or the naive length), failure at `low - 1`
        let successes: Vec<usize> = report.probes.iter().filter(|p| p.survivors > 0).map(|p| p.length).collect();
        let failures: Vec<usize> = report.probes.iter().filter(|p| p.survivors == 0).map(|p| p.length).collect();
        let smallest_success = successes.iter().copied().min().unwrap_or(ell);
        assert!(failures.iter().all(|&f| f < smallest_success));

        let linear_min = (2..=ell).find(|&k| feasible[k]).unwrap_or(ell);
        let monotone = (linear_min..=ell).all(|k| feasible[k]);
        if monotone {
            monotone_cases += 1;
            assert_eq!(smallest_success, linear_min);
        }
    }
    assert!(monotone_cases > 0);
}

#[test]
fn call_counts_match_an_outside_counter() {
    let (reference, test, model) = fixture();
    for theta in [0.4, 0.51, 0.9] {
        let config = EngineConfig { theta, ..tiny_config(2) };
        for q in test.instances().iter().take(3) {
            let counter = CountingClassifier::new(&model);
            let report = explain(&counter, q, &reference, &config).unwrap();
            assert_eq!(counter.calls(), report.call_counts.total());

            let nun = find_nun(&model, q, &reference, theta, config.distance).unwrap().unwrap();
            let w = reference.weights_for(nun.nun.id()).unwrap();
            let naive = naive_stage(&model, q, &nun, w, theta).unwrap();
            let extra = u64::from(theta <= 0.5);
            assert_eq!(report.call_counts.naive, naive.probes as u64 + extra);

            let evolution: usize = report
                .probes
                .iter()
                .filter_map(|p| p.window)
                .map(|w| run_probe(&model, q, &nun, w, &config).unwrap().evaluations)
                .sum();
            assert_eq!(report.call_counts.evolution, evolution as u64);
            assert_eq!(
                report.call_counts.evolution,
                report.probes.iter().filter(|p| p.window.is_some()).count() as u64
                    * (config.pop_size * (config.generations + 1)) as u64
            );
        }
    }
}

#[test]
fn theorem_one_on_random_problems() {
    for seed in 0..60 {
        let (reference, test, model) = random_problem(seed);
        let config = tiny_config(seed);
        for q in test.instances() {
            let report = match explain(&model, q, &reference, &config) {
                Ok(r) => r,
                Err(Error::NoUnlikeNeighbor) => continue,
                Err(e) => panic!("{e}"),
            };
            let nun = find_nun(&model, q, &reference, config.theta, config.distance).unwrap().unwrap();
            let c0 = naive_stage(&model, q, &nun, reference.weights_for(&report.nun_id).unwrap(), config.theta)
                .unwrap()
                .c0;
            let bound = hamming(&c0, q).unwrap();
            for ce in &report.ces {
                assert!(hamming(&ce.instance, q).unwrap() <= bound);
                assert!(ce.window.len() <= report.naive_length.unwrap());
                assert_eq!(model.predict(&ce.instance).unwrap(), report.target_class);
                assert!(ce.m1 >= config.theta);
            }
        }
    }
}

#[test]
fn no_weights_mode_bounds_windows_by_half_length() {
    let (reference, test, model) = fixture();
    for placement in [WindowPlacement::Center, WindowPlacement::Start, WindowPlacement::BestOfThree] {
        let config = EngineConfig { use_weights: false, window_placement: placement, ..tiny_config(4) };
        for q in test.instances().iter().take(3) {
            let r = explain(&model, q, &reference, &config).unwrap();
            assert_eq!(r.naive_length, None);
            assert_eq!(r.call_counts.naive, 0);
            let half = q.len() / 2;
            assert!(r.probes.iter().all(|p| p.length <= half));
            for p in r.probes.iter().filter(|p| p.length >= 2) {
                let w = p.window.unwrap();
                match placement {
                    WindowPlacement::Center => assert_eq!(w.start(), (q.len() - p.length) / 2),
                    WindowPlacement::Start => assert_eq!(w.start(), 0),
                    WindowPlacement::BestOfThree => {
                        assert!([0, (q.len() - p.length) / 2, q.len() - p.length].contains(&w.start()))
                    }
                }
            }
            let probes_run = r.probes.iter().filter(|p| p.window.is_some()).count() as u64;
            let expected_placement = if placement == WindowPlacement::BestOfThree { 3 * probes_run } else { 0 };
            assert_eq!(r.call_counts.placement, expected_placement);
        }
    }
}

#[test]
fn weights_ignored_when_reference_has_none() {
    let (reference, test, model) = fixture();
    let bare = LabeledDataset::new(reference.instances().to_vec(), reference.labels().to_vec(), 2).unwrap();
    let r = explain(&model, &test.instances()[0], &bare, &tiny_config(0)).unwrap();
    assert_eq!(r.naive_length, None);
}

#[test]
fn missing_neighbor_weights_is_an_error() {
    let (reference, test, model) = fixture();
    let mut weights = reference.weights().unwrap().clone();
    let nun = find_nun(&model, &test.instances()[0], &reference, 0.51, Default::default()).unwrap().unwrap();
    weights.remove(nun.nun.id());
    let partial = LabeledDataset::new(reference.instances().to_vec(), reference.labels().to_vec(), 2)
        .unwrap()
        .with_weights(weights)
        .unwrap();
    let err = explain(&model, &test.instances()[0], &partial, &tiny_config(0)).unwrap_err();
    assert!(matches!(err, Error::MissingWeights(_)));
}

#[test]
fn single_class_reference_has_no_unlike_neighbor() {
    let (reference, test, model) = fixture();
    let query = &test.instances()[0];
    let own = model.predict(query).unwrap();
    let keep: Vec<usize> =
        (0..reference.len()).filter(|&i| model.predict(&reference.instances()[i]).unwrap() == own).collect();
    let same = reference.subset(&keep).unwrap();
    assert!(matches!(explain(&model, query, &same, &tiny_config(0)), Err(Error::NoUnlikeNeighbor)));
}

#[test]
fn every_objective_mode_yields_valid_sets() {
    let (reference, test, model) = fixture();
    for mode in [ObjectiveMode::CoPr, ObjectiveMode::CoSp, ObjectiveMode::SpPr, ObjectiveMode::CoSpPr] {
        let config = EngineConfig { objective_mode: mode, ..tiny_config(6) };
        for q in test.instances().iter().take(3) {
            let r = explain(&model, q, &reference, &config).unwrap();
            assert!(!r.ces.is_empty(), "{mode}");
            for ce in &r.ces {
                assert!(ce.m1 >= config.theta);
                assert_eq!(model.predict(&ce.instance).unwrap(), r.target_class);
            }
        }
    }
}

#[test]
fn weak_theta_still_requires_the_target_class() {
    let (reference, test, model) = fixture();
    let config = EngineConfig { theta: 0.2, ..tiny_config(8) };
    assert!(config.theta_is_weak());
    for q in test.instances() {
        let r = explain(&model, q, &reference, &config).unwrap();
        for ce in &r.ces {
            assert_eq!(model.predict(&ce.instance).unwrap(), r.target_class);
        }
    }
}

#[test]
fn stored_objectives_match_reevaluation() {
    let (reference, test, model) = fixture();
    let config = tiny_config(9);
    for q in test.instances().iter().take(4) {
        let r = explain(&model, q, &reference, &config).unwrap();
        let nun = find_nun(&model, q, &reference, config.theta, config.distance).unwrap().unwrap();
        for ce in &r.ces {
            let (c, _) = evaluate_mask(&model, q, &nun, ce.window, &ce.genome, &config).unwrap();
            assert!(c.decoded.same_values(&ce.instance));
            assert_eq!((c.m1, c.m2, c.m3), (ce.m1, ce.m2, ce.m3));
        }
        for (i, a) in r.ces.iter().enumerate() {
            assert!(r.ces[i + 1..].iter().all(|b| !b.instance.same_values(&a.instance)));
        }
    }
}

/// NSGA-III on windows small enough to check every pair of the final
/// population.
#[test]
fn survivors_are_feasible_and_undominated() {
    let (reference, test, model) = fixture();
    let mut checked = 0;
    for (qi, q) in test.instances().iter().enumerate() {
        let nun = find_nun(&model, q, &reference, 0.51, Default::default()).unwrap().unwrap();
        for (k, mode) in [(2, ObjectiveMode::CoSpPr), (3, ObjectiveMode::CoPr), (4, ObjectiveMode::CoSp)] {
            let config = EngineConfig { objective_mode: mode, pop_size: 16, generations: 10, ..Default::default() };
            let w = reference.weights_for(nun.nun.id()).unwrap();
            let window = probe_window(Some(w), WindowPlacement::Center, k, q.len()).unwrap();
            assert!(k * q.channels() <= 12);
            let evaluate = |g: &Mask| -> mtsce::Result<MaskCandidate> {
                let (c, predicted) = evaluate_mask(&model, q, &nun, window, g, &config)?;
                Ok(MaskCandidate { feasible: c.feasible && predicted == nun.target_class, ..c })
            };
            let mut rng = ChaCha8Rng::seed_from_u64(qi as u64 * 31 + k as u64);
            let initial = binary_sampling(k, q.channels(), config.pop_size, &mut rng)
                .unwrap()
                .iter()
                .map(&evaluate)
                .collect::<mtsce::Result<Vec<_>>>()
                .unwrap();
            let params = Nsga3Params {
                generations: config.generations,
                pop_size: config.pop_size,
                crossover_prob: 0.9,
                mutation_prob: 1.0 / (k * q.channels()) as f64,
                theta: config.theta,
                mode,
            };
            let refs = das_dennis(mode.n_objectives(), 6).unwrap();
            let out = nsga3_evolve(initial, &evaluate, &refs, &params, &mut rng).unwrap();
            assert_eq!(out.final_population.len(), config.pop_size);
            let senses = vec![Sense::Minimize; mode.n_objectives()];
            for s in &out.survivors {
                assert!(s.feasible && s.m1 >= config.theta);
                for other in &out.final_population {
                    assert!(!constrained_dominates(
                        &other.minimized(mode),
                        other.violation(config.theta),
                        &s.minimized(mode),
                        s.violation(config.theta),
                        &senses,
                    ));
                }
                checked += 1;
            }
        }
    }
    assert!(checked > 20, "{checked}");
}
