//! One NSGA-III probe over substitution masks of a fixed window, with the
//! per-generation feasibility trace.

use mtsce::engine::{run_probe, EngineConfig};
use mtsce::nun::find_nun;
use mtsce::synthetic::{sinusoid_fixture, SinusoidSpec};
use mtsce::{CentroidClassifier, Subsequence};

fn main() -> mtsce::Result<()> {
    let (train, test) = sinusoid_fixture(&SinusoidSpec::default())?;
    let model = CentroidClassifier::fit(&train, 1.0)?;
    let query = &test.instances()[0];
    let config = EngineConfig { generations: 20, ..Default::default() };
    let nun = find_nun(&model, query, &train, config.theta, config.distance)?.expect("fixture has both classes");

    let window = Subsequence::new(5, 14, query.len())?;
    let outcome = run_probe(&model, query, &nun, window, &config)?;
    for g in outcome.trace.iter().step_by(4) {
        println!("gen {:>2}: {:>2} feasible, best m1 {:?}", g.generation, g.feasible, g.best_feasible_m1);
    }
    println!("{} evaluations, {} survivors", outcome.evaluations, outcome.survivors.len());
    for s in outcome.survivors.iter().take(5) {
        println!("  m1={:.3} m2={:.3} m3={:.3} mask={:?}", s.m1, s.m2, s.m3, s.genome.to_rows());
    }
    Ok(())
}
