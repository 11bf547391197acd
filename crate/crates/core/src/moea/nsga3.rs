use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::operators::{bit_flip_mutation, two_point_crossover};
use super::refs::ReferencePointSet;
use super::sorting::{constrained_nondominated_sort, Sense};
use crate::error::{Error, Result};
use crate::series::{Mask, MtsInstance};

/// Which objectives drive the search. The confidence constraint applies
/// in every mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectiveMode {
    /// Confidence and proximity.
    CoPr,
    /// Confidence and sparsity.
    CoSp,
    /// Sparsity and proximity.
    SpPr,
    /// All three.
    #[default]
    CoSpPr,
}

impl ObjectiveMode {
    /// Active objectives as indices into `(m1, m2, m3)`.
    pub fn active(self) -> &'static [usize] {
        match self {
            ObjectiveMode::CoPr => &[0, 2],
            ObjectiveMode::CoSp => &[0, 1],
            ObjectiveMode::SpPr => &[1, 2],
            ObjectiveMode::CoSpPr => &[0, 1, 2],
        }
    }

    pub fn n_objectives(self) -> usize {
        self.active().len()
    }
}

impl fmt::Display for ObjectiveMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ObjectiveMode::CoPr => "co_pr",
            ObjectiveMode::CoSp => "co_sp",
            ObjectiveMode::SpPr => "sp_pr",
            ObjectiveMode::CoSpPr => "co_sp_pr",
        })
    }
}

impl FromStr for ObjectiveMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "co_pr" => Ok(ObjectiveMode::CoPr),
            "co_sp" => Ok(ObjectiveMode::CoSp),
            "sp_pr" => Ok(ObjectiveMode::SpPr),
            "co_sp_pr" => Ok(ObjectiveMode::CoSpPr),
            other => Err(Error::invalid(format!("unknown objective mode {other:?}"))),
        }
    }
}

/// One evaluated genome.
#[derive(Debug, Clone, PartialEq)]
pub struct MaskCandidate {
    pub genome: Mask,
    pub decoded: MtsInstance,
    /// Target-class probability, maximized.
    pub m1: f64,
    /// Changed-cell fraction, minimized.
    pub m2: f64,
    /// Distance to the query, minimized.
    pub m3: f64,
    /// `m1 >= theta`.
    pub feasible: bool,
}

impl MaskCandidate {
    /// Active objectives, all turned into minimization.
    pub fn minimized(&self, mode: ObjectiveMode) -> Vec<f64> {
        let all = [1.0 - self.m1, self.m2, self.m3];
        mode.active().iter().map(|&i| all[i]).collect()
    }

    /// Constraint violation: zero iff feasible. A candidate that reaches
    /// `theta` but is infeasible for another reason gets the smallest
    /// positive violation.
    pub fn violation(&self, theta: f64) -> f64 {
        if self.feasible {
            0.0
        } else {
            (theta - self.m1).max(f64::MIN_POSITIVE)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Nsga3Params {
    pub generations: usize,
    pub pop_size: usize,
    pub crossover_prob: f64,
    pub mutation_prob: f64,
    pub theta: f64,
    pub mode: ObjectiveMode,
}

impl Nsga3Params {
    fn validate(&self, refs: &ReferencePointSet) -> Result<()> {
        if self.generations == 0 || self.pop_size == 0 {
            return Err(Error::invalid("generations and population size must be positive"));
        }
        for (name, p) in [("crossover", self.crossover_prob), ("mutation", self.mutation_prob), ("theta", self.theta)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::invalid(format!("{name} value {p} outside [0, 1]")));
            }
        }
        if refs.dims() != self.mode.n_objectives() {
            return Err(Error::invalid(format!(
                "reference points have {} dimensions, {} objectives are active",
                refs.dims(),
                self.mode.n_objectives()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenerationStats {
    pub generation: usize,
    pub feasible: usize,
    pub best_feasible_m1: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct EvolveOutcome {
    /// Feasible members of the final population's first constrained
    /// front, first occurrence of each genome.
    pub survivors: Vec<MaskCandidate>,
    pub final_population: Vec<MaskCandidate>,
    /// Statistics of the initial population followed by one entry per generation.
    pub trace: Vec<GenerationStats>,
    pub evaluations: usize,
}

fn stats(generation: usize, pop: &[MaskCandidate]) -> GenerationStats {
    let feasible: Vec<f64> = pop.iter().filter(|c| c.feasible).map(|c| c.m1).collect();
    GenerationStats {
        generation,
        feasible: feasible.len(),
        best_feasible_m1: feasible.into_iter().reduce(f64::max),
    }
}

/// Run the generational loop: random mating, two-point crossover with
/// probability `crossover_prob`, bit-flip mutation, then
/// [`environmental_selection`] over parents and offspring.
///
/// Randomness is consumed only by variation, in a fixed order, so a fixed
/// seed reproduces the run exactly.
pub fn nsga3_evolve<R, F>(
    initial: Vec<MaskCandidate>,
    evaluate: F,
    refs: &ReferencePointSet,
    params: &Nsga3Params,
    rng: &mut R,
) -> Result<EvolveOutcome>
where
    R: Rng + ?Sized,
    F: Fn(&Mask) -> Result<MaskCandidate>,
{
    params.validate(refs)?;
    if initial.len() != params.pop_size {
        return Err(Error::invalid(format!(
            "initial population has {} members, expected {}",
            initial.len(),
            params.pop_size
        )));
    }
    let z = params.pop_size;
    let mut population = initial;
    let mut trace = vec![stats(0, &population)];
    let mut evaluations = 0;

    for generation in 1..=params.generations {
        let mut children = Vec::with_capacity(z + 1);
        while children.len() < z {
            let a = &population[rng.random_range(0..z)].genome;
            let b = &population[rng.random_range(0..z)].genome;
            let (x, y) = if rng.random_bool(params.crossover_prob) {
                two_point_crossover(a, b, rng)?
            } else {
                (a.clone(), b.clone())
            };
            children.push(bit_flip_mutation(&x, params.mutation_prob, rng)?);
            children.push(bit_flip_mutation(&y, params.mutation_prob, rng)?);
        }
        children.truncate(z);
        let offspring = children.iter().map(&evaluate).collect::<Result<Vec<_>>>()?;
        evaluations += offspring.len();

        let mut union = population;
        union.extend(offspring);
        population = environmental_selection(union, z, refs, params.mode, params.theta)?;
        trace.push(stats(generation, &population));
    }

    let objs: Vec<Vec<f64>> = population.iter().map(|c| c.minimized(params.mode)).collect();
    let violations: Vec<f64> = population.iter().map(|c| c.violation(params.theta)).collect();
    let senses = vec![Sense::Minimize; params.mode.n_objectives()];
    let first = constrained_nondominated_sort(&objs, &violations, &senses)?.swap_remove(0);
    let mut seen = HashSet::new();
    let survivors = first
        .into_iter()
        .map(|i| &population[i])
        .filter(|c| c.feasible && seen.insert(c.genome.clone()))
        .cloned()
        .collect();
    Ok(EvolveOutcome { survivors, final_population: population, trace, evaluations })
}

fn perpendicular_distance(point: &[f64], direction: &[f64]) -> f64 {
    let norm2: f64 = direction.iter().map(|w| w * w).sum();
    let dot: f64 = point.iter().zip(direction).map(|(p, w)| p * w).sum();
    let scale = dot / norm2;
    point
        .iter()
        .zip(direction)
        .map(|(p, w)| (p - scale * w).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Pick `z` members of `union` for the next generation.
///
/// The feasible member with the highest confidence is kept first. Whole
/// fronts of the constrained sort are then added while they fit; the
/// front that overflows is thinned by reference-point niching on
/// normalized objectives (ideal: best of the union; nadir: worst of the
/// first front). The least crowded reference point picks next, ties going
/// to the smaller perpendicular distance and then the lower index.
pub fn environmental_selection(
    union: Vec<MaskCandidate>,
    z: usize,
    refs: &ReferencePointSet,
    mode: ObjectiveMode,
    theta: f64,
) -> Result<Vec<MaskCandidate>> {
    if union.len() <= z {
        return Ok(union);
    }
    let objs: Vec<Vec<f64>> = union.iter().map(|c| c.minimized(mode)).collect();
    let violations: Vec<f64> = union.iter().map(|c| c.violation(theta)).collect();
    let senses = vec![Sense::Minimize; mode.n_objectives()];
    let fronts = constrained_nondominated_sort(&objs, &violations, &senses)?;

    let incumbent = union
        .iter()
        .enumerate()
        .filter(|(_, c)| c.feasible)
        .fold(None::<usize>, |best, (i, c)| match best {
            Some(b) if union[b].m1 >= c.m1 => Some(b),
            _ => Some(i),
        });

    let mut chosen: Vec<usize> = incumbent.into_iter().collect();
    let mut overflow = Vec::new();
    for front in &fronts {
        let members: Vec<usize> = front.iter().copied().filter(|&i| Some(i) != incumbent).collect();
        if chosen.len() + members.len() <= z {
            chosen.extend(members);
            if chosen.len() == z {
                break;
            }
        } else {
            overflow = members;
            break;
        }
    }

    if chosen.len() < z {
        let m = mode.n_objectives();
        let ideal: Vec<f64> = (0..m)
            .map(|k| objs.iter().map(|o| o[k]).fold(f64::INFINITY, f64::min))
            .collect();
        let scale: Vec<f64> = (0..m)
            .map(|k| {
                let front_worst = fronts[0].iter().map(|&i| objs[i][k]).fold(f64::NEG_INFINITY, f64::max);
                let union_worst = objs.iter().map(|o| o[k]).fold(f64::NEG_INFINITY, f64::max);
                [front_worst - ideal[k], union_worst - ideal[k]]
                    .into_iter()
                    .find(|&span| span > 1e-12)
                    .unwrap_or(1.0)
            })
            .collect();
        let associate = |i: usize| -> (usize, f64) {
            let normalized: Vec<f64> = (0..m).map(|k| (objs[i][k] - ideal[k]) / scale[k]).collect();
            refs.points()
                .iter()
                .enumerate()
                .map(|(j, w)| (j, perpendicular_distance(&normalized, w)))
                .fold((0, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best })
        };

        let mut niche_count = vec![0usize; refs.len()];
        for &i in &chosen {
            niche_count[associate(i).0] += 1;
        }
        // (member, reference, distance) for the overflow front
        let mut pending: Vec<(usize, usize, f64)> = overflow
            .iter()
            .map(|&i| {
                let (j, dist) = associate(i);
                (i, j, dist)
            })
            .collect();

        while chosen.len() < z && !pending.is_empty() {
            // closest pending member per reference point, lowest index on ties
            let mut best_per_ref: Vec<Option<(f64, usize, usize)>> = vec![None; refs.len()];
            for (pos, &(i, j, dist)) in pending.iter().enumerate() {
                let better = match best_per_ref[j] {
                    None => true,
                    Some((bd, bi, _)) => dist < bd || (dist == bd && i < bi),
                };
                if better {
                    best_per_ref[j] = Some((dist, i, pos));
                }
            }
            let (_, pos) = best_per_ref
                .iter()
                .enumerate()
                .filter_map(|(j, b)| b.map(|(dist, _, pos)| ((niche_count[j], dist, j), pos)))
                .min_by(|a, b| {
                    a.0 .0
                        .cmp(&b.0 .0)
                        .then(a.0 .1.total_cmp(&b.0 .1))
                        .then(a.0 .2.cmp(&b.0 .2))
                })
                .expect("pending is non-empty");
            let (i, j, _) = pending.swap_remove(pos);
            niche_count[j] += 1;
            chosen.push(i);
        }
    }

    let mut slots: Vec<Option<MaskCandidate>> = union.into_iter().map(Some).collect();
    Ok(chosen.into_iter().map(|i| slots[i].take().expect("selected once")).collect())
}
