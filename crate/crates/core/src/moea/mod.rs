//! Constrained NSGA-III over binary substitution masks.

mod nsga3;
mod operators;
mod refs;
mod sorting;

pub use nsga3::{
    environmental_selection, nsga3_evolve, EvolveOutcome, GenerationStats, MaskCandidate,
    Nsga3Params, ObjectiveMode,
};
pub use operators::{binary_sampling, bit_flip_mutation, two_point_crossover, two_point_crossover_at};
pub use refs::{das_dennis, ReferencePointSet};
pub use sorting::{
    constrained_dominates, constrained_nondominated_sort, dominates, fronts_by, nondominated_sort,
    Sense,
};
