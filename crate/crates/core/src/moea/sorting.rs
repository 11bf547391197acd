use crate::error::{Error, Result};

/// Optimization direction of one objective.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

impl Sense {
    fn better(self, a: f64, b: f64) -> bool {
        match self {
            Sense::Minimize => a < b,
            Sense::Maximize => a > b,
        }
    }
}

/// Pareto dominance: `a` is no worse than `b` everywhere and strictly
/// better somewhere.
pub fn dominates(a: &[f64], b: &[f64], senses: &[Sense]) -> bool {
    let mut strictly = false;
    for ((&x, &y), &sense) in a.iter().zip(b).zip(senses) {
        if sense.better(y, x) {
            return false;
        }
        if sense.better(x, y) {
            strictly = true;
        }
    }
    strictly
}

/// Feasibility-first dominance. `violation` is zero for feasible points.
/// A feasible point beats any infeasible one; two infeasible points
/// compare by violation alone; two feasible ones by Pareto dominance.
pub fn constrained_dominates(
    a: &[f64],
    a_violation: f64,
    b: &[f64],
    b_violation: f64,
    senses: &[Sense],
) -> bool {
    match (a_violation <= 0.0, b_violation <= 0.0) {
        (true, true) => dominates(a, b, senses),
        (true, false) => true,
        (false, true) => false,
        (false, false) => a_violation < b_violation,
    }
}

/// Partition `0..n` into successive non-dominated fronts under an
/// arbitrary dominance relation. Each front is in ascending index order.
pub fn fronts_by<F>(n: usize, dominates: F) -> Vec<Vec<usize>>
where
    F: Fn(usize, usize) -> bool,
{
    let mut dominated_by_me: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut dominator_count = vec![0usize; n];
    for i in 0..n {
        for j in (i + 1)..n {
            if dominates(i, j) {
                dominated_by_me[i].push(j);
                dominator_count[j] += 1;
            } else if dominates(j, i) {
                dominated_by_me[j].push(i);
                dominator_count[i] += 1;
            }
        }
    }
    let mut fronts = Vec::new();
    let mut current: Vec<usize> = (0..n).filter(|&i| dominator_count[i] == 0).collect();
    while !current.is_empty() {
        let mut next = Vec::new();
        for &p in &current {
            for &q in &dominated_by_me[p] {
                dominator_count[q] -= 1;
                if dominator_count[q] == 0 {
                    next.push(q);
                }
            }
        }
        next.sort_unstable();
        fronts.push(std::mem::replace(&mut current, next));
    }
    fronts
}

fn check_population(pop: &[Vec<f64>], senses: &[Sense]) -> Result<()> {
    if pop.is_empty() {
        return Err(Error::invalid("cannot sort an empty population"));
    }
    if pop.iter().any(|p| p.len() != senses.len()) {
        return Err(Error::shape("objective vectors must match the number of senses"));
    }
    if pop.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::invalid("objective values must be finite"));
    }
    Ok(())
}

/// Non-dominated sorting of objective vectors.
pub fn nondominated_sort(pop: &[Vec<f64>], senses: &[Sense]) -> Result<Vec<Vec<usize>>> {
    check_population(pop, senses)?;
    Ok(fronts_by(pop.len(), |i, j| dominates(&pop[i], &pop[j], senses)))
}

/// Non-dominated sorting under [`constrained_dominates`].
pub fn constrained_nondominated_sort(
    pop: &[Vec<f64>],
    violations: &[f64],
    senses: &[Sense],
) -> Result<Vec<Vec<usize>>> {
    check_population(pop, senses)?;
    if violations.len() != pop.len() {
        return Err(Error::shape("one violation per individual is required"));
    }
    Ok(fronts_by(pop.len(), |i, j| {
        constrained_dominates(&pop[i], violations[i], &pop[j], violations[j], senses)
    }))
}
