//! Brute-force references the implementations are checked against.

use mtsce::MtsInstance;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn local_cost(a: &MtsInstance, i: usize, b: &MtsInstance, j: usize) -> f64 {
    a.step(i).iter().zip(b.step(j)).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

/// Minimum path cost ending at `(i, j)`, by plain recursion over every
/// monotone path.
pub fn dtw_recursive(a: &MtsInstance, b: &MtsInstance, i: usize, j: usize) -> f64 {
    let c = local_cost(a, i, b, j);
    match (i, j) {
        (0, 0) => c,
        (0, _) => c + dtw_recursive(a, b, 0, j - 1),
        (_, 0) => c + dtw_recursive(a, b, i - 1, 0),
        _ => {
            c + dtw_recursive(a, b, i - 1, j)
                .min(dtw_recursive(a, b, i, j - 1))
                .min(dtw_recursive(a, b, i - 1, j - 1))
        }
    }
}

/// Fresh sum of every window; the first maximum wins.
pub fn window_scan(w: &[f64], ell: usize) -> (usize, usize) {
    let mut best = (0, f64::NEG_INFINITY);
    for s in 0..=w.len() - ell {
        let sum: f64 = w[s..s + ell].iter().sum();
        if sum > best.1 {
            best = (s, sum);
        }
    }
    (best.0, best.0 + ell - 1)
}

pub fn oracle_dominates(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, y)| x <= y) && a.iter().zip(b).any(|(x, y)| x < y)
}

/// Peel fronts: each round takes every remaining point that no other
/// remaining point beats.
pub fn peel<F: Fn(usize, usize) -> bool>(n: usize, beats: F) -> Vec<Vec<usize>> {
    let mut remaining: Vec<usize> = (0..n).collect();
    let mut fronts = Vec::new();
    while !remaining.is_empty() {
        let front: Vec<usize> = remaining
            .iter()
            .copied()
            .filter(|&i| !remaining.iter().any(|&j| j != i && beats(j, i)))
            .collect();
        remaining.retain(|i| !front.contains(i));
        fronts.push(front);
    }
    fronts
}

pub fn random_population(rng: &mut ChaCha8Rng) -> (Vec<Vec<f64>>, usize) {
    let n = rng.random_range(1..=50);
    let m = rng.random_range(2..=4);
    let pop = (0..n).map(|_| (0..m).map(|_| rng.random_range(0..5) as f64).collect()).collect();
    (pop, m)
}

pub fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}
