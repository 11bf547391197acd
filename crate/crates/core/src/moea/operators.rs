use rand::Rng;

use crate::error::{Error, Result};
use crate::series::Mask;

/// `z` random `k x d` genomes, each bit set with probability one half.
/// The first genome is always all ones: the full-window substitution.
pub fn binary_sampling<R: Rng + ?Sized>(k: usize, d: usize, z: usize, rng: &mut R) -> Result<Vec<Mask>> {
    if z == 0 || k == 0 || d == 0 {
        return Err(Error::invalid(format!("sampling needs positive sizes, got k={k}, d={d}, z={z}")));
    }
    let mut out = Vec::with_capacity(z);
    out.push(Mask::filled(k, d, true));
    for _ in 1..z {
        let bits = (0..k * d).map(|_| rng.random_bool(0.5)).collect();
        out.push(Mask::new(k, d, bits)?);
    }
    Ok(out)
}

/// Swap the flattened segment `[u, v)` between two genomes.
pub fn two_point_crossover_at(a: &Mask, b: &Mask, u: usize, v: usize) -> Result<(Mask, Mask)> {
    if a.rows() != b.rows() || a.cols() != b.cols() {
        return Err(Error::shape("crossover parents differ in shape"));
    }
    let len = a.bits().len();
    if u >= v || v > len {
        return Err(Error::invalid(format!("cut points must satisfy 0 <= u < v <= {len}, got {u}, {v}")));
    }
    let (mut x, mut y) = (a.clone(), b.clone());
    x.bits_mut()[u..v].copy_from_slice(&b.bits()[u..v]);
    y.bits_mut()[u..v].copy_from_slice(&a.bits()[u..v]);
    Ok((x, y))
}

/// Two-point crossover with cut points drawn uniformly from `0..=k*d`.
pub fn two_point_crossover<R: Rng + ?Sized>(a: &Mask, b: &Mask, rng: &mut R) -> Result<(Mask, Mask)> {
    let len = a.bits().len();
    let first = rng.random_range(0..=len);
    let mut second = rng.random_range(0..len);
    if second >= first {
        second += 1;
    }
    two_point_crossover_at(a, b, first.min(second), first.max(second))
}

/// Flip each bit independently with probability `pm`.
pub fn bit_flip_mutation<R: Rng + ?Sized>(genome: &Mask, pm: f64, rng: &mut R) -> Result<Mask> {
    if !(0.0..=1.0).contains(&pm) {
        return Err(Error::invalid(format!("mutation rate {pm} outside [0, 1]")));
    }
    let mut out = genome.clone();
    for bit in out.bits_mut() {
        if rng.random_bool(pm) {
            *bit = !*bit;
        }
    }
    Ok(out)
}
