//! Seeded random inputs for property suites and experiments.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::Rng;

/// Uniform point in the closed unit disk.
pub fn unit_disk_point<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let r = rng.random::<f64>().sqrt();
    Complex64::from_polar(r, TAU * rng.random::<f64>())
}

pub fn unit_disk_values<R: Rng + ?Sized>(rng: &mut R, len: usize) -> Vec<Complex64> {
    (0..len).map(|_| unit_disk_point(rng)).collect()
}

/// Independent fair signs.
pub fn sign_values<R: Rng + ?Sized>(rng: &mut R, len: usize) -> Vec<Complex64> {
    (0..len)
        .map(|_| Complex64::new(if rng.random::<bool>() { 1.0 } else { -1.0 }, 0.0))
        .collect()
}

/// Uniformly random permutation of `{0..k-1}`.
pub fn random_permutation<R: Rng + ?Sized>(rng: &mut R, k: usize) -> Vec<usize> {
    let mut p: Vec<usize> = (0..k).collect();
    p.shuffle(rng);
    p
}

/// Uniformly random cyclic permutation (a single `k`-cycle).
pub fn random_cycle<R: Rng + ?Sized>(rng: &mut R, k: usize) -> Vec<usize> {
    let order = random_permutation(rng, k);
    let mut p = vec![0; k];
    for i in 0..k {
        p[order[i]] = order[(i + 1) % k];
    }
    p
}

/// Each point of `{0..k-1}` kept independently with probability 1/2.
pub fn random_subset<R: Rng + ?Sized>(rng: &mut R, k: usize) -> Vec<usize> {
    (0..k).filter(|_| rng.random::<bool>()).collect()
}
