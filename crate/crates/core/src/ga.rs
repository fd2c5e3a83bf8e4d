//! Permutation genetic operators used by the GA baseline.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::Result;
use crate::perm::{check_same_dim, Permutation};

/// Binary tournament: two uniform picks (with replacement), the lower value
/// wins and ties go to the first pick. Returns an index into `population`.
pub fn tournament<R: Rng + ?Sized>(population: &[(Permutation, f64)], rng: &mut R) -> usize {
    let a = rng.random_range(0..population.len());
    let b = rng.random_range(0..population.len());
    if population[b].1 < population[a].1 {
        b
    } else {
        a
    }
}

/// Order crossover (OX) with the segment `start..=end` taken from `first`.
///
/// The remaining positions are filled cyclically from `end + 1` with the
/// objects of `second` in its cyclic order from `end + 1`, skipping objects
/// already placed.
pub fn order_crossover_at(first: &Permutation, second: &Permutation, start: usize, end: usize) -> Result<Permutation> {
    check_same_dim(first, second)?;
    let d = first.dim();
    debug_assert!(start <= end && end < d);
    let (p1, p2) = (first.as_slice(), second.as_slice());
    let mut child = vec![usize::MAX; d];
    let mut used = vec![false; d];
    for k in start..=end {
        child[k] = p1[k];
        used[p1[k]] = true;
    }
    let mut fill = (end + 1) % d;
    for step in 0..d {
        let v = p2[(end + 1 + step) % d];
        if used[v] {
            continue;
        }
        while child[fill] != usize::MAX {
            fill = (fill + 1) % d;
        }
        child[fill] = v;
        used[v] = true;
    }
    Permutation::new(child)
}

/// OX with a uniformly drawn segment.
pub fn order_crossover<R: Rng + ?Sized>(first: &Permutation, second: &Permutation, rng: &mut R) -> Result<Permutation> {
    let d = first.dim();
    let a = rng.random_range(0..d);
    let b = rng.random_range(0..d);
    order_crossover_at(first, second, a.min(b), a.max(b))
}

/// Exchanges two distinct uniformly chosen positions.
pub fn swap_mutation<R: Rng + ?Sized>(p: &Permutation, rng: &mut R) -> Permutation {
    let d = p.dim();
    let i = rng.random_range(0..d);
    let mut j = rng.random_range(0..d - 1);
    if j >= i {
        j += 1;
    }
    p.swapped(i, j)
}

pub(crate) fn truncate_population(population: &mut Vec<(Permutation, f64)>, size: usize) {
    population.sort_by(|a, b| a.1.total_cmp(&b.1));
    population.truncate(size);
}
