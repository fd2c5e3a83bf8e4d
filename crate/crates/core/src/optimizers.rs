//! Minimizers over S_d: exhaustive enumeration, steepest-descent swap local
//! search, and seeded multi-restart search. The Thompson-sampling QAP is solved
//! through the [`QapSolver`] trait so backends can be swapped.

use alloc::vec::Vec;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::acquisition::QapMatrices;
use crate::error::{Error, Result};
use crate::perm::{pair_count, LexicographicPermutations, Permutation};

/// Largest `d` accepted by [`brute_force_argmin`] (9! = 362880 evaluations).
pub const MAX_EXHAUSTIVE_DIM: usize = 9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchBudget {
    pub restarts: usize,
    pub max_steps_per_restart: usize,
}

impl SearchBudget {
    pub fn new(restarts: usize, max_steps_per_restart: usize) -> Result<Self> {
        if restarts == 0 {
            return Err(Error::InvalidConfig("restarts must be >= 1"));
        }
        if max_steps_per_restart == 0 {
            return Err(Error::InvalidConfig("max_steps_per_restart must be >= 1"));
        }
        Ok(SearchBudget { restarts, max_steps_per_restart })
    }

    /// `restarts` restarts with a step cap of `10·C(d,2)`.
    pub fn for_dimension(d: usize, restarts: usize) -> Result<Self> {
        SearchBudget::new(restarts, 10 * pair_count(d).max(1))
    }
}

/// Global minimizer by enumeration of S_d in lexicographic order; ties keep
/// the lexicographically smallest mapping.
pub fn brute_force_argmin<F>(mut objective: F, d: usize) -> Result<(Permutation, f64)>
where
    F: FnMut(&Permutation) -> f64,
{
    if d > MAX_EXHAUSTIVE_DIM {
        return Err(Error::TooLargeForEnumeration { d, max: MAX_EXHAUSTIVE_DIM });
    }
    let mut best: Option<(Permutation, f64)> = None;
    for p in LexicographicPermutations::new(d)? {
        let v = objective(&p);
        if best.as_ref().is_none_or(|(_, b)| v < *b) {
            best = Some((p, v));
        }
    }
    Ok(best.expect("S_d is nonempty"))
}

/// Steepest-descent local search over transposition neighbors.
///
/// Each step moves to the best neighbor (first in lexicographic pair order on
/// ties) if it strictly improves; stops at a 2-swap local optimum or after
/// `max_steps` moves.
pub fn local_search<F>(mut objective: F, start: Permutation, max_steps: usize) -> (Permutation, f64)
where
    F: FnMut(&Permutation) -> f64,
{
    let mut current_value = objective(&start);
    let mut current = start;
    let d = current.dim();
    let mut buf = current.as_slice().to_vec();
    for _ in 0..max_steps {
        let mut best_move: Option<(usize, usize, f64)> = None;
        for i in 0..d {
            for j in (i + 1)..d {
                buf.swap(i, j);
                let candidate = Permutation::from_vec_unchecked(buf.clone());
                let v = objective(&candidate);
                buf.swap(i, j);
                let threshold = best_move.map_or(current_value, |(_, _, b)| b);
                if v < threshold {
                    best_move = Some((i, j, v));
                }
            }
        }
        match best_move {
            Some((i, j, v)) => {
                buf.swap(i, j);
                current = current.swapped(i, j);
                current_value = v;
            }
            None => break,
        }
    }
    (current, current_value)
}

/// One local search per restart from a uniform random start.
///
/// Restart `r` draws its start from its own stream, seeded by the `r`-th
/// `u64` taken from `rng`, so results do not depend on evaluation order and
/// a larger budget extends a smaller one on the same seed.
pub fn multi_restart_search<F, R>(
    mut objective: F,
    d: usize,
    budget: &SearchBudget,
    rng: &mut R,
) -> Result<Vec<(Permutation, f64)>>
where
    F: FnMut(&Permutation) -> f64,
    R: RngCore + ?Sized,
{
    SearchBudget::new(budget.restarts, budget.max_steps_per_restart)?;
    let seeds: Vec<u64> = (0..budget.restarts).map(|_| rng.next_u64()).collect();
    seeds
        .into_iter()
        .map(|seed| {
            let mut sub = ChaCha8Rng::seed_from_u64(seed);
            let start = Permutation::random(d, &mut sub)?;
            Ok(local_search(&mut objective, start, budget.max_steps_per_restart))
        })
        .collect()
}

/// Best result of [`multi_restart_search`]; ties keep the earliest restart.
pub fn multi_restart_argmin<F, R>(
    objective: F,
    d: usize,
    budget: &SearchBudget,
    rng: &mut R,
) -> Result<(Permutation, f64)>
where
    F: FnMut(&Permutation) -> f64,
    R: RngCore + ?Sized,
{
    let results = multi_restart_search(objective, d, budget, rng)?;
    Ok(best_of(results).expect("at least one restart"))
}

pub(crate) fn best_of(results: Vec<(Permutation, f64)>) -> Option<(Permutation, f64)> {
    results.into_iter().fold(None, |best, (p, v)| match best {
        Some((bp, bv)) if bv <= v => Some((bp, bv)),
        _ => Some((p, v)),
    })
}

/// A minimizer of the Thompson-sampling QAP plus the other local optima the
/// backend found (used to avoid re-selecting evaluated points).
#[derive(Debug, Clone, PartialEq)]
pub struct QapSolution {
    pub best: Permutation,
    pub value: f64,
    /// Every candidate the backend terminated at, including `best`.
    pub candidates: Vec<(Permutation, f64)>,
}

/// Backend contract for `min_P Tr(W·P·A·Pᵀ)`.
pub trait QapSolver {
    fn solve(&self, qap: &QapMatrices, rng: &mut dyn RngCore) -> Result<QapSolution>;
}

/// Exact enumeration, `d ≤ 9`.
#[derive(Debug, Clone, Copy, Default)]
pub struct ExhaustiveQap;

impl QapSolver for ExhaustiveQap {
    fn solve(&self, qap: &QapMatrices, _rng: &mut dyn RngCore) -> Result<QapSolution> {
        let (best, value) = brute_force_argmin(|p| qap.objective_unchecked(p), qap.dim())?;
        Ok(QapSolution { candidates: alloc::vec![(best.clone(), value)], best, value })
    }
}

/// Multi-restart 2-swap local search.
#[derive(Debug, Clone, Copy)]
pub struct MultiRestartQap {
    pub budget: SearchBudget,
}

impl QapSolver for MultiRestartQap {
    fn solve(&self, qap: &QapMatrices, rng: &mut dyn RngCore) -> Result<QapSolution> {
        let candidates = multi_restart_search(|p| qap.objective_unchecked(p), qap.dim(), &self.budget, rng)?;
        let (best, value) = best_of(candidates.clone()).expect("at least one restart");
        Ok(QapSolution { best, value, candidates })
    }
}

/// Minimizes the Thompson-sampling QAP with multi-restart swap search.
pub fn solve_ts_qap<R: Rng + ?Sized>(qap: &QapMatrices, budget: &SearchBudget, rng: &mut R) -> Result<Permutation> {
    let (best, _) = multi_restart_argmin(|p| qap.objective_unchecked(p), qap.dim(), budget, rng)?;
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perm::{discordant_pairs, swap_neighbors};
    use alloc::vec;

    fn p(v: &[usize]) -> Permutation {
        Permutation::new(v.to_vec()).unwrap()
    }

    #[test]
    fn budget_validation() {
        assert!(SearchBudget::new(0, 5).is_err());
        assert!(SearchBudget::new(5, 0).is_err());
        assert_eq!(SearchBudget::for_dimension(6, 10).unwrap().max_steps_per_restart, 150);
    }

    #[test]
    fn brute_force_finds_target_and_ties_to_identity() {
        let target = p(&[3, 1, 4, 0, 2]);
        let (best, v) = brute_force_argmin(|q| discordant_pairs(q, &target).unwrap() as f64, 5).unwrap();
        assert_eq!(best, target);
        assert_eq!(v, 0.0);
        let (best, v) = brute_force_argmin(|_| 4.0, 6).unwrap();
        assert!(best.is_identity());
        assert_eq!(v, 4.0);
        assert!(matches!(brute_force_argmin(|_| 0.0, 10), Err(Error::TooLargeForEnumeration { .. })));
    }

    #[test]
    fn local_search_fixed_point() {
        let target = p(&[2, 0, 1, 3]);
        let (q, v) = local_search(|x| discordant_pairs(x, &target).unwrap() as f64, target.clone(), 100);
        assert_eq!(q, target);
        assert_eq!(v, 0.0);
    }

    #[test]
    fn local_search_result_is_two_swap_optimal() {
        let weights = [3.0, -1.0, 2.0, 0.5, -2.5, 1.5];
        let f = |x: &Permutation| {
            let s = x.as_slice();
            s.iter().enumerate().map(|(i, &v)| weights[i] * (v as f64 - 1.7 * i as f64).powi(2)).sum::<f64>()
        };
        let (best, v) = local_search(f, p(&[5, 4, 3, 2, 1, 0]), 1000);
        for n in swap_neighbors(&best) {
            assert!(f(&n) >= v);
        }
    }

    #[test]
    fn single_restart_matches_local_search() {
        let target = p(&[4, 2, 0, 3, 1]);
        let f = |x: &Permutation| discordant_pairs(x, &target).unwrap() as f64;
        let budget = SearchBudget::new(1, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let (a, va) = multi_restart_argmin(f, 5, &budget, &mut rng).unwrap();

        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let mut sub = ChaCha8Rng::seed_from_u64(rng.next_u64());
        let start = Permutation::random(5, &mut sub).unwrap();
        let (b, vb) = local_search(f, start, 3);
        assert_eq!((a, va), (b, vb));
    }

    #[test]
    fn exhaustive_backend_candidates() {
        let qap = crate::acquisition::build_qap(&[1.0, -2.0, 0.5], 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let sol = ExhaustiveQap.solve(&qap, &mut rng).unwrap();
        assert_eq!(sol.candidates, vec![(sol.best.clone(), sol.value)]);
    }
}
