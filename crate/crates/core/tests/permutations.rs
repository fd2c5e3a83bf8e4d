use bops_core::perm::{
    concordant_pairs, discordant_pairs, kendall_feature_map, pair_count, pair_index, swap_neighbors,
    LexicographicPermutations, Permutation, PermutationMatrix,
};
use bops_core::{kendall_kernel, mallows_kernel};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn perm_strategy(d: usize) -> impl Strategy<Value = Permutation> {
    Just((0..d).collect::<Vec<usize>>()).prop_shuffle().prop_map(|v| Permutation::new(v).unwrap())
}

fn pair_of_perms() -> impl Strategy<Value = (Permutation, Permutation)> {
    (2usize..=12).prop_flat_map(|d| (perm_strategy(d), perm_strategy(d)))
}

fn triple_of_perms() -> impl Strategy<Value = (Permutation, Permutation, Permutation)> {
    (2usize..=12).prop_flat_map(|d| (perm_strategy(d), perm_strategy(d), perm_strategy(d)))
}

/// O(d²) count straight from the definition, independent of the library's loop.
fn naive_discordant(a: &[usize], b: &[usize]) -> usize {
    let d = a.len();
    (0..d)
        .flat_map(|i| (0..d).map(move |j| (i, j)))
        .filter(|&(i, j)| i < j && (a[i] as i64 - a[j] as i64) * (b[i] as i64 - b[j] as i64) < 0)
        .count()
}

proptest! {
    #[test]
    fn discordance_matches_definition((a, b) in pair_of_perms()) {
        prop_assert_eq!(discordant_pairs(&a, &b).unwrap(), naive_discordant(a.as_slice(), b.as_slice()));
    }

    #[test]
    fn discordance_is_symmetric((a, b) in pair_of_perms()) {
        prop_assert_eq!(discordant_pairs(&a, &b).unwrap(), discordant_pairs(&b, &a).unwrap());
    }

    #[test]
    fn pairs_partition((a, b) in pair_of_perms()) {
        let total = discordant_pairs(&a, &b).unwrap() + concordant_pairs(&a, &b).unwrap();
        prop_assert_eq!(total, pair_count(a.dim()));
    }

    #[test]
    fn zero_discordance_iff_equal((a, b) in pair_of_perms()) {
        prop_assert_eq!(discordant_pairs(&a, &b).unwrap() == 0, a == b);
        prop_assert_eq!(discordant_pairs(&a, &a).unwrap(), 0);
    }

    #[test]
    fn right_invariance((a, b, s) in triple_of_perms()) {
        let lhs = discordant_pairs(&a.compose(&s).unwrap(), &b.compose(&s).unwrap()).unwrap();
        prop_assert_eq!(lhs, discordant_pairs(&a, &b).unwrap());
    }

    #[test]
    fn kernel_trick((a, b) in pair_of_perms()) {
        let dot: f64 = kendall_feature_map(&a).iter().zip(kendall_feature_map(&b)).map(|(x, y)| x * y).sum();
        prop_assert!((dot - kendall_kernel(&a, &b).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn mallows_in_unit_interval((a, b) in pair_of_perms(), l in 0.0f64..20.0) {
        let k = mallows_kernel(&a, &b, l).unwrap();
        prop_assert!((0.0..=1.0).contains(&k));
        prop_assert_eq!(mallows_kernel(&a, &a, l).unwrap(), 1.0);
    }

    #[test]
    fn display_round_trip(a in (2usize..=15).prop_flat_map(perm_strategy)) {
        let parsed: Permutation = a.to_string().parse().unwrap();
        prop_assert_eq!(parsed, a);
    }

    #[test]
    fn matrix_round_trip(a in (2usize..=10).prop_flat_map(perm_strategy)) {
        let m = PermutationMatrix::from_permutation(&a);
        for i in 0..a.dim() {
            prop_assert_eq!((0..a.dim()).map(|j| m.get(i, j) as usize).sum::<usize>(), 1);
            prop_assert_eq!((0..a.dim()).map(|j| m.get(j, i) as usize).sum::<usize>(), 1);
        }
        prop_assert_eq!(m.to_permutation(), a);
    }

    #[test]
    fn inverse_composes_to_identity(a in (2usize..=12).prop_flat_map(perm_strategy)) {
        prop_assert!(a.compose(&a.inverse()).unwrap().is_identity());
        prop_assert!(a.inverse().compose(&a).unwrap().is_identity());
    }

    #[test]
    fn every_swap_neighbor_is_one_transposition_away(a in (2usize..=9).prop_flat_map(perm_strategy)) {
        let n = swap_neighbors(&a);
        prop_assert_eq!(n.len(), pair_count(a.dim()));
        for q in n {
            let diffs = a.as_slice().iter().zip(q.as_slice()).filter(|(x, y)| x != y).count();
            prop_assert_eq!(diffs, 2);
        }
    }
}

#[test]
fn pair_index_is_a_bijection_onto_the_feature_positions() {
    for d in 2..=12 {
        let mut expected = 0;
        for i in 0..d {
            for j in (i + 1)..d {
                assert_eq!(pair_index(d, i, j), expected);
                expected += 1;
            }
        }
        assert_eq!(expected, pair_count(d));
    }
}

#[test]
fn feature_norm_is_one() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for d in 2..=12 {
        let p = Permutation::random(d, &mut rng).unwrap();
        let norm: f64 = kendall_feature_map(&p).iter().map(|x| x * x).sum();
        assert!((norm - 1.0).abs() < 1e-12);
    }
}

#[test]
fn lexicographic_enumeration_is_complete_and_ordered() {
    let all: Vec<Permutation> = LexicographicPermutations::new(5).unwrap().collect();
    assert_eq!(all.len(), 120);
    assert!(all.windows(2).all(|w| w[0] < w[1]));
    assert!(all[0].is_identity());
}

/// Chi-square goodness of fit for the Fisher-Yates sampler over all of S_d.
#[test]
fn random_permutations_are_uniform() {
    // 99.9% quantiles: chi2(1) = 10.83, chi2(5) = 20.52, chi2(23) = 49.73
    let cases = [(2usize, 10.83), (3, 20.52), (4, 49.73)];
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for (d, critical) in cases {
        let all: Vec<Permutation> = LexicographicPermutations::new(d).unwrap().collect();
        let draws = 600 * all.len();
        let mut counts = vec![0usize; all.len()];
        for _ in 0..draws {
            let p = Permutation::random(d, &mut rng).unwrap();
            counts[all.binary_search(&p).unwrap()] += 1;
        }
        let expected = draws as f64 / all.len() as f64;
        let chi2: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
        assert!(chi2 < critical, "d={d}: chi2 {chi2} >= {critical}");
    }
}

#[test]
fn reversal_is_maximally_discordant() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for d in 2..=12 {
        let p = Permutation::random(d, &mut rng).unwrap();
        assert_eq!(discordant_pairs(&p, &p.reversed()).unwrap(), pair_count(d));
    }
}
