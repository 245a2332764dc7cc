mod common;

use blinded_core::solve::{bimatrix_mixed_nash, enumerate_pure_nash, minmax_punishment, solve_lp_equilibrium, worst_nash_for};
use blinded_core::{
    expected_utility, fixtures, int, normalize_payoffs, ratio, verify_equilibrium, Concept,
    ProfileDistribution, Rational, Tolerance,
};
use common::{hierarchy_suite, random_dist, random_game, rng};
use proptest::prelude::*;

#[test]
fn verifier_matches_brute_force_on_generated_suite() {
    let out = hierarchy_suite();
    assert!(out.cases > 5000, "{} cases", out.cases);
    assert!(out.mismatches.is_empty(), "{:?}", &out.mismatches[..out.mismatches.len().min(5)]);
    assert_eq!(out.containment_violations, 0);
}

#[test]
fn pure_nash_points_pass_every_concept() {
    let mut r = rng(7);
    for _ in 0..200 {
        let g = random_game(&[3, 2, 2], &mut r);
        for p in enumerate_pure_nash(&g) {
            let d = ProfileDistribution::point(p);
            for c in [Concept::Nash, Concept::Ce, Concept::Cce] {
                assert!(verify_equilibrium(&g, &d, c, &Tolerance::exact()).unwrap().accepted);
            }
        }
    }
}

#[test]
fn bos_reference_values() {
    let g = fixtures::battle_of_sexes();
    let a = fixtures::bos_alpha();
    assert!(verify_equilibrium(&g, &a, Concept::Ce, &Tolerance::exact()).unwrap().accepted);
    assert_eq!(expected_utility(&g, &a).unwrap(), vec![ratio(7, 2), ratio(7, 2)]);
    for t in 0..2 {
        assert_eq!(worst_nash_for(&g, t).unwrap().value, ratio(10, 7));
        assert_eq!(minmax_punishment(&g, t).unwrap().value, ratio(10, 7));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn expected_utility_is_linear(seed in 0u64..100_000, num in 0i64..=7) {
        let mut r = rng(seed);
        let sizes = [2, 3, 2];
        let g = random_game(&sizes, &mut r);
        let a = random_dist(&sizes, 6, &mut r);
        let b = random_dist(&sizes, 6, &mut r);
        let l = ratio(num, 7);
        let mix = a.mixture(&b, &l).unwrap();
        let ea = expected_utility(&g, &a).unwrap();
        let eb = expected_utility(&g, &b).unwrap();
        let em = expected_utility(&g, &mix).unwrap();
        for i in 0..3 {
            prop_assert_eq!(&em[i], &(&l * &ea[i] + (int(1) - &l) * &eb[i]));
        }
    }

    #[test]
    fn normalisation_keeps_verdicts(seed in 0u64..100_000) {
        let mut r = rng(seed);
        let sizes = [3, 3];
        let g = random_game(&sizes, &mut r);
        let n = normalize_payoffs(&g);
        let d = random_dist(&sizes, 6, &mut r);
        for c in [Concept::Ce, Concept::Cce] {
            let x = verify_equilibrium(&g, &d, c, &Tolerance::exact()).unwrap().accepted;
            let y = verify_equilibrium(&n, &d, c, &Tolerance::exact()).unwrap().accepted;
            prop_assert_eq!(x, y);
        }
    }

    #[test]
    fn hierarchy_holds_at_any_slack(seed in 0u64..100_000, e in 0i64..4) {
        let mut r = rng(seed);
        let sizes = [2, 2, 3];
        let g = random_game(&sizes, &mut r);
        let d = common::random_product(&sizes, &mut r);
        let tol = Tolerance::new(ratio(e, 2));
        let nash = verify_equilibrium(&g, &d, Concept::Nash, &tol).unwrap().accepted;
        let ce = verify_equilibrium(&g, &d, Concept::Ce, &tol).unwrap().accepted;
        let cce = verify_equilibrium(&g, &d, Concept::Cce, &tol).unwrap().accepted;
        prop_assert!(!nash || ce);
        prop_assert!(!ce || cce);
    }

    #[test]
    fn lp_solutions_verify_and_cce_dominates_ce(seed in 0u64..100_000) {
        let mut r = rng(seed);
        let g = random_game(&[2, 3], &mut r);
        let w = vec![int(1), int(1)];
        let ce = solve_lp_equilibrium(&g, Concept::Ce, &w).unwrap();
        let cce = solve_lp_equilibrium(&g, Concept::Cce, &w).unwrap();
        prop_assert!(verify_equilibrium(&g, &ce, Concept::Ce, &Tolerance::exact()).unwrap().accepted);
        prop_assert!(verify_equilibrium(&g, &cce, Concept::Cce, &Tolerance::exact()).unwrap().accepted);
        let sum = |d: &ProfileDistribution| -> Rational { expected_utility(&g, d).unwrap().into_iter().sum() };
        prop_assert!(sum(&cce) >= sum(&ce));
    }

    #[test]
    fn minmax_never_exceeds_worst_nash(seed in 0u64..100_000) {
        let mut r = rng(seed);
        let g = random_game(&[3, 3], &mut r);
        for t in 0..2 {
            let mm = minmax_punishment(&g, t).unwrap();
            let wn = worst_nash_for(&g, t).unwrap();
            prop_assert!(mm.value <= wn.value);
            prop_assert!(verify_equilibrium(&g, &wn.strategy, Concept::Nash, &Tolerance::exact()).unwrap().accepted);
        }
    }

    #[test]
    fn mixed_nash_set_is_affine_invariant(seed in 0u64..100_000, s0 in 1i64..5, s1 in 1i64..5, c in -3i64..3) {
        let mut r = rng(seed);
        let g = random_game(&[2, 2], &mut r);
        let h = g.map_payoffs(|i, u| if i == 0 { u * int(s0) + int(c) } else { u * ratio(1, s1) - int(c) });
        let mut a = bimatrix_mixed_nash(&g).unwrap();
        let mut b = bimatrix_mixed_nash(&h).unwrap();
        a.sort_by(|x, y| x.support().cmp(y.support()));
        b.sort_by(|x, y| x.support().cmp(y.support()));
        prop_assert_eq!(a, b);
    }
}

#[test]
fn cce_gap_fixture() {
    let g = fixtures::g_star();
    let a = fixtures::g_star_alpha();
    let cce = verify_equilibrium(&g, &a, Concept::Cce, &Tolerance::exact()).unwrap();
    let ce = verify_equilibrium(&g, &a, Concept::Ce, &Tolerance::exact()).unwrap();
    assert!(cce.accepted && !ce.accepted);
    assert_eq!(expected_utility(&g, &a).unwrap(), vec![int(50), int(50)]);
}
