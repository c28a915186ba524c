use lacunary::diophantine::*;
use lacunary::sequence::*;
use num_bigint::{BigInt, BigUint};
use num_rational::Ratio;
use proptest::prelude::*;

fn random_lacunary(seed_terms: &[u64], q_num: u64) -> Vec<BigUint> {
    // n_{k+1} ≥ (q_num/2)·n_k plus a small jitter
    let mut out: Vec<BigUint> = Vec::with_capacity(seed_terms.len());
    let mut cur = BigUint::from(1u32 + (seed_terms[0] % 7) as u32);
    for &s in seed_terms {
        out.push(cur.clone());
        cur = (&cur * q_num) / 2u32 + 1u32 + (s % 5);
    }
    out
}

fn paper() -> SequenceSpec {
    SequenceSpec::Paper(
        ConstructionParams::new(4, Ratio::new(1, 2), 2, Ratio::from_integer(1), TowerSpec::ReducedTower).unwrap(),
    )
}

proptest! {
    #[test]
    fn fast_equals_naive(
        terms in prop::collection::vec(any::<u64>(), 2..120),
        q_num in 3u64..8,
        a in 1u64..6,
        b in 1u64..6,
        pick in any::<(usize, usize)>(),
        offset in 0u64..3,
    ) {
        let prefix = random_lacunary(&terms, q_num);
        let n = prefix.len();
        let (k, l) = (pick.0 % n, pick.1 % n);
        // pick c that is attained often, otherwise a near miss
        let lhs = &prefix[k] * a;
        let rhs = &prefix[l] * b;
        let c = if lhs >= rhs { lhs - rhs + offset } else { BigUint::from(offset) };
        let eq = EquationParams::new(a, b, c);
        prop_assert_eq!(count_fast(&prefix, &eq), count_naive(&prefix, &eq));
    }

    #[test]
    fn spectrum_total_counts_nonnegative_differences(
        terms in prop::collection::vec(any::<u64>(), 1..60),
        a in 1u64..5,
        b in 1u64..5,
    ) {
        let prefix = random_lacunary(&terms, 5);
        let spec = difference_spectrum(&prefix, a, b, DEFAULT_PAIR_BUDGET).unwrap();
        let mut expected = 0u64;
        for x in &prefix {
            for y in &prefix {
                if x * a >= y * b {
                    expected += 1;
                }
            }
        }
        prop_assert_eq!(spec.total(), expected);
        prop_assert!(spec.counts.values().all(|&v| v >= 1));
        for (c, &v) in spec.counts.iter().take(20) {
            prop_assert_eq!(v, count_naive(&prefix, &EquationParams::new(a, b, c.clone())));
        }
    }

    #[test]
    fn max_count_agrees_with_spectrum(terms in prop::collection::vec(any::<u64>(), 1..60), a in 1u64..5, b in 1u64..5) {
        let prefix = random_lacunary(&terms, 4);
        let spec = difference_spectrum(&prefix, a, b, DEFAULT_PAIR_BUDGET).unwrap();
        let best = max_count(&prefix, a, b, true, DEFAULT_PAIR_BUDGET).unwrap();
        match spec.argmax(true) {
            Some((c, v)) => {
                prop_assert_eq!(best.c, Some(c));
                prop_assert_eq!(best.count, v);
            }
            None => prop_assert_eq!(best.count, 0),
        }
    }

    #[test]
    fn swapping_roles_negates_c(terms in prop::collection::vec(any::<u64>(), 1..40), a in 1u64..5, b in 1u64..5, c in -200i64..200) {
        let prefix = random_lacunary(&terms, 4);
        let c = BigInt::from(c);
        prop_assert_eq!(
            count_naive_signed(&prefix, a, b, &c),
            count_naive_signed(&prefix, b, a, &-c.clone())
        );
    }
}

#[test]
fn geometric_two_has_at_most_one_solution_per_c() {
    let prefix = SequenceSpec::Geometric { q: 2 }.prefix(200).unwrap();
    let spec = difference_spectrum(&prefix, 1, 1, DEFAULT_PAIR_BUDGET).unwrap();
    for (c, &v) in &spec.counts {
        if *c != BigUint::from(0u32) {
            assert!(v <= 1, "c={c} has {v} solutions");
        }
    }
}

#[test]
fn cross_block_totals_stay_bounded() {
    let spec = paper();
    let params = spec.params().unwrap().clone();
    let prefix = spec.prefix(340).unwrap();
    let mut worst = 0;
    for i in 2..=4 {
        for sub in params.subblocks(i).unwrap() {
            let eq = EquationParams::new(2, 1, special_rhs(i, sub.m, 1, 1, &params).unwrap());
            let split = count_by_block_relation(&prefix, &params, &eq).unwrap();
            worst = worst.max(split.cross_block);
        }
    }
    assert!(worst <= 2, "cross-block total {worst}");
}

#[test]
fn paper_prefix_oracle_equivalence_at_special_rhs() {
    let spec = paper();
    let params = spec.params().unwrap();
    let prefix = spec.prefix(20).unwrap();
    let eq = EquationParams::new(2, 1, special_rhs(2, 1, 1, 1, params).unwrap());
    assert_eq!(count_fast(&prefix, &eq), count_naive(&prefix, &eq));
}

#[test]
fn symbolic_block_count_matches_materialized() {
    let spec = paper();
    let params = spec.params().unwrap().clone();
    for i in 2..=4 {
        let t = params.tower_exponent(i).unwrap();
        for sub in params.subblocks(i).unwrap() {
            let c = special_rhs(i, sub.m, 1, 1, &params).unwrap();
            let eq = EquationParams::new(2, 1, c.clone());
            let reduced = BigInt::from(c >> t);
            assert_eq!(
                count_in_block_symbolic(&params, i, 2, 1, &reduced).unwrap(),
                count_in_block(&spec, i, &eq).unwrap()
            );
        }
    }
}

#[test]
fn budget_is_enforced() {
    let prefix = SequenceSpec::Geometric { q: 2 }.prefix(100).unwrap();
    assert!(matches!(
        difference_spectrum(&prefix, 1, 1, 50),
        Err(lacunary::Error::PairBudgetExceeded { .. })
    ));
}
