//! Values computed by hand (closed forms, explicit products) and frozen here.

use cpl_core::asymptotics::{critical_numbers, TypeProbTable};
use cpl_core::eliminator::{eliminate, limit_probability, quantifier_free_network};
use cpl_core::evaluator::{evaluate, Assignment};
use cpl_core::network::structure_from_mask;
use cpl_core::rational::{one, rat, Rational};
use cpl_core::worlds::{exact_probability, world_distribution, DEFAULT_CAP_BITS};
use cpl_core::{fixtures, parse, render};

/// NET-PQ world probability as an explicit product over elements.
fn pq_world(p: &[bool], q: &[bool]) -> Rational {
    p.iter()
        .zip(q)
        .map(|(&p, &q)| {
            let mu = if p { rat(3, 4) } else { rat(1, 4) };
            rat(1, 2) * if q { mu } else { one() - mu }
        })
        .product()
}

#[test]
fn pq_distribution_matches_product_formula() {
    let pq = fixtures::pq();
    let dist = world_distribution(&pq, 2, DEFAULT_CAP_BITS).unwrap();
    for (mask, prob) in dist.iter().enumerate() {
        // P(1), P(2), Q(1), Q(2) from the least significant bit up.
        let bit = |i: usize| mask >> i & 1 == 1;
        assert_eq!(*prob, pq_world(&[bit(0), bit(1)], &[bit(2), bit(3)]), "mask {mask}");
    }
}

#[test]
fn single_variable_probabilities() {
    let pq = fixtures::pq();
    let x1 = Assignment::new().with("x", 1);
    let q = parse("Q(x)", pq.sig()).unwrap();
    assert_eq!(exact_probability(&pq, 1, &q, &x1, DEFAULT_CAP_BITS).unwrap(), rat(1, 2));
    let both = parse("P(x) & Q(x)", pq.sig()).unwrap();
    for n in 1..=3 {
        assert_eq!(exact_probability(&pq, n, &both, &x1, DEFAULT_CAP_BITS).unwrap(), rat(3, 8));
    }
}

#[test]
fn chain_masses() {
    // A → B → C with B|A = 2/3, B|¬A = 1/3, C|B = 1/5, C|¬B = 4/5.
    let chain = fixtures::chain();
    let table = TypeProbTable::new(&chain).unwrap();
    let c = parse("C(x)", chain.sig()).unwrap();
    let lim = limit_probability(&table, &c, "distinct").unwrap();
    // P(B) = 1/2 by symmetry, so P(C) = 1/2·1/5 + 1/2·4/5.
    assert_eq!(lim.d, rat(1, 2));
    let abc = parse("A(x) & B(x) & C(x)", chain.sig()).unwrap();
    assert_eq!(limit_probability(&table, &abc, "distinct").unwrap().d, rat(1, 2) * rat(2, 3) * rat(1, 5));
    let x1 = Assignment::new().with("x", 1);
    assert_eq!(exact_probability(&chain, 2, &abc, &x1, DEFAULT_CAP_BITS).unwrap(), rat(1, 15));
}

#[test]
fn frozen_critical_sets() {
    let coin = critical_numbers(&fixtures::coin(), 1).unwrap();
    assert_eq!(coin.values.into_iter().collect::<Vec<_>>(), vec![rat(0, 1), rat(1, 2), rat(1, 1)]);
    let pq = critical_numbers(&fixtures::pq(), 1).unwrap();
    // Ratios of sub-multiset sums over multiset sums of {3,3,1,1}/8, by denominator sum:
    // 2 = 1+1, 4 = 3+1, 5 = 3+1+1, 6 = 3+3, 7 = 3+3+1, 8 = all.
    let mut expected: std::collections::BTreeSet<Rational> = [rat(0, 1), rat(1, 1), rat(1, 2)].into_iter().collect();
    expected.extend([rat(1, 4), rat(3, 4)]);
    expected.extend((1..5).map(|k| rat(k, 5)));
    expected.extend([rat(1, 7), rat(3, 7), rat(4, 7), rat(6, 7)]);
    expected.extend((1..8).map(|k| rat(k, 8)));
    assert_eq!(pq.values, expected);
}

#[test]
fn dimension_zero_eliminations_hold_in_every_world() {
    let coin = fixtures::coin();
    let table = TypeProbTable::new(&coin).unwrap();
    for text in ["exists y : (P(y) & y=x)", "exists y : (~P(y) & x=y)", "P(x) & exists y : y=x"] {
        let f = parse(text, coin.sig()).unwrap();
        let f_star = eliminate(&table, &f).unwrap();
        for n in 1..=3 {
            for mask in 0..1u64 << n {
                let w = structure_from_mask(coin.sig(), n, mask);
                for e in 1..=n {
                    let a = Assignment::new().with("x", e);
                    assert_eq!(evaluate(&w, &f, &a).unwrap(), evaluate(&w, &f_star, &a).unwrap(), "{text}");
                }
            }
        }
    }
}

#[test]
fn exists_guard_gap_at_three() {
    let net = fixtures::exists_guard();
    let qf = quantifier_free_network(&net).unwrap();
    let q = parse("Q(x)", net.sig()).unwrap();
    let x1 = Assignment::new().with("x", 1);
    // 3/4·(1 − 1/8) + 1/4·1/8 against 3/4.
    assert_eq!(exact_probability(&net, 3, &q, &x1, DEFAULT_CAP_BITS).unwrap(), rat(11, 16));
    assert_eq!(exact_probability(&qf, 3, &q, &x1, DEFAULT_CAP_BITS).unwrap(), rat(3, 4));
    assert_eq!(render(&qf.relation("Q").unwrap().rules[0].guard), "true");
}
