use num_bigint::BigUint;
use primitive_sets::corpus::{check_recorded, recorded};
use primitive_sets::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rational_core::{ratio_of, ReducedRational};

proptest! {
    #[test]
    fn half_intervals_are_primitive(x in 2u64..5000) {
        prop_assert!(is_primitive(&((x / 2 + 1)..=x).collect::<Vec<_>>()));
    }

    #[test]
    fn multiples_break_primitivity(d in 1u64..10_000, extra in proptest::collection::vec(1u64..100_000, 0..20)) {
        let mut v = extra;
        v.push(d);
        v.push(2 * d);
        prop_assert!(!is_primitive(&v));
    }

    #[test]
    fn numerator_grouping_matches_per_denominator(nums in proptest::collection::vec((1u64..200, 1u64..6), 1..25)) {
        let rs: Vec<ReducedRational> = nums.iter().map(|&(a, q)| ReducedRational::new(a, q)).collect();
        let mut expect = true;
        for q in 1..=200u64 {
            let group: Vec<u64> = rs.iter().filter(|r| r.den_u64() == Some(q)).filter_map(|r| r.num_u64()).collect();
            expect &= is_primitive(&group) || group.is_empty();
        }
        prop_assert_eq!(is_primitive_numerators(&rs), expect);
    }
}

#[test]
fn sperner_through_six() {
    let binom = [1u64, 1, 2, 3, 6, 10, 20];
    for k in 0..=6u32 {
        assert_eq!(sperner_max_antichain(k).unwrap(), binom[k as usize], "k={k}");
    }
    assert_eq!(count_antichains(6).unwrap(), 7_828_354);
}

#[test]
fn bundled_corpus_reproduces() {
    let meta = recorded();
    let checks = check_recorded(&meta).unwrap();
    assert_eq!(checks.len(), meta.entries.len());
    for c in &checks {
        assert!(c.ok(), "{c:?}");
    }
}

fn random_family(rng: &mut ChaCha8Rng) -> RationalFamily {
    // a few classes placed at increasing scales, each a run of 1-spaced values
    let mut el = Vec::new();
    let mut start = 2u64;
    for class in 0..rng.gen_range(1..5) {
        let len = rng.gen_range(1..30);
        let den = rng.gen_range(1..4u64);
        let off = rng.gen_range(0..den);
        for i in 0..len {
            let v = ReducedRational::new((start + i) * den + off, den);
            el.push(FamilyElement::tagged(v, &format!("c{class}")));
        }
        start += len + rng.gen_range(1..40);
    }
    RationalFamily::new(None, el, true, false).unwrap()
}

#[test]
fn construction_invariants_on_random_families() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut multi = 0;
    for _ in 0..60 {
        let fam = random_family(&mut rng);
        let c = ratio_of(1, rng.gen_range(11..40));
        let opts = AprimeOptions { c, levels: 3, x1_start: Some(BigUint::from(2u32)) };
        let t = construct_aprime_with(&fam, &opts).unwrap();
        assert!(!t.levels.is_empty());
        assert!(t.invariant_violations().is_empty(), "{:?}", t.invariant_violations());
        let rep = check_aprime_lemma(&t);
        assert!(rep.part_b_violations.is_empty());
        if t.levels.len() > 1 {
            multi += 1;
        }
    }
    assert!(multi > 0);
}

#[test]
fn cross_level_pair_has_large_bracket() {
    // class a: 2 and 2 * 5297/1009, whose denominator exceeds Q_1 = 200
    let mut el = vec![
        FamilyElement::tagged(ReducedRational::integer(2), "a"),
        FamilyElement::tagged(ReducedRational::new(10594, 1009), "a"),
    ];
    for v in (3..=20).filter(|v| *v != 10 && *v != 11) {
        el.push(FamilyElement::tagged(ReducedRational::integer(v), "b"));
    }
    let fam = RationalFamily::new(None, el, true, false).unwrap();
    let opts =
        AprimeOptions { c: ratio_of(1, 20), levels: 2, x1_start: Some(BigUint::from(2u32)) };
    let t = construct_aprime_with(&fam, &opts).unwrap();
    assert_eq!(t.levels.len(), 2, "{:?}", t.partial);
    assert_eq!(t.levels[0].q.as_ref().unwrap().ln_approx.exp().round(), 200.0);
    assert!(t.levels[1].a_prime.values().any(|v| v == &ReducedRational::new(10594, 1009)));
    let rep = check_aprime_lemma(&t);
    assert_eq!(rep.cross_pairs_checked, 1);
    assert!(rep.holds(), "{rep:?}");
}
