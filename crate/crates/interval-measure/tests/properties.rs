use interval_measure::*;
use num_traits::{Signed, ToPrimitive};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rational_core::{bracket, kappa, rat, BigRational, ReducedRational};

fn r(n: u64, d: u64) -> ReducedRational {
    ReducedRational::new(n, d)
}

fn admissible(a: u64, q: u64, b: u64, rr: u64) -> Option<(ReducedRational, ReducedRational)> {
    let (x, y) = (r(a, q), r(b, rr));
    let (al, be) = if x > y { (x, y) } else { (y, x) };
    (be >= r(2, 1) && al != be && !al.div(&be).is_integer()).then_some((al, be))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn three_way_agreement(a in 2u64..400, q in 1u64..40, b in 2u64..400, rr in 1u64..40, tn in 200i64..4000) {
        if let Some((al, be)) = admissible(a, q, b, rr) {
            let t = rat(tn);
            let rep = overlap_sj(&al, &be, &t).unwrap();
            prop_assert!(rep.agreement_exact());
            prop_assert!(rep.boundary_ok());
            prop_assert!(rep.s0_gating_ok());
            if bracket(&al, &be) <= ReducedRational::one() {
                prop_assert_eq!(rep.direct, rat(0));
            }
        }
    }

    #[test]
    fn m_variant_sum_formula(a in 1u64..60, q in 1u64..8, b in 1u64..60, rr in 1u64..8, tn in 50i64..800) {
        let (al, be) = (r(a, q), r(b, rr));
        prop_assume!(al >= r(1, 1) && be >= r(1, 1));
        let t = rat(tn);
        let d = overlap_direct(&al, &be, &t, Variant::M).unwrap();
        let s = overlap_sum_formula(&al, &be, &t, Variant::M).unwrap();
        prop_assert!((d - s).abs() <= rat(2) / t);
    }

    #[test]
    fn second_moment_never_exceeds_union(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = rat(rng.gen_range(5..60));
        let k = rng.gen_range(1..6);
        let sets: Vec<IntervalUnion> = (0..k).map(|_| {
            let scale = rng.gen_range(1..7);
            let ivs = (0..rng.gen_range(0..6)).map(|_| {
                let lo = rng.gen_range(-10..70 * scale);
                (lo, lo + rng.gen_range(1..10 * scale))
            }).collect();
            IntervalUnion::from_scaled(scale, ivs)
        }).collect();
        let lb = second_moment_lb(&sets, &t).unwrap();
        let u = IntervalUnion::union_all(&sets).unwrap().measure_pt(&t).unwrap();
        prop_assert!(lb <= u);
    }
}

#[test]
fn disjoint_pairs_have_empty_overlap() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut found = 0;
    while found < 40 {
        let (a, q, b, rr) = (rng.gen_range(2..300), rng.gen_range(1..30), rng.gen_range(2..300), rng.gen_range(1..30));
        let Some((al, be)) = admissible(a, q, b, rr) else { continue };
        if bracket(&al, &be) > ReducedRational::one() {
            continue;
        }
        found += 1;
        assert_eq!(overlap_direct(&al, &be, &rat(20_000), Variant::N).unwrap(), rat(0), "{al} {be}");
    }
}

fn rel_err(x: &BigRational, y: &BigRational) -> f64 {
    (x / y - rat(1)).abs().to_f64().unwrap()
}

#[test]
fn measures_converge_as_t_grows() {
    for alpha in [2u64, 3, 5, 7, 12, 20, 30] {
        let a = r(alpha, 1);
        let mut last_m = f64::INFINITY;
        for t in [1_000i64, 10_000, 100_000] {
            let t = rat(t);
            let pm = build_m(&a, &t).unwrap().measure_pt(&t).unwrap() * rat(alpha as i64);
            let em = rel_err(&pm, &rat(1));
            assert!(em <= last_m + 1e-12, "alpha={alpha}");
            last_m = em;
        }
        let t = rat(100_000);
        let pn = build_n(&a, &t).unwrap().measure_pt(&t).unwrap();
        assert!(rel_err(&pn, &kappa(&a)) < 0.1, "alpha={alpha}");
    }
}

#[test]
fn kappa_error_trend() {
    // the relative error at the largest horizon is below the one at the smallest
    for alpha in [3u64, 11, 29, 47] {
        let a = r(alpha, 1);
        let errs: Vec<f64> = [10_000i64, 100_000, 1_000_000]
            .iter()
            .map(|&t| {
                let t = rat(t);
                rel_err(&build_n(&a, &t).unwrap().measure_pt(&t).unwrap(), &kappa(&a))
            })
            .collect();
        assert!(errs[2] < errs[0], "alpha={alpha}: {errs:?}");
    }
}

#[test]
fn rational_approximants_of_an_irrational_ratio() {
    // beta = 2, alpha -> 2 sqrt(2) through continued-fraction convergents; once the bracket is
    // large the normalized N-overlap settles close to 1 at a fixed horizon
    let t = rat(200_000);
    let be = r(2, 1);
    let mut ratios = Vec::new();
    for (p, q) in [(17u64, 6u64), (99, 35), (577, 204), (3363, 1189)] {
        let al = r(p, q);
        let rep = overlap_sj(&al, &be, &t).unwrap();
        assert!(rep.agreement_exact());
        let norm = &rep.direct / (&rep.p_alpha * &rep.p_beta);
        ratios.push(norm.to_f64().unwrap());
    }
    let last = *ratios.last().unwrap();
    assert!((last - 1.0).abs() < 0.25, "{ratios:?}");
}
