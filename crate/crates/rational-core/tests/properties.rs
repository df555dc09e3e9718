use num_bigint::BigUint;
use proptest::prelude::*;
use rational_core::*;

fn rr() -> impl Strategy<Value = ReducedRational> {
    (1u64..=1_000_000, 1u64..=1_000_000).prop_map(|(a, b)| ReducedRational::new(a, b))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn bracket_symmetric_and_formulas_agree(a in rr(), b in rr()) {
        let d = bracket(&a, &b);
        prop_assert_eq!(&d, &bracket(&b, &a));
        prop_assert_eq!(&d, &bracket_gcd_form(&a, &b));
    }

    #[test]
    fn bracket_rescaling(a in rr(), b in rr(), g in 1u64..1000, h in 1u64..1000) {
        let gamma = ReducedRational::new(g, h);
        let lhs = bracket(&a.mul(&gamma), &b.mul(&gamma));
        prop_assert_eq!(lhs, bracket(&a, &b).div(&gamma));
    }

    #[test]
    fn valuations_reconstruct(a in rr()) {
        let mut num = BigUint::from(1u32);
        let mut den = BigUint::from(1u32);
        for p in primes_of(&a).unwrap() {
            let e = val_p(&a, p).unwrap();
            prop_assert!(e != 0);
            if e > 0 { num *= BigUint::from(p).pow(e as u32) } else { den *= BigUint::from(p).pow((-e) as u32) }
        }
        prop_assert_eq!(&num, a.num());
        prop_assert_eq!(&den, a.den());
    }

    #[test]
    fn omega_plus_large_primes(a in rr(), z in 1i64..200) {
        let z = rat(z);
        let all = primes_of(&a).unwrap();
        let small = omega_z(&a, &z).unwrap();
        let big = all.iter().filter(|&&p| rat(p as i64) > z).count();
        prop_assert_eq!(small + big, all.len());
        prop_assert_eq!(l_z(&a, &z).unwrap() == rat(0), big == 0);
    }

    #[test]
    fn rough_matches_definition(n in 1u64..100_000, y in 1i64..400) {
        let by_def = (2..=y as u64).all(|p| !is_prime_u64(p) || n % p != 0);
        prop_assert_eq!(is_rough(n, &rat(y)), by_def);
    }
}

#[test]
fn harmonic_comparator_band() {
    for x in [10i64, 30, 100, 300, 1000, 3000, 10_000] {
        let c = mult_harmonic_sum(&MultSpec::one(), &rat(x)).unwrap();
        assert!(c.ratio > 0.1 && c.ratio < 10.0, "x={x} ratio={}", c.ratio);
    }
}

#[test]
fn tau2_sum_matches_divisor_count() {
    let x = 2000u64;
    let brute: u64 = (1..=x).map(|n| (1..=n).filter(|d| n % d == 0).count() as u64).sum();
    let s = mult_sum(&MultSpec::tau(2), &rat(x as i64)).unwrap();
    assert_eq!(s.sum, rat(brute as i64));
}

#[test]
fn shared_table_concurrent_growth() {
    let handles: Vec<_> = (1..=8u64)
        .map(|i| std::thread::spawn(move || prime_table(i * 150_000).upto(100_000).len()))
        .collect();
    for h in handles {
        assert_eq!(h.join().unwrap(), 9592);
    }
}
