//! Exact arithmetic on positive rationals and the elementary arithmetic
//! functions used throughout the workspace.
//!
//! Every value here is exact. Real-valued parameters such as `z` in
//! [`omega_z`] or `t` in [`fejer_a`] are taken as [`BigRational`] and floors
//! are computed exactly.

mod arith;
mod error;
mod fejer;
mod logs;
mod multiplicative;
pub mod primes;
mod rational;

pub use arith::{
    bracket, bracket_gcd_form, floor_u64, height, kappa, l_z, mertens, omega_z, primes_of,
    prime_harmonic, ratio, val_p, RoughSieve,
};
pub use arith::{is_rough, rough_list, smallest_prime_factor};
pub use error::{Error, Result};
pub use fejer::{fejer_a, fejer_b, fejer_c, FEJER_A_CONSTANT};
pub use logs::{cmp_ln, cmp_ln_sum, ln_enclosure};
pub use multiplicative::{
    mult_harmonic_sum, mult_sum, tau_k_prime_power, Comparator, DefaultRule, MultSpec, MultValues,
};
pub use num_bigint::{BigInt, BigUint};
pub use num_rational::BigRational;
pub use primes::{factor_u64, is_prime_u64, prime_table, PrimeTable};
pub use rational::{reduce, ReducedRational};

/// Parses `"a/b"`, `"a"` or a decimal like `"2.5"` / `"1e4"` into an exact rational.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    rational::parse_big_rational(s)
}

/// Formats a rational as `"num/den"` (or `"num"` when the denominator is 1).
pub fn fmt_rational(x: &BigRational) -> String {
    if x.denom() == &BigInt::from(1) {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Convenience constructor for an integer-valued [`BigRational`].
pub fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Convenience constructor for `n/d`.
pub fn ratio_of(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Serde helper that writes a [`BigRational`] as a `"num/den"` string.
pub mod serde_rational {
    use super::*;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&fmt_rational(x))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<BigRational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map_err(serde::de::Error::custom)
    }

    pub mod vec {
        use super::*;
        use serde::ser::SerializeSeq;

        pub fn serialize<S: Serializer>(xs: &[BigRational], s: S) -> std::result::Result<S::Ok, S::Error> {
            let mut seq = s.serialize_seq(Some(xs.len()))?;
            for x in xs {
                seq.serialize_element(&fmt_rational(x))?;
            }
            seq.end()
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<BigRational>, D::Error> {
            let v = Vec::<String>::deserialize(d)?;
            v.iter()
                .map(|s| parse_rational(s).map_err(serde::de::Error::custom))
                .collect()
        }
    }

    pub mod opt {
        use super::*;

        pub fn serialize<S: Serializer>(x: &Option<BigRational>, s: S) -> std::result::Result<S::Ok, S::Error> {
            match x {
                Some(v) => s.serialize_some(&fmt_rational(v)),
                None => s.serialize_none(),
            }
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<BigRational>, D::Error> {
            let v = Option::<String>::deserialize(d)?;
            v.map(|s| parse_rational(&s).map_err(serde::de::Error::custom)).transpose()
        }
    }
}
