use crate::error::{domain, Result};
use crate::primes::{factor_big, is_prime_u64, prime_table};
use crate::rational::ReducedRational;
use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// `floor(x)` for `x >= 0`, saturating at `u64::MAX`.
pub fn floor_u64(x: &BigRational) -> u64 {
    if x.is_negative() {
        return 0;
    }
    x.floor().to_integer().to_u64().unwrap_or(u64::MAX)
}

/// H(a/q) = max{a, q}.
pub fn height(rho: &ReducedRational) -> BigUint {
    rho.num().max(rho.den()).clone()
}

/// alpha / beta in lowest terms.
pub fn ratio(alpha: &ReducedRational, beta: &ReducedRational) -> ReducedRational {
    alpha.div(beta)
}

/// [alpha, beta] = H(alpha/beta) / max{alpha, beta}.
pub fn bracket(alpha: &ReducedRational, beta: &ReducedRational) -> ReducedRational {
    let h = height(&ratio(alpha, beta));
    let m = alpha.max(beta);
    ReducedRational::from_parts(h * m.den(), m.num().clone())
}

/// [a/q, b/r] = qr / (gcd(q, r) gcd(a, b)).
pub fn bracket_gcd_form(alpha: &ReducedRational, beta: &ReducedRational) -> ReducedRational {
    let (a, q) = (alpha.num(), alpha.den());
    let (b, r) = (beta.num(), beta.den());
    ReducedRational::from_parts(q * r, q.gcd(r) * a.gcd(b))
}

fn val_big(n: &BigUint, p: u64) -> i64 {
    let mut k = 0;
    let mut m = n.clone();
    loop {
        let (d, rem) = m.div_rem(&BigUint::from(p));
        if !rem.is_zero() {
            return k;
        }
        m = d;
        k += 1;
    }
}

/// p-adic valuation e_p(rho): positive on numerator primes, negative on denominator primes.
pub fn val_p(rho: &ReducedRational, p: u64) -> Result<i64> {
    if !is_prime_u64(p) {
        return domain(format!("val_p needs a prime, got {p}"));
    }
    Ok(val_big(rho.num(), p) - val_big(rho.den(), p))
}

/// All primes dividing num * den, ascending.
pub fn primes_of(rho: &ReducedRational) -> Result<Vec<u64>> {
    let mut ps: Vec<u64> = factor_big(rho.num())?
        .into_iter()
        .chain(factor_big(rho.den())?)
        .map(|(p, _)| p)
        .collect();
    ps.sort_unstable();
    ps.dedup();
    Ok(ps)
}

/// omega(rho; z) = #{p in rho : p <= z}.
pub fn omega_z(rho: &ReducedRational, z: &BigRational) -> Result<usize> {
    let zf = floor_u64(z);
    Ok(primes_of(rho)?.into_iter().filter(|&p| p <= zf).count())
}

/// L(rho; z) = sum over p in rho with p > z of 1/p.
pub fn l_z(rho: &ReducedRational, z: &BigRational) -> Result<BigRational> {
    let zf = floor_u64(z);
    Ok(primes_of(rho)?
        .into_iter()
        .filter(|&p| p > zf)
        .fold(BigRational::zero(), |acc, p| acc + BigRational::new(BigInt::one(), BigInt::from(p))))
}

/// prod_{p <= x} (1 - 1/p).
pub fn mertens(x: &BigRational) -> BigRational {
    let xf = floor_u64(x);
    let t = prime_table(xf.max(2));
    let (mut n, mut d) = (BigInt::one(), BigInt::one());
    for &p in t.upto(xf) {
        n *= p - 1;
        d *= p;
    }
    BigRational::new(n, d)
}

/// kappa(alpha) = (1/alpha) prod_{p <= alpha} (1 - 1/p).
pub fn kappa(alpha: &ReducedRational) -> BigRational {
    let a = alpha.to_big_rational();
    mertens(&a) / a
}

/// sum_{p <= x} 1/p exactly.
pub fn prime_harmonic(x: &BigRational) -> BigRational {
    let xf = floor_u64(x);
    let t = prime_table(xf.max(2));
    let ps = t.upto(xf);
    let den: BigInt = ps.iter().map(|&p| BigInt::from(p)).product();
    let num: BigInt = ps.iter().map(|&p| &den / BigInt::from(p)).sum();
    BigRational::new(num, den)
}

/// P^-(n), the least prime factor; `None` for n = 1.
pub fn smallest_prime_factor(n: u64) -> Option<u64> {
    assert!(n >= 1);
    if n == 1 {
        return None;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            return Some(d);
        }
        d += if d == 2 { 1 } else { 2 };
    }
    Some(n)
}

/// P^-(n) > y, with P^-(1) = infinity.
pub fn is_rough(n: u64, y: &BigRational) -> bool {
    let yf = floor_u64(y);
    match smallest_prime_factor(n) {
        None => true,
        Some(p) => p > yf,
    }
}

/// All y-rough n <= t, ascending.
pub fn rough_list(y: &BigRational, t: &BigRational) -> Vec<u64> {
    RoughSieve::new(floor_u64(y), floor_u64(t)).iter().collect()
}

/// Bitset of the y-rough integers in `[1, limit]`.
#[derive(Debug, Clone)]
pub struct RoughSieve {
    y: u64,
    limit: u64,
    bits: Vec<u64>,
}

impl RoughSieve {
    pub fn new(y: u64, limit: u64) -> Self {
        let words = (limit as usize + 64) / 64;
        let mut bits = vec![u64::MAX; words];
        bits[0] &= !1; // 0 is not in range
        let t = prime_table(y.max(2));
        for &p in t.upto(y) {
            let mut m = p;
            while m <= limit {
                bits[(m / 64) as usize] &= !(1u64 << (m % 64));
                m += p;
            }
        }
        for i in (limit + 1)..(words as u64 * 64) {
            bits[(i / 64) as usize] &= !(1u64 << (i % 64));
        }
        Self { y, limit, bits }
    }

    pub fn y(&self) -> u64 {
        self.y
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    /// Membership for `1 <= n <= limit`; out-of-range values fall back to trial division.
    #[inline]
    pub fn is_rough(&self, n: u64) -> bool {
        if n == 0 {
            return false;
        }
        if n <= self.limit {
            self.bits[(n / 64) as usize] >> (n % 64) & 1 == 1
        } else {
            smallest_prime_factor(n).map_or(true, |p| p > self.y)
        }
    }

    pub fn count_upto(&self, n: u64) -> u64 {
        let n = n.min(self.limit);
        let full = (n / 64) as usize;
        let mut c: u64 = self.bits[..full].iter().map(|w| w.count_ones() as u64).sum();
        let rem = n % 64 + 1;
        let mask = if rem == 64 { u64::MAX } else { (1u64 << rem) - 1 };
        c += (self.bits[full] & mask).count_ones() as u64;
        c
    }

    pub fn iter(&self) -> impl Iterator<Item = u64> + '_ {
        (1..=self.limit).filter(move |&n| self.is_rough(n))
    }
}
