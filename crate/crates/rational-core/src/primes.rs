//! Prime sieve with a process-wide grow-only cache, plus u64 factorization.

use std::sync::{Arc, OnceLock, RwLock};

/// The primes up to `limit`, ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimeTable {
    limit: u64,
    primes: Vec<u64>,
}

const SEGMENT: u64 = 1 << 18;

impl PrimeTable {
    /// Segmented sieve of Eratosthenes up to `limit` inclusive.
    pub fn sieve(limit: u64) -> Self {
        let root = (limit as f64).sqrt() as u64 + 1;
        let mut small = vec![true; root as usize + 1];
        let mut base = Vec::new();
        for i in 2..=root {
            if small[i as usize] {
                base.push(i);
                let mut j = i * i;
                while j <= root {
                    small[j as usize] = false;
                    j += i;
                }
            }
        }
        let mut primes = Vec::new();
        let mut lo = 2u64;
        let mut seg = vec![true; SEGMENT as usize];
        while lo <= limit {
            let hi = (lo + SEGMENT - 1).min(limit);
            let len = (hi - lo + 1) as usize;
            seg[..len].fill(true);
            for &p in &base {
                if p * p > hi {
                    break;
                }
                let start = (p * p).max(lo.div_ceil(p) * p);
                let mut j = start;
                while j <= hi {
                    seg[(j - lo) as usize] = false;
                    j += p;
                }
            }
            primes.extend((0..len).filter(|&i| seg[i]).map(|i| lo + i as u64));
            lo = hi + 1;
        }
        Self { limit, primes }
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    /// Primes `<= x` (requires `x <= limit`).
    pub fn upto(&self, x: u64) -> &[u64] {
        assert!(x <= self.limit, "prime table too small: {} < {}", self.limit, x);
        let k = self.primes.partition_point(|&p| p <= x);
        &self.primes[..k]
    }

    pub fn contains(&self, n: u64) -> bool {
        n <= self.limit && self.primes.binary_search(&n).is_ok()
    }
}

fn cache() -> &'static RwLock<Arc<PrimeTable>> {
    static CACHE: OnceLock<RwLock<Arc<PrimeTable>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(Arc::new(PrimeTable::sieve(1 << 16))))
}

/// A shared table covering at least `limit`. Readers always see a complete table;
/// growth replaces the shared snapshot atomically.
pub fn prime_table(limit: u64) -> Arc<PrimeTable> {
    {
        let t = cache().read().unwrap();
        if t.limit >= limit {
            return t.clone();
        }
    }
    let mut w = cache().write().unwrap();
    if w.limit < limit {
        let target = limit.max(w.limit.saturating_mul(2));
        *w = Arc::new(PrimeTable::sieve(target));
    }
    w.clone()
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, b, m);
        }
        b = mul_mod(b, b, m);
        e >>= 1;
    }
    r
}

/// Deterministic Miller-Rabin for all u64.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n % p == 0 {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'outer: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'outer;
            }
        }
        return false;
    }
    true
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn pollard_brent(n: u64) -> u64 {
    if n % 2 == 0 {
        return 2;
    }
    let mut c = 1u64;
    loop {
        let f = |x: u64| (mul_mod(x, x, n) + c) % n;
        let (mut x, mut y, mut d) = (2u64, 2u64, 1u64);
        while d == 1 {
            x = f(x);
            y = f(f(y));
            d = gcd(x.abs_diff(y), n);
        }
        if d != n {
            return d;
        }
        c += 1;
    }
}

/// Prime factorization as ascending `(p, e)` pairs. `factor_u64(1)` is empty.
pub fn factor_u64(n: u64) -> Vec<(u64, u32)> {
    assert!(n >= 1, "factor_u64(0)");
    let mut out: Vec<(u64, u32)> = Vec::new();
    let mut m = n;
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47] {
        let mut e = 0;
        while m % p == 0 {
            m /= p;
            e += 1;
        }
        if e > 0 {
            out.push((p, e));
        }
    }
    let mut stack = vec![m];
    let mut found: Vec<u64> = Vec::new();
    while let Some(k) = stack.pop() {
        if k == 1 {
            continue;
        }
        if is_prime_u64(k) {
            found.push(k);
            continue;
        }
        let d = pollard_brent(k);
        stack.push(d);
        stack.push(k / d);
    }
    found.sort_unstable();
    for p in found {
        match out.last_mut() {
            Some((q, e)) if *q == p => *e += 1,
            _ => out.push((p, 1)),
        }
    }
    out
}

/// Factorization of an arbitrary-precision integer. Trial division by primes
/// below 10^6 first; any cofactor that still exceeds u64 is rejected.
pub fn factor_big(n: &num_bigint::BigUint) -> crate::Result<Vec<(u64, u32)>> {
    use num_traits::{ToPrimitive, Zero};
    if let Some(v) = n.to_u64() {
        return Ok(factor_u64(v));
    }
    let t = prime_table(1_000_000);
    let mut m = n.clone();
    let mut out = Vec::new();
    for &p in t.upto(1_000_000) {
        let mut e = 0;
        while (&m % p).is_zero() {
            m /= p;
            e += 1;
        }
        if e > 0 {
            out.push((p, e));
        }
        if let Some(v) = m.to_u64() {
            for (q, e) in factor_u64(v) {
                match out.iter_mut().find(|(r, _)| *r == q) {
                    Some(slot) => slot.1 += e,
                    None => out.push((q, e)),
                }
            }
            out.sort_unstable();
            return Ok(out);
        }
    }
    Err(crate::Error::Factor(n.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_primes(n: u64) -> Vec<u64> {
        (2..=n).filter(|&k| (2..k).take_while(|d| d * d <= k).all(|d| k % d != 0)).collect()
    }

    #[test]
    fn sieve_matches_trial_division() {
        for lim in [0, 1, 2, 3, 10, 100, 1000, 5000] {
            assert_eq!(PrimeTable::sieve(lim).primes(), naive_primes(lim).as_slice());
        }
    }

    fn naive_sieve(n: u64) -> Vec<u64> {
        let mut is = vec![true; n as usize + 1];
        let mut out = Vec::new();
        for i in 2..=n as usize {
            if is[i] {
                out.push(i as u64);
                let mut j = i * i;
                while j <= n as usize {
                    is[j] = false;
                    j += i;
                }
            }
        }
        out
    }

    #[test]
    fn sieve_crosses_segments() {
        let t = PrimeTable::sieve(SEGMENT * 2 + 17);
        assert_eq!(t.primes(), naive_sieve(SEGMENT * 2 + 17).as_slice());
        assert!(t.primes().windows(2).all(|w| w[0] < w[1]));
        for &p in t.primes().iter().step_by(997) {
            assert!(is_prime_u64(p));
        }
        assert_eq!(PrimeTable::sieve(1_000_000).primes().len(), 78_498);
    }

    #[test]
    fn cache_grows() {
        let t = prime_table(300_000);
        assert!(t.limit() >= 300_000);
        assert_eq!(t.upto(100).len(), 25);
    }

    #[test]
    fn factorization() {
        assert_eq!(factor_u64(1), vec![]);
        assert_eq!(factor_u64(280), vec![(2, 3), (5, 1), (7, 1)]);
        assert_eq!(factor_u64(999_999_000_001 * 3), vec![(3, 1), (999_999_000_001, 1)]);
        let n = 1_000_003u64 * 1_000_033;
        assert_eq!(factor_u64(n), vec![(1_000_003, 1), (1_000_033, 1)]);
    }

    #[test]
    fn miller_rabin() {
        let t = PrimeTable::sieve(10_000);
        for n in 0..10_000u64 {
            assert_eq!(is_prime_u64(n), t.contains(n), "{n}");
        }
        assert!(is_prime_u64(18_446_744_073_709_551_557));
    }
}
