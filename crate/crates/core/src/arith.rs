//! Exact 64-bit integer and modular arithmetic.
//!
//! All products of residues go through 128-bit intermediates, so any modulus
//! that fits in a `u64` is safe; factorization is limited to `n <= 2^63`.

use crate::error::{Error, Result};
use std::fmt;

/// Largest integer accepted by [`factorize`].
pub const FACTOR_LIMIT: u64 = 1 << 63;

const TRIAL_LIMIT: u64 = 1_000_000;

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// `gcd(|a|, m)`.
pub fn gcd_i(a: i64, m: u64) -> u64 {
    gcd(a.unsigned_abs(), m)
}

pub fn lcm(a: u64, b: u64) -> u64 {
    if a == 0 || b == 0 {
        return 0;
    }
    a / gcd(a, b) * b
}

/// Least non-negative residue of `x` modulo `m`.
#[inline]
pub fn reduce(x: i64, m: u64) -> u64 {
    (x as i128).rem_euclid(m as i128) as u64
}

#[inline]
pub fn reduce_i128(x: i128, m: u64) -> u64 {
    x.rem_euclid(m as i128) as u64
}

#[inline]
pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

#[inline]
pub fn add_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 + b as u128) % m as u128) as u64
}

#[inline]
pub fn sub_mod(a: u64, b: u64, m: u64) -> u64 {
    add_mod(a, m - b % m, m)
}

pub fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Exponent of the prime `p` in `n` (`n != 0`).
pub fn valuation(mut n: u64, p: u64) -> u32 {
    debug_assert!(n != 0 && p > 1);
    let mut k = 0;
    while n.is_multiple_of(p) {
        n /= p;
        k += 1;
    }
    k
}

/// Deterministic Miller-Rabin, exact for every `u64`.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const SMALL: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for &p in &SMALL {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let mut d = n - 1;
    let s = d.trailing_zeros();
    d >>= s;
    'witness: for &a in &SMALL {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Brent's cycle-finding variant of Pollard rho; returns a proper divisor of
/// the odd composite `n`. Deterministic: polynomial constants are tried in
/// ascending order.
fn pollard_brent(n: u64) -> u64 {
    const BATCH: u64 = 128;
    for c in 1.. {
        let f = |x: u64| add_mod(mul_mod(x, x, n), c, n);
        let (mut y, mut r, mut q) = (2u64, 1u64, 1u64);
        let (mut x, mut ys) = (0u64, 0u64);
        let mut g = 1;
        while g == 1 {
            x = y;
            for _ in 0..r {
                y = f(y);
            }
            let mut k = 0;
            while k < r && g == 1 {
                ys = y;
                for _ in 0..BATCH.min(r - k) {
                    y = f(y);
                    q = mul_mod(q, x.abs_diff(y), n);
                }
                g = gcd(q, n);
                k += BATCH;
            }
            r <<= 1;
        }
        if g == n {
            // Batch overshot; walk back one step at a time.
            loop {
                ys = f(ys);
                g = gcd(x.abs_diff(ys), n);
                if g > 1 {
                    break;
                }
            }
        }
        if g != n {
            return g;
        }
    }
    unreachable!()
}

fn split_into(n: u64, out: &mut Vec<u64>) {
    if n == 1 {
        return;
    }
    if is_prime(n) {
        out.push(n);
        return;
    }
    let d = pollard_brent(n);
    split_into(d, out);
    split_into(n / d, out);
}

/// A positive integer together with its prime factorization and its
/// squarefree/squarefull decomposition `n = s0 * s1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FactoredModulus {
    n: u64,
    factors: Vec<(u64, u32)>,
    s0: u64,
    s1: u64,
}

impl FactoredModulus {
    pub fn new(n: u64) -> Result<Self> {
        factorize(n)
    }

    /// Builds the modulus `p^e` without factoring. `p` must be prime.
    pub fn prime_power(p: u64, e: u32) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        let n = p
            .checked_pow(e)
            .filter(|&n| n <= FACTOR_LIMIT)
            .ok_or(Error::TooLarge {
                value: p,
                limit: FACTOR_LIMIT,
            })?;
        Ok(Self::from_sorted(
            n,
            if e == 0 { vec![] } else { vec![(p, e)] },
        ))
    }

    fn from_sorted(n: u64, factors: Vec<(u64, u32)>) -> Self {
        let mut s0 = 1;
        let mut s1 = 1;
        for &(p, e) in &factors {
            if e == 1 {
                s0 *= p;
            } else {
                s1 *= p.pow(e);
            }
        }
        FactoredModulus { n, factors, s0, s1 }
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn factors(&self) -> &[(u64, u32)] {
        &self.factors
    }

    /// Squarefree part `s0`.
    pub fn squarefree_part(&self) -> u64 {
        self.s0
    }

    /// Squarefull part `s1`.
    pub fn squarefull_part(&self) -> u64 {
        self.s1
    }

    pub fn is_odd(&self) -> bool {
        self.n % 2 == 1
    }

    pub fn is_squarefree(&self) -> bool {
        self.s1 == 1
    }

    pub fn require_odd(&self) -> Result<()> {
        if self.is_odd() {
            Ok(())
        } else {
            Err(Error::EvenModulus(self.n))
        }
    }

    pub fn prime_powers(&self) -> impl Iterator<Item = u64> + '_ {
        self.factors.iter().map(|&(p, e)| p.pow(e))
    }

    pub fn divisor_count(&self) -> u64 {
        self.factors.iter().map(|&(_, e)| e as u64 + 1).product()
    }

    /// Euler's totient.
    pub fn phi(&self) -> u64 {
        self.factors
            .iter()
            .map(|&(p, e)| (p - 1) * p.pow(e - 1))
            .product()
    }

    /// All positive divisors, ascending.
    pub fn divisors(&self) -> Vec<u64> {
        let mut divs = vec![1u64];
        for &(p, e) in &self.factors {
            let len = divs.len();
            let mut pk = 1;
            for _ in 0..e {
                pk *= p;
                for i in 0..len {
                    divs.push(divs[i] * pk);
                }
            }
        }
        divs.sort_unstable();
        divs
    }
}

impl fmt::Display for FactoredModulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.n)
    }
}

/// Trial division to `10^6`, then Pollard-Brent on whatever cofactor remains.
pub fn factorize(n: u64) -> Result<FactoredModulus> {
    if n == 0 {
        return Err(Error::Zero);
    }
    if n > FACTOR_LIMIT {
        return Err(Error::TooLarge {
            value: n,
            limit: FACTOR_LIMIT,
        });
    }
    let mut primes = Vec::new();
    let mut rest = n;
    while rest.is_multiple_of(2) {
        primes.push(2);
        rest /= 2;
    }
    let mut d = 3u64;
    while d <= TRIAL_LIMIT && d * d <= rest {
        while rest.is_multiple_of(d) {
            primes.push(d);
            rest /= d;
        }
        d += 2;
    }
    if rest > 1 {
        if d * d > rest {
            primes.push(rest);
        } else {
            split_into(rest, &mut primes);
        }
    }
    primes.sort_unstable();
    let mut factors: Vec<(u64, u32)> = Vec::new();
    for p in primes {
        match factors.last_mut() {
            Some((q, e)) if *q == p => *e += 1,
            _ => factors.push((p, 1)),
        }
    }
    Ok(FactoredModulus::from_sorted(n, factors))
}

/// Jacobi symbol `(a | c)` for odd `c >= 1`.
pub fn jacobi(a: i64, c: u64) -> Result<i8> {
    if c.is_multiple_of(2) {
        return Err(Error::EvenModulus(c));
    }
    Ok(jacobi_odd(reduce(a, c), c))
}

/// Binary reciprocity loop; `n` must be odd.
pub(crate) fn jacobi_odd(a: u64, n: u64) -> i8 {
    let (mut a, mut n) = (a % n, n);
    let mut t = 1i8;
    while a != 0 {
        let tz = a.trailing_zeros();
        a >>= tz;
        if tz & 1 == 1 && matches!(n % 8, 3 | 5) {
            t = -t;
        }
        std::mem::swap(&mut a, &mut n);
        if a % 4 == 3 && n % 4 == 3 {
            t = -t;
        }
        a %= n;
    }
    if n == 1 {
        t
    } else {
        0
    }
}

/// A residue `value` modulo `modulus`, with `0 <= value < modulus`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ResidueClass {
    value: u64,
    modulus: u64,
}

impl ResidueClass {
    pub fn new(value: i64, modulus: u64) -> Result<Self> {
        if modulus == 0 {
            return Err(Error::Zero);
        }
        Ok(ResidueClass {
            value: reduce(value, modulus),
            modulus,
        })
    }

    pub(crate) fn from_reduced(value: u64, modulus: u64) -> Self {
        debug_assert!(value < modulus);
        ResidueClass { value, modulus }
    }

    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }
}

impl fmt::Display for ResidueClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} mod {}", self.value, self.modulus)
    }
}

/// Inverse of `x` modulo `m` by the extended Euclidean algorithm.
pub fn inv_mod(x: i64, m: u64) -> Result<ResidueClass> {
    if m == 0 {
        return Err(Error::Zero);
    }
    inv_residue(reduce(x, m), m)
        .map(|v| ResidueClass::from_reduced(v, m))
        .ok_or(Error::NoInverse { x, m })
}

/// Inverse of the reduced residue `a` modulo `m`, if it exists.
pub(crate) fn inv_residue(a: u64, m: u64) -> Option<u64> {
    if m == 1 {
        return Some(0);
    }
    let (mut old_r, mut r) = (a as i128, m as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    (old_r == 1).then(|| old_s.rem_euclid(m as i128) as u64)
}

/// Chinese remainder combination of residues with pairwise coprime moduli.
pub fn crt_combine(residues: &[ResidueClass]) -> Result<ResidueClass> {
    let mut acc = ResidueClass::from_reduced(0, 1);
    for r in residues {
        let (m1, m2) = (acc.modulus, r.modulus);
        if gcd(m1, m2) != 1 {
            return Err(Error::NotCoprime(m1, m2));
        }
        let m = m1.checked_mul(m2).ok_or(Error::TooLarge {
            value: m1,
            limit: u64::MAX / m2,
        })?;
        // x = a1 + m1 * ((a2 - a1) / m1 mod m2)
        let inv = inv_residue(m1 % m2, m2).expect("coprime moduli");
        let step = mul_mod(sub_mod(r.value, acc.value % m2, m2), inv, m2);
        let value = acc.value + m1 * step;
        acc = ResidueClass::from_reduced(value % m, m);
    }
    Ok(acc)
}

/// `sum_{1 <= m <= big_m} gcd(r, m)`, via `gcd(r, m) = sum_{d | (r, m)} phi(d)`.
pub fn gcd_average(r: u64, big_m: u64) -> Result<u64> {
    if r == 0 || big_m == 0 {
        return Err(Error::Zero);
    }
    let fm = factorize(r)?;
    let mut total = 0u64;
    for d in fm.divisors() {
        let phi_d = factorize(d)?.phi();
        total += phi_d * (big_m / d);
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn legendre_euler(a: i64, p: u64) -> i8 {
        match pow_mod(reduce(a, p), (p - 1) / 2, p) {
            0 => 0,
            1 => 1,
            _ => -1,
        }
    }

    #[test]
    fn factor_examples() {
        let f = factorize(45).unwrap();
        assert_eq!(f.factors(), &[(3, 2), (5, 1)]);
        assert_eq!((f.squarefree_part(), f.squarefull_part()), (5, 9));

        let one = factorize(1).unwrap();
        assert!(one.factors().is_empty());
        assert_eq!((one.squarefree_part(), one.squarefull_part()), (1, 1));

        assert_eq!(factorize(0), Err(Error::Zero));
        assert!(factorize(FACTOR_LIMIT + 1).is_err());
    }

    #[test]
    fn factor_two_pow_40_plus_one() {
        // 2^40 + 1 = 257 * 4278255361
        let n = (1u64 << 40) + 1;
        let f = factorize(n).unwrap();
        let prod: u64 = f.prime_powers().product();
        assert_eq!(prod, n);
        for &(p, _) in f.factors() {
            // trial-division primality oracle up to sqrt(p)
            let mut d = 2;
            while d * d <= p {
                assert_ne!(p % d, 0, "{p} divisible by {d}");
                d += 1;
            }
        }
        assert_eq!(f.factors(), &[(257, 1), (4278255361, 1)]);
    }

    #[test]
    fn factor_needs_rho() {
        // two primes above the trial-division limit
        let (p, q) = (1_000_003u64, 1_000_033u64);
        let f = factorize(p * q).unwrap();
        assert_eq!(f.factors(), &[(p, 1), (q, 1)]);
        let f = factorize(p * p * 3).unwrap();
        assert_eq!(f.factors(), &[(3, 1), (p, 2)]);
        let big = 4_611_686_018_427_387_847u64; // prime below 2^62
        assert!(is_prime(big));
        assert_eq!(factorize(big).unwrap().factors(), &[(big, 1)]);
    }

    #[test]
    fn factorize_then_multiply_is_identity() {
        for n in 1..=1_000_000u64 {
            let f = factorize(n).unwrap();
            let prod: u64 = f.prime_powers().product();
            assert_eq!(prod, n);
            assert_eq!(f.squarefree_part() * f.squarefull_part(), n);
            assert_eq!(gcd(f.squarefree_part(), f.squarefull_part()), 1);
        }
    }

    #[test]
    fn jacobi_examples() {
        for a in -5..20 {
            assert_eq!(jacobi(a, 1).unwrap(), 1);
        }
        assert_eq!(jacobi(2, 15).unwrap(), 1);
        assert_eq!(
            jacobi(2, 15).unwrap(),
            legendre_euler(2, 3) * legendre_euler(2, 5)
        );
        assert_eq!(jacobi(3, 8), Err(Error::EvenModulus(8)));
        for c in (3..200u64).step_by(2) {
            for k in 1..c as i64 {
                if gcd_i(k, c) == 1 {
                    assert_eq!(jacobi(k * k, c).unwrap(), 1);
                }
            }
        }
    }

    #[test]
    fn jacobi_matches_euler_for_primes() {
        for p in (3..2000u64).filter(|&p| is_prime(p)) {
            for a in -3..(p as i64 + 3) {
                assert_eq!(jacobi(a, p).unwrap(), legendre_euler(a, p), "({a}|{p})");
            }
        }
    }

    #[test]
    fn jacobi_zero_iff_not_coprime() {
        for c in (1..=10_000u64).step_by(2) {
            for a in 0..c {
                let j = jacobi_odd(a, c);
                assert_eq!(j == 0, gcd(a, c) > 1, "({a}|{c})");
            }
        }
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(inv_mod(1, 11).unwrap().value(), 1);
        assert_eq!(inv_mod(3, 7).unwrap().value(), 5);
        assert_eq!(inv_mod(4, 15).unwrap().value(), 4);
        assert_eq!(inv_mod(-3, 7).unwrap().value(), 2);
        assert_eq!(inv_mod(6, 15), Err(Error::NoInverse { x: 6, m: 15 }));
        assert_eq!(inv_mod(5, 1).unwrap().value(), 0);
    }

    #[test]
    fn crt_examples() {
        let r = |v, m| ResidueClass::new(v, m).unwrap();
        assert_eq!(crt_combine(&[r(1, 3), r(1, 5)]).unwrap(), r(1, 15));
        assert_eq!(crt_combine(&[r(2, 3), r(3, 5)]).unwrap(), r(8, 15));
        assert_eq!(crt_combine(&[r(4, 7)]).unwrap(), r(4, 7));
        assert_eq!(
            crt_combine(&[r(1, 6), r(1, 4)]),
            Err(Error::NotCoprime(6, 4))
        );
    }

    #[test]
    fn crt_matches_exhaustive_search() {
        for m1 in 1..=50u64 {
            for m2 in 1..=50u64 {
                if gcd(m1, m2) != 1 {
                    continue;
                }
                for a1 in 0..m1 {
                    for a2 in (0..m2).step_by(7) {
                        let got = crt_combine(&[
                            ResidueClass::new(a1 as i64, m1).unwrap(),
                            ResidueClass::new(a2 as i64, m2).unwrap(),
                        ])
                        .unwrap();
                        let want = (0..m1 * m2).find(|x| x % m1 == a1 && x % m2 == a2).unwrap();
                        assert_eq!(got.value(), want);
                        assert_eq!(got.modulus(), m1 * m2);
                    }
                }
            }
        }
    }

    #[test]
    fn gcd_average_examples() {
        assert_eq!(gcd_average(1, 37).unwrap(), 37);
        assert_eq!(gcd_average(6, 6).unwrap(), 15);
        for r in 1..=500u64 {
            let fm = factorize(r).unwrap();
            for m in (1..=500u64).step_by(13) {
                let direct: u64 = (1..=m).map(|k| gcd(r, k)).sum();
                assert_eq!(gcd_average(r, m).unwrap(), direct, "r={r} M={m}");
                let sigma: u64 = fm.divisors().iter().sum();
                assert!(direct <= sigma * m);
                // sum <= M * d(r)
                assert!(direct as f64 / (m as f64 * fm.divisor_count() as f64) <= 1.0);
            }
        }
    }

    #[test]
    fn divisors_and_phi() {
        let f = factorize(360).unwrap();
        assert_eq!(f.divisor_count(), 24);
        assert_eq!(f.divisors().len(), 24);
        assert_eq!(f.phi(), 96);
        assert_eq!(FactoredModulus::prime_power(3, 4).unwrap().n(), 81);
        assert!(FactoredModulus::prime_power(9, 2).is_err());
    }
}
