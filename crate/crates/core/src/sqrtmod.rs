//! Complete sets of modular square roots for odd moduli.
//!
//! A "square root of s modulo r" here always means the whole collection
//! `{ k mod r : k^2 = s mod r }`, including the degenerate roots that appear
//! when `gcd(s, r) > 1`.

use crate::arith::{
    self, crt_combine, inv_residue, is_prime, mul_mod, pow_mod, reduce, sub_mod, FactoredModulus,
    ResidueClass,
};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SquareRootSet {
    target: u64,
    modulus: FactoredModulus,
    roots: Vec<u64>,
}

impl SquareRootSet {
    /// `s mod r`.
    pub fn target(&self) -> u64 {
        self.target
    }

    pub fn modulus(&self) -> &FactoredModulus {
        &self.modulus
    }

    /// Sorted, duplicate-free roots in `[0, r)`.
    pub fn roots(&self) -> &[u64] {
        &self.roots
    }

    pub fn len(&self) -> usize {
        self.roots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }

    pub fn residues(&self) -> impl Iterator<Item = ResidueClass> + '_ {
        let m = self.modulus.n();
        self.roots
            .iter()
            .map(move |&k| ResidueClass::from_reduced(k, m))
    }
}

/// Tonelli-Shanks for a quadratic residue `a` modulo the odd prime `p`.
/// The nonresidue is found by ascending trial, so the output is deterministic.
fn tonelli_shanks(a: u64, p: u64) -> u64 {
    debug_assert!(a != 0 && a < p);
    if p % 4 == 3 {
        return pow_mod(a, (p + 1) / 4, p);
    }
    let mut q = p - 1;
    let s = q.trailing_zeros();
    q >>= s;
    let z = (2..p)
        .find(|&z| pow_mod(z, (p - 1) / 2, p) == p - 1)
        .expect("odd prime has a nonresidue");
    let mut m = s;
    let mut c = pow_mod(z, q, p);
    let mut t = pow_mod(a, q, p);
    let mut r = pow_mod(a, q.div_ceil(2), p);
    while t != 1 {
        let mut i = 0;
        let mut t2 = t;
        while t2 != 1 {
            t2 = mul_mod(t2, t2, p);
            i += 1;
        }
        let b = pow_mod(c, 1 << (m - i - 1), p);
        m = i;
        c = mul_mod(b, b, p);
        t = mul_mod(t, c, p);
        r = mul_mod(r, b, p);
    }
    r
}

/// Roots of `k^2 = s (mod p)` for an odd prime `p`.
pub fn sqrt_mod_prime(s: i64, p: u64) -> Result<SquareRootSet> {
    if p.is_multiple_of(2) {
        return Err(Error::EvenModulus(p));
    }
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    let a = reduce(s, p);
    let roots = unit_roots_mod_prime(a, p);
    Ok(SquareRootSet {
        target: a,
        modulus: FactoredModulus::prime_power(p, 1)?,
        roots,
    })
}

fn unit_roots_mod_prime(a: u64, p: u64) -> Vec<u64> {
    if a == 0 {
        return vec![0];
    }
    if pow_mod(a, (p - 1) / 2, p) != 1 {
        return vec![];
    }
    let r = tonelli_shanks(a, p);
    let mut v = vec![r, p - r];
    v.sort_unstable();
    v
}

/// Newton/Hensel lift of a root `x` of `x^2 = u (mod p)` to modulus `pk = p^k`
/// (`u` a unit, so the root is nonsingular).
fn hensel_lift(mut x: u64, u: u64, p: u64, pk: u64) -> u64 {
    let mut m = p;
    while m < pk {
        m = m.saturating_mul(m).min(pk);
        let fx = sub_mod(mul_mod(x, x, m), u % m, m);
        let inv = inv_residue(mul_mod(2, x, m), m).expect("unit root");
        x = sub_mod(x % m, mul_mod(fx, inv, m), m);
    }
    x
}

/// Roots of `k^2 = s (mod p^e)`.
///
/// Writing `s = p^t u` with `p` not dividing `u`: if `t >= e` every multiple of
/// `p^ceil(e/2)` is a root; otherwise roots exist iff `t` is even and `u` is a
/// residue mod `p`, and then `k = p^(t/2) w` with `w^2 = u (mod p^(e-t))`,
/// which gives `2 p^(t/2)` roots.
pub fn sqrt_mod_prime_power(s: i64, p: u64, e: u32) -> Result<SquareRootSet> {
    if p.is_multiple_of(2) {
        return Err(Error::EvenModulus(p));
    }
    let modulus = FactoredModulus::prime_power(p, e)?;
    let pe = modulus.n();
    let target = reduce(s, pe);
    let roots = roots_prime_power(target, p, e, pe);
    Ok(SquareRootSet {
        target,
        modulus,
        roots,
    })
}

fn roots_prime_power(target: u64, p: u64, e: u32, pe: u64) -> Vec<u64> {
    if e == 0 {
        return vec![0];
    }
    if target == 0 {
        let step = p.pow(e.div_ceil(2));
        return (0..pe / step).map(|i| i * step).collect();
    }
    let t = arith::valuation(target, p);
    if t % 2 == 1 {
        return vec![];
    }
    let u = target / p.pow(t);
    let w0 = unit_roots_mod_prime(u % p, p);
    if w0.is_empty() {
        return vec![];
    }
    let half = p.pow(t / 2);
    let lift_mod = p.pow(e - t);
    // w is determined modulo p^(e-t); k = p^(t/2) w is taken modulo p^e, so
    // each lifted w splits into p^(t/2) residues of w modulo p^(e - t/2).
    let mut roots = Vec::with_capacity(2 * half as usize);
    for w in w0 {
        let w = hensel_lift(w, u % lift_mod, p, lift_mod);
        for i in 0..half {
            let wi = w + i * lift_mod;
            roots.push(mul_mod(half, wi, pe));
        }
    }
    roots.sort_unstable();
    roots.dedup();
    roots
}

/// All roots of `k^2 = s (mod r)` for odd `r`, assembled by CRT from the
/// prime-power root sets.
pub fn sqrt_mod(s: i64, r: &FactoredModulus) -> Result<SquareRootSet> {
    r.require_odd()?;
    let n = r.n();
    let target = reduce(s, n);
    let mut roots: Vec<u64> = vec![0];
    let mut acc_mod = 1u64;
    for &(p, e) in r.factors() {
        let pe = p.pow(e);
        let local = roots_prime_power(target % pe, p, e, pe);
        if local.is_empty() {
            roots.clear();
            break;
        }
        let mut next = Vec::with_capacity(roots.len() * local.len());
        for &a in &roots {
            for &b in &local {
                let c = crt_combine(&[
                    ResidueClass::from_reduced(a, acc_mod),
                    ResidueClass::from_reduced(b, pe),
                ])?;
                next.push(c.value());
            }
        }
        roots = next;
        acc_mod *= pe;
    }
    roots.sort_unstable();
    Ok(SquareRootSet {
        target,
        modulus: r.clone(),
        roots,
    })
}

/// Table of root sets for every residue `s` modulo `r`, indexed by `s`.
/// Built from one pass over `k`, so it is an independent route to the same
/// sets as repeated [`sqrt_mod`] calls.
pub fn root_table(r: u64) -> Vec<Vec<u64>> {
    let mut table = vec![Vec::new(); r as usize];
    for k in 0..r {
        table[mul_mod(k, k, r) as usize].push(k);
    }
    table
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute(s: i64, r: u64) -> Vec<u64> {
        let t = reduce(s, r);
        (0..r).filter(|&k| mul_mod(k, k, r) == t).collect()
    }

    #[test]
    fn prime_examples() {
        assert_eq!(sqrt_mod_prime(0, 7).unwrap().roots(), &[0]);
        assert_eq!(sqrt_mod_prime(4, 7).unwrap().roots(), &[2, 5]);
        assert!(sqrt_mod_prime(3, 7).unwrap().is_empty());
        assert_eq!(sqrt_mod_prime(4, 8), Err(Error::EvenModulus(8)));
        assert_eq!(sqrt_mod_prime(4, 9), Err(Error::NotPrime(9)));
    }

    #[test]
    fn prime_matches_brute_force() {
        for p in (3..600u64).filter(|&p| is_prime(p)) {
            for s in 0..p as i64 {
                let got = sqrt_mod_prime(s, p).unwrap();
                assert_eq!(got.roots(), brute(s, p).as_slice(), "s={s} p={p}");
                if got.len() == 1 {
                    assert_eq!(s, 0);
                }
            }
        }
    }

    #[test]
    fn tonelli_handles_large_two_adic_part() {
        // p - 1 = 2^6 * 3 * 5 * 17 * ... style primes stress the inner loop
        for p in [7681u64, 12289, 40961, 65537, 786433] {
            for a in [2u64, 3, 5, 10, 1234] {
                let a = mul_mod(a, a, p);
                let r = tonelli_shanks(a, p);
                assert_eq!(mul_mod(r, r, p), a);
            }
        }
    }

    #[test]
    fn prime_power_examples() {
        assert_eq!(sqrt_mod_prime_power(4, 3, 2).unwrap().roots(), &[2, 7]);
        assert_eq!(sqrt_mod_prime_power(0, 3, 2).unwrap().roots(), &[0, 3, 6]);
        assert!(sqrt_mod_prime_power(3, 3, 2).unwrap().is_empty());
    }

    #[test]
    fn prime_power_matches_brute_force() {
        for (p, emax) in [(3u64, 7u32), (5, 5), (7, 4), (11, 3), (13, 3)] {
            for e in 1..=emax {
                let pe = p.pow(e);
                for s in 0..pe as i64 {
                    let got = sqrt_mod_prime_power(s, p, e).unwrap();
                    assert_eq!(got.roots(), brute(s, pe).as_slice(), "s={s} p^e={p}^{e}");
                }
            }
        }
    }

    #[test]
    fn composite_examples() {
        let r = FactoredModulus::new(15).unwrap();
        assert_eq!(sqrt_mod(4, &r).unwrap().roots(), &[2, 7, 8, 13]);
        let one = FactoredModulus::new(1).unwrap();
        assert_eq!(sqrt_mod(12345, &one).unwrap().roots(), &[0]);
        for n in (3..400u64).step_by(2) {
            let r = FactoredModulus::new(n).unwrap();
            let set = sqrt_mod(1, &r).unwrap();
            assert!(set.roots().contains(&1) && set.roots().contains(&(n - 1)));
        }
        assert_eq!(
            sqrt_mod(1, &FactoredModulus::new(10).unwrap()),
            Err(Error::EvenModulus(10))
        );
    }

    #[test]
    fn negative_targets_reduce() {
        let r = FactoredModulus::new(35).unwrap();
        assert_eq!(sqrt_mod(-1, &r).unwrap().roots(), brute(-1, 35).as_slice());
        assert_eq!(sqrt_mod(-6, &r).unwrap().roots(), brute(-6, 35).as_slice());
    }

    #[test]
    fn table_agrees_with_sqrt_mod() {
        for n in [1u64, 9, 45, 105, 243, 675] {
            let r = FactoredModulus::new(n).unwrap();
            let table = root_table(n);
            for s in 0..n {
                assert_eq!(
                    sqrt_mod(s as i64, &r).unwrap().roots(),
                    table[s as usize].as_slice()
                );
            }
        }
    }
}
