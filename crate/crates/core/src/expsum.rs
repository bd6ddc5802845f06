//! Complete mixed exponential sums to odd moduli.
//!
//! The central object is
//!
//! ```text
//! E_j(g0, g4, l1, a, f4, f5, f6, f7, v; r) =
//!     sum_{n mod r} (j g0 l1 P(n) | r) e((-j l1 a inv(4 g0 P(n)) + v n) / r),
//!     P(n) = (f5 g4 l1 + f6 n)(f7 g4 l1 - f4 n),
//! ```
//!
//! together with its factorization over the prime powers of `r`, the prime
//! power sums `S(chi, g, f, p^m)` it factors into, and the critical-point data
//! that controls their size.

use crate::arith::{
    gcd, gcd_i, inv_residue, is_prime, jacobi_odd, mul_mod, pow_mod, reduce, sub_mod, valuation,
    FactoredModulus,
};
use crate::error::{invalid, Error, Result};
use crate::phase::{unit, CompensatedSum};
use num_complex::Complex64;
use rand::Rng;

/// `(5/4)^5`, the cap on the multiplicity factor in the prime-power bound.
pub const LAMBDA: f64 = 3.0517578125;

/// Parameters of `E_j` and the modulus it is taken over.
///
/// Only residues modulo `modulus` matter, so coefficients may be given
/// unreduced. `j`, `g0` and `l1` must be coprime to the modulus.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExpSumParams {
    pub j: i64,
    pub g0: i64,
    pub g4: i64,
    pub l1: i64,
    pub a: i64,
    pub f4: i64,
    pub f5: i64,
    pub f6: i64,
    pub f7: i64,
    pub v: i64,
    pub modulus: FactoredModulus,
}

impl ExpSumParams {
    pub fn validate(&self) -> Result<()> {
        self.modulus.require_odd()?;
        let n = self.modulus.n();
        for (name, x) in [("j", self.j), ("g0", self.g0), ("l1", self.l1)] {
            if gcd_i(x, n) != 1 {
                return invalid(format!("{name} = {x} is not coprime to the modulus {n}"));
            }
        }
        Ok(())
    }

    /// Whether `f4 f5 + f6 f7 = 1`, the relation under which the quadratic
    /// `P` has discriminant `(g4 l1)^2`.
    pub fn satisfies_relation(&self) -> bool {
        self.f4 as i128 * self.f5 as i128 + self.f6 as i128 * self.f7 as i128 == 1
    }

    /// Same coefficients over another modulus.
    pub fn with_modulus(&self, modulus: FactoredModulus) -> Self {
        ExpSumParams {
            modulus,
            ..self.clone()
        }
    }
}

/// Completes `(f4, f6)` to `(f5, f7)` with `f4 f5 + f6 f7 = 1`.
pub fn solve_relation(f4: i64, f6: i64) -> Result<(i64, i64)> {
    if f6 == 0 {
        return match f4 {
            1 | -1 => Ok((f4, 0)),
            _ => invalid("f6 = 0 requires f4 = +-1"),
        };
    }
    let m = f6.unsigned_abs();
    let f5 = match inv_residue(reduce(f4, m), m) {
        Some(x) => x as i64,
        None => return Err(Error::NotCoprime(f4.unsigned_abs(), m)),
    };
    let rest = 1i128 - f4 as i128 * f5 as i128;
    debug_assert_eq!(rest % f6 as i128, 0);
    let f7 = i64::try_from(rest / f6 as i128).map_err(|_| Error::Invalid("f7 overflows".into()))?;
    Ok((f5, f7))
}

fn random_unit<R: Rng + ?Sized>(rng: &mut R, n: u64) -> i64 {
    if n == 1 {
        return 1;
    }
    loop {
        let x = rng.random_range(1..n);
        if gcd(x, n) == 1 {
            return x as i64;
        }
    }
}

/// Random parameters satisfying [`ExpSumParams::validate`] and the relation
/// `f4 f5 + f6 f7 = 1`. `a` and `v` are uniform modulo `n`.
pub fn sample_params<R: Rng + ?Sized>(rng: &mut R, modulus: FactoredModulus) -> ExpSumParams {
    let n = modulus.n();
    let f6 = rng.random_range(1..=999i64) * if rng.random_bool(0.5) { 1 } else { -1 };
    let f4 = loop {
        let f4 = rng.random_range(-999..=999i64);
        if gcd(f4.unsigned_abs(), f6.unsigned_abs()) == 1 {
            break f4;
        }
    };
    let (f5, f7) = solve_relation(f4, f6).expect("coprime pair");
    ExpSumParams {
        j: random_unit(rng, n),
        g0: random_unit(rng, n),
        g4: rng.random_range(1..=60),
        l1: random_unit(rng, n),
        a: rng.random_range(0..n) as i64,
        f4,
        f5,
        f6,
        f7,
        v: rng.random_range(0..n) as i64,
        modulus,
    }
}

/// Direct evaluation of `E_j` as a compensated sum over `n mod r`.
pub fn esum_eval(params: &ExpSumParams) -> Result<Complex64> {
    params.validate()?;
    let r = params.modulus.n();
    if r == 1 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let red = |x: i64| reduce(x, r);
    let gl = mul_mod(red(params.g4), red(params.l1), r);
    let c5 = mul_mod(red(params.f5), gl, r);
    let c7 = mul_mod(red(params.f7), gl, r);
    let (f4, f6, v) = (red(params.f4), red(params.f6), red(params.v));
    let jl = mul_mod(red(params.j), red(params.l1), r);
    let twist = mul_mod(jl, red(params.g0), r);
    let num = sub_mod(0, mul_mod(jl, red(params.a), r), r);
    let four_g0 = mul_mod(4, red(params.g0), r);
    let mut acc = CompensatedSum::new();
    for n in 0..r {
        let p = mul_mod(
            (c5 + mul_mod(f6, n, r)) % r,
            sub_mod(c7, mul_mod(f4, n, r), r),
            r,
        );
        let sign = jacobi_odd(mul_mod(twist, p, r), r);
        if sign == 0 {
            continue;
        }
        let inv = inv_residue(mul_mod(four_g0, p, r), r).expect("unit argument");
        let phase = (mul_mod(num, inv, r) + mul_mod(v, n, r)) % r;
        let z = unit(phase, r);
        acc.add(if sign > 0 { z } else { -z });
    }
    Ok(acc.value())
}

/// Parameters of the factor over `q1` in the splitting of the modulus
/// `q1 q2`: `a` becomes `a inv(q2)`, `f4` and `f6` are multiplied by `q2`.
pub fn localize(params: &ExpSumParams, q1: u64, q2: u64) -> Result<ExpSumParams> {
    let inv = inv_residue(q2 % q1, q1).ok_or(Error::NotCoprime(q1, q2))?;
    let q2r = q2 % q1;
    let scale = |x: i64, by: u64| mul_mod(reduce(x, q1), by, q1) as i64;
    Ok(ExpSumParams {
        a: scale(params.a, inv),
        f4: scale(params.f4, q2r),
        f6: scale(params.f6, q2r),
        modulus: FactoredModulus::new(q1)?,
        ..params.clone()
    })
}

/// Evaluates both sides of the splitting `E(q1 q2) = E_loc(q1) E_loc(q2)`.
/// Returns `(lhs, rhs, |lhs - rhs|)`.
pub fn esum_multiplicativity_check(
    params: &ExpSumParams,
    q1: u64,
    q2: u64,
) -> Result<(Complex64, Complex64, f64)> {
    params.validate()?;
    let n = params.modulus.n();
    if q1.checked_mul(q2) != Some(n) {
        return invalid(format!("{q1} * {q2} does not equal the modulus {n}"));
    }
    if gcd(q1, q2) != 1 {
        return Err(Error::NotCoprime(q1, q2));
    }
    let lhs = esum_eval(params)?;
    let rhs = esum_eval(&localize(params, q1, q2)?)? * esum_eval(&localize(params, q2, q1)?)?;
    Ok((lhs, rhs, (lhs - rhs).norm()))
}

/// One prime-power factor of the full factorization of `E_j`.
#[derive(Clone, Debug)]
pub struct LocalFactor {
    pub prime: u64,
    pub exponent: u32,
    /// `r / p^m`.
    pub cofactor: u64,
    pub params: ExpSumParams,
    pub value: Complex64,
}

/// `E_j(r)` as the product over `p^m || r` of the localized sums with
/// cofactor `q = r / p^m`. Returns the factors and their product.
pub fn product_decomposition(params: &ExpSumParams) -> Result<(Vec<LocalFactor>, Complex64)> {
    params.validate()?;
    let n = params.modulus.n();
    let mut factors = Vec::new();
    let mut product = Complex64::new(1.0, 0.0);
    for &(p, e) in params.modulus.factors() {
        let pe = p.pow(e);
        let local = localize(params, pe, n / pe)?;
        let value = esum_eval(&local)?;
        product *= value;
        factors.push(LocalFactor {
            prime: p,
            exponent: e,
            cofactor: n / pe,
            params: local,
            value,
        });
    }
    Ok((factors, product))
}

/// The prime-power sum
/// `S = sum_{x mod p^m} chi(g(x)) e_{p^m}(f(x))` with `chi = (. | p^m)`,
/// `g = j g0 l1 / F`, `f = -j l1 a / (4 g0 q F) + v x` and
/// `F(x) = (f5 g4 l1 + f6 q x)(f7 g4 l1 - f4 q x)`. Terms with `p | F(x)` are
/// omitted.
#[derive(Clone, Debug)]
pub struct MixedSum {
    p: u64,
    m: u32,
    q: u64,
    params: ExpSumParams,
}

impl MixedSum {
    /// `params.modulus` must be a prime power `p^m` with `m >= 1`, and `q`
    /// coprime to `p`.
    pub fn new(params: &ExpSumParams, q: u64) -> Result<Self> {
        params.validate()?;
        let (p, m) = match params.modulus.factors() {
            [(p, m)] => (*p, *m),
            _ => return invalid(format!("modulus {} is not a prime power", params.modulus)),
        };
        if q.is_multiple_of(p) {
            return Err(Error::NotCoprime(q, p));
        }
        Ok(MixedSum {
            p,
            m,
            q,
            params: params.clone(),
        })
    }

    /// The factor at `p` of `E_j` over a composite modulus, keeping the
    /// original coefficients and moving the cofactor into `q`.
    pub fn local(params: &ExpSumParams, p: u64) -> Result<Self> {
        params.validate()?;
        let &(_, m) = params
            .modulus
            .factors()
            .iter()
            .find(|&&(pp, _)| pp == p)
            .ok_or_else(|| Error::Invalid(format!("{p} does not divide {}", params.modulus)))?;
        let pm = p.pow(m);
        Self::new(
            &params.with_modulus(FactoredModulus::prime_power(p, m)?),
            params.modulus.n() / pm,
        )
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn params(&self) -> &ExpSumParams {
        &self.params
    }

    pub fn modulus(&self) -> u64 {
        self.params.modulus.n()
    }

    fn terms(&self) -> TermEvaluator {
        let pm = self.modulus();
        let red = |x: i64| reduce(x, pm);
        let pr = &self.params;
        let q = self.q % pm;
        let gl = mul_mod(red(pr.g4), red(pr.l1), pm);
        TermEvaluator {
            p: self.p,
            pm,
            lin: [
                mul_mod(red(pr.f5), gl, pm),
                mul_mod(red(pr.f6), q, pm),
                mul_mod(red(pr.f7), gl, pm),
                mul_mod(red(pr.f4), q, pm),
            ],
            twist: mul_mod(mul_mod(red(pr.j), red(pr.g0), pm), red(pr.l1), pm),
            num: sub_mod(
                0,
                mul_mod(mul_mod(red(pr.j), red(pr.l1), pm), red(pr.a), pm),
                pm,
            ),
            den: mul_mod(mul_mod(4, red(pr.g0), pm), q, pm),
            v: red(pr.v),
        }
    }
}

struct TermEvaluator {
    p: u64,
    pm: u64,
    lin: [u64; 4],
    twist: u64,
    num: u64,
    den: u64,
    v: u64,
}

impl TermEvaluator {
    fn term(&self, x: u64) -> Option<Complex64> {
        let pm = self.pm;
        let [c5, b, c7, d] = self.lin;
        let f = mul_mod(
            (c5 + mul_mod(b, x, pm)) % pm,
            sub_mod(c7, mul_mod(d, x, pm), pm),
            pm,
        );
        if f.is_multiple_of(self.p) {
            return None;
        }
        let chi = jacobi_odd(mul_mod(self.twist, f, pm), pm);
        let inv = inv_residue(mul_mod(self.den, f, pm), pm)?;
        let phase = (mul_mod(self.num, inv, pm) + mul_mod(self.v, x % pm, pm)) % pm;
        let z = unit(phase, pm);
        Some(if chi > 0 { z } else { -z })
    }
}

pub fn mixed_sum_eval(sum: &MixedSum) -> Complex64 {
    let ev = sum.terms();
    let mut acc = CompensatedSum::new();
    for x in 1..=ev.pm {
        if let Some(z) = ev.term(x) {
            acc.add(z);
        }
    }
    acc.value()
}

/// The part of [`mixed_sum_eval`] with `x = alpha (mod p)`.
pub fn partial_sum_alpha(sum: &MixedSum, alpha: u64) -> Complex64 {
    let ev = sum.terms();
    let p = sum.p;
    let mut acc = CompensatedSum::new();
    let mut x = alpha % p;
    while x < ev.pm {
        if let Some(z) = ev.term(x) {
            acc.add(z);
        }
        x += p;
    }
    acc.value()
}

/// Critical-point data of a prime-power sum `S(chi, g, f, p^m)`.
///
/// With `D = R g f' + c g'`, `t = ord_p(D)` and `C = p^-t D`, the critical
/// points are the `alpha mod p` with `F(alpha)` a unit and `C(alpha) = 0`;
/// the multiplicity is the order of vanishing of the numerator of `C` at
/// `alpha`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CochraneContext {
    pub p: u64,
    pub m: u32,
    /// Primitive root modulo `p^2`.
    pub primitive_root: u64,
    /// `r` in `root^(p-1) = 1 + r p (mod p^2)`, reduced into `[0, p)`.
    pub r_resid: u64,
    /// `R mod p`, which equals `r mod p`.
    pub r_mod_p: u64,
    /// `chi(root^k) = e(c k / phi(p^m))`, `0 < c <= phi(p^m)`.
    pub c: u64,
    pub t: u32,
    /// `min(ord_p a, ord_p v)`, capped at `m`.
    pub t_prime: u32,
    /// `ord_p F'`, capped at `m + 1`.
    pub f_prime_order: u32,
    /// `p` divides every coefficient of `F`; the sum has no terms.
    pub empty: bool,
    /// `(alpha, multiplicity)`, ascending in `alpha`. Only computed when
    /// `t <= m - 1`.
    pub critical_points: Vec<(u64, u32)>,
}

impl CochraneContext {
    pub fn multiplicity(&self, alpha: u64) -> Option<u32> {
        self.critical_points
            .iter()
            .find(|&&(a, _)| a == alpha % self.p)
            .map(|&(_, nu)| nu)
    }

    /// Whether `t <= m - 2`, the range where off-critical classes vanish and
    /// the per-class bound applies.
    pub fn in_range(&self) -> bool {
        !self.empty && self.t + 2 <= self.m
    }
}

fn prime_factors(n: u64) -> Vec<u64> {
    FactoredModulus::new(n)
        .map(|f| f.factors().iter().map(|&(p, _)| p).collect())
        .unwrap_or_default()
}

fn is_primitive_mod_p(g: u64, p: u64, qs: &[u64]) -> bool {
    !g.is_multiple_of(p) && qs.iter().all(|&q| pow_mod(g, (p - 1) / q, p) != 1)
}

/// Least primitive root modulo `p`, replaced by `g + p` when
/// `g^(p-1) = 1 (mod p^2)`; the result generates the units modulo `p^2`.
pub fn primitive_root_p2(p: u64) -> Result<u64> {
    if p.is_multiple_of(2) {
        return Err(Error::EvenModulus(p));
    }
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    let qs = prime_factors(p - 1);
    let g = (2..p).find(|&g| is_primitive_mod_p(g, p, &qs)).unwrap_or(1);
    let p2 = p * p;
    Ok(if pow_mod(g, p - 1, p2) == 1 { g + p } else { g })
}

/// Multiplicative order of `g` modulo `p^2`, by factoring `p (p - 1)`.
fn order_mod_p2(g: u64, p: u64) -> u64 {
    let p2 = p * p;
    let mut ord = p * (p - 1);
    for q in prime_factors(ord) {
        while ord.is_multiple_of(q) && pow_mod(g, ord / q, p2) == 1 {
            ord /= q;
        }
    }
    ord
}

type Poly = Vec<u64>;

fn poly_mul(a: &[u64], b: &[u64], m: u64) -> Poly {
    let mut out = vec![0; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (k, &y) in b.iter().enumerate() {
            out[i + k] = (out[i + k] + mul_mod(x, y, m)) % m;
        }
    }
    out
}

fn poly_scale(a: &[u64], s: u64, m: u64) -> Poly {
    a.iter().map(|&x| mul_mod(x, s, m)).collect()
}

fn poly_add(a: &[u64], b: &[u64], m: u64) -> Poly {
    (0..a.len().max(b.len()))
        .map(|i| (a.get(i).copied().unwrap_or(0) + b.get(i).copied().unwrap_or(0)) % m)
        .collect()
}

fn poly_derivative(a: &[u64], m: u64) -> Poly {
    if a.len() <= 1 {
        return vec![0];
    }
    a.iter()
        .enumerate()
        .skip(1)
        .map(|(i, &x)| mul_mod(i as u64 % m, x, m))
        .collect()
}

fn poly_eval(a: &[u64], x: u64, m: u64) -> u64 {
    a.iter()
        .rev()
        .fold(0, |acc, &c| (mul_mod(acc, x, m) + c) % m)
}

/// Smallest `p`-adic valuation among coefficients known modulo `p^cap`;
/// `cap` for the zero polynomial.
fn poly_ord(a: &[u64], p: u64, cap: u32) -> u32 {
    a.iter()
        .filter(|&&x| x != 0)
        .map(|&x| valuation(x, p).min(cap))
        .min()
        .unwrap_or(cap)
}

/// Order of vanishing of `a` at `alpha` over `F_p`, by repeated synthetic
/// division. `a` must not be the zero polynomial mod `p`.
fn vanishing_order(a: &[u64], alpha: u64, p: u64) -> u32 {
    let mut cur: Poly = a.iter().map(|&x| x % p).collect();
    let mut nu = 0;
    while cur.len() > 1 {
        // divide by (x - alpha): coefficients from the top down
        let mut quot = vec![0; cur.len() - 1];
        let mut carry = 0;
        for i in (0..cur.len()).rev() {
            let val = (cur[i] + mul_mod(carry, alpha, p)) % p;
            if i == 0 {
                if val != 0 {
                    return nu;
                }
            } else {
                quot[i - 1] = val;
                carry = val;
            }
        }
        nu += 1;
        cur = quot;
    }
    nu
}

/// [`CochraneContext`] with the default primitive root of
/// [`primitive_root_p2`].
pub fn critical_points(sum: &MixedSum) -> Result<CochraneContext> {
    critical_points_with_root(sum, primitive_root_p2(sum.p)?)
}

/// [`CochraneContext`] for a caller-chosen primitive root modulo `p^2`.
pub fn critical_points_with_root(sum: &MixedSum, root: u64) -> Result<CochraneContext> {
    let (p, m) = (sum.p, sum.m);
    let p2 = p * p;
    let root = root % p2;
    if order_mod_p2(root, p) != p * (p - 1) {
        return invalid(format!("{root} is not a primitive root modulo {p2}"));
    }
    let big = p
        .checked_pow(m + 1)
        .filter(|&x| x <= 1 << 62)
        .ok_or(Error::TooLarge {
            value: p,
            limit: 1 << 62,
        })?;
    let r_resid = (pow_mod(root, p - 1, p2) - 1) / p;
    let r_mod_p = r_resid % p;

    // the character (. | p)^m is quadratic for odd m and principal for even m
    let phi = (p - 1) * p.pow(m - 1);
    let c = if m % 2 == 1 { phi / 2 } else { phi };

    let pr = &sum.params;
    let red = |x: i64| reduce(x, big);
    let q = sum.q % big;
    let gl = mul_mod(red(pr.g4), red(pr.l1), big);
    let lin1 = [mul_mod(red(pr.f5), gl, big), mul_mod(red(pr.f6), q, big)];
    let lin2 = [
        mul_mod(red(pr.f7), gl, big),
        sub_mod(0, mul_mod(red(pr.f4), q, big), big),
    ];
    let f = poly_mul(&lin1, &lin2, big);
    let fp = poly_derivative(&f, big);

    let ord_of = |x: i64| {
        let r = reduce(x, p.pow(m));
        if r == 0 {
            m
        } else {
            valuation(r, p).min(m)
        }
    };
    let t_prime = ord_of(pr.a).min(ord_of(pr.v));
    let f_prime_order = poly_ord(&fp, p, m + 1);
    let empty = f.iter().all(|&x| x % p == 0);
    let mut ctx = CochraneContext {
        p,
        m,
        primitive_root: root,
        r_resid,
        r_mod_p,
        c,
        t: m,
        t_prime,
        f_prime_order,
        empty,
        critical_points: Vec::new(),
    };
    if empty {
        return Ok(ctx);
    }

    // f' = N_f / (4 g0 q F^2) with N_f = j l1 a F' + 4 g0 q v F^2
    let jl = mul_mod(red(pr.j), red(pr.l1), big);
    let four_g0_q = mul_mod(mul_mod(4, red(pr.g0), big), q, big);
    let f_sq = poly_mul(&f, &f, big);
    let n_f = poly_add(
        &poly_scale(&fp, mul_mod(jl, red(pr.a), big), big),
        &poly_scale(&f_sq, mul_mod(four_g0_q, red(pr.v), big), big),
        big,
    );
    let ord_c = valuation(c, p);
    let t = poly_ord(&n_f, p, m + 1).min(ord_c + f_prime_order);
    ctx.t = t;
    if t + 1 > m {
        return Ok(ctx);
    }

    // D = j l1 / (4 q F^3) * (R N_f - 4 g0 q c F F'); C's numerator mod p is
    // R (N_f / p^t) - 4 g0 q (c F F' / p^t).
    let pt = p.pow(t);
    let cffp = poly_scale(&poly_mul(&f, &fp, big), c % big, big);
    let numer: Poly = n_f
        .iter()
        .zip(cffp.iter().chain(std::iter::repeat(&0)))
        .map(|(&nf, &x)| {
            debug_assert!(nf % pt == 0 && x % pt == 0);
            let a = mul_mod(r_mod_p, (nf / pt) % p, p);
            let b = mul_mod(four_g0_q % p, (x / pt) % p, p);
            sub_mod(a, b, p)
        })
        .collect();
    if numer.iter().all(|&x| x == 0) {
        return invalid("critical numerator vanishes identically modulo p");
    }
    ctx.critical_points = (0..p)
        .filter(|&alpha| !poly_eval(&f, alpha, p).is_multiple_of(p))
        .filter_map(|alpha| {
            let nu = vanishing_order(&numer, alpha, p);
            (nu > 0).then_some((alpha, nu))
        })
        .collect();
    Ok(ctx)
}

/// `min(nu, LAMBDA) p^(t/(nu+1)) p^(m (1 - 1/(nu+1)))`.
pub fn cochrane_bound(ctx: &CochraneContext, nu: u32) -> f64 {
    let p = ctx.p as f64;
    let k = nu as f64 + 1.0;
    (nu as f64).min(LAMBDA) * p.powf(ctx.t as f64 / k) * p.powf(ctx.m as f64 * (1.0 - 1.0 / k))
}

/// `3 sqrt(p) gcd(p, g4)^(1/2)`, the bound for the sums to prime modulus.
pub fn perelmuter_bound(p: u64, g4: i64) -> f64 {
    3.0 * (p as f64).sqrt() * (gcd_i(g4, p) as f64).sqrt()
}

/// Size predicted for one prime-power factor up to a constant:
/// `sqrt(p) gcd(p, g4)^(1/2)` when `m = 1`, else `gcd(a, v, p^m)^(1/4) p^(3m/4)`.
pub fn local_shape_bound(sum: &MixedSum) -> f64 {
    let p = sum.p as f64;
    if sum.m == 1 {
        return p.sqrt() * (gcd_i(sum.params.g4, sum.p) as f64).sqrt();
    }
    let pm = sum.modulus();
    let g = gcd(gcd_i(sum.params.a, pm), gcd_i(sum.params.v, pm));
    (g as f64).powf(0.25) * p.powf(0.75 * sum.m as f64)
}

/// `|E_j|` against `g4^(1/2) r3^(1/2) gcd(a, v, r4)^(1/4) r4^(3/4)`, where
/// `r3` and `r4` are the squarefree and squarefull parts of the modulus.
/// Returns `(measured, bound, measured / bound)`.
pub fn esum_bound_check(params: &ExpSumParams) -> Result<(f64, f64, f64)> {
    let bound = esum_size_bound(params)?;
    let measured = esum_eval(params)?.norm();
    Ok((measured, bound, measured / bound))
}

/// `|g4|^1/2 r3^1/2 gcd(a, v, r4)^1/4 r4^3/4`, the bound of [`esum_bound_check`].
pub fn esum_size_bound(params: &ExpSumParams) -> Result<f64> {
    if params.g4 == 0 {
        return invalid("g4 must be nonzero");
    }
    let r3 = params.modulus.squarefree_part() as f64;
    let r4 = params.modulus.squarefull_part();
    let g = gcd(gcd_i(params.a, r4), gcd_i(params.v, r4));
    Ok((params.g4.unsigned_abs() as f64).sqrt()
        * r3.sqrt()
        * (g as f64).powf(0.25)
        * (r4 as f64).powf(0.75))
}

fn with_valuation<R: Rng + ?Sized>(rng: &mut R, p: u64, m: u32, k: u32) -> i64 {
    let pm = p.pow(m);
    if k >= m {
        return 0;
    }
    let unit = loop {
        let u = rng.random_range(1..pm);
        if u % p != 0 {
            break u;
        }
    };
    ((unit * p.pow(k)) % pm) as i64
}

/// Random parameters over `p^m` with a cofactor `q` coprime to `p`. The
/// `p`-adic orders of `a` and `v` are drawn so that `min(ord a, ord v) <= m - 2`
/// when `m >= 2`, and `g4` picks up a factor `p` one time in five.
pub fn sample_local_params<R: Rng + ?Sized>(
    rng: &mut R,
    p: u64,
    m: u32,
) -> Result<(ExpSumParams, u64)> {
    let mut pr = sample_params(rng, FactoredModulus::prime_power(p, m)?);
    let top = m.saturating_sub(2);
    let ka = rng.random_range(0..=m);
    let kv = if ka <= top {
        rng.random_range(0..=m)
    } else {
        rng.random_range(0..=top)
    };
    pr.a = with_valuation(rng, p, m, ka);
    pr.v = with_valuation(rng, p, m, kv);
    if rng.random_bool(0.2) {
        pr.g4 *= p as i64;
    }
    let q = loop {
        let q = rng.random_range(1..500u64) | 1;
        if q % p != 0 {
            break q;
        }
    };
    Ok((pr, q))
}

/// Shape of a prime-modulus sum after an affine change of variable.
///
/// Every sum over `p` equals, up to a unimodular factor,
/// `sum_y chi(s(y)) e((A inv(s(y)) + v y) / p)` for one of the shapes
/// `s(y) = y(y - 1)`, `y` or `y^2`; the terms with `s(y) = 0` are omitted.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GroundShape {
    /// `F` vanishes identically modulo `p`.
    Empty,
    /// `F` is a nonzero constant.
    Constant {
        v: u64,
    },
    Linear {
        a: u64,
        v: u64,
    },
    Square {
        a: u64,
        v: u64,
    },
    Split {
        a: u64,
        v: u64,
    },
}

/// Normal form of a [`MixedSum`] with `m = 1`.
pub fn ground_shape(sum: &MixedSum) -> Result<GroundShape> {
    if sum.m != 1 {
        return invalid("normal forms are defined for prime moduli");
    }
    let p = sum.p;
    let pr = &sum.params;
    let red = |x: i64| reduce(x, p);
    let inv = |x: u64| inv_residue(x % p, p).expect("unit");
    let q = sum.q % p;
    let gl = mul_mod(red(pr.g4), red(pr.l1), p);
    let (c5, b) = (mul_mod(red(pr.f5), gl, p), mul_mod(red(pr.f6), q, p));
    let (c7, d) = (mul_mod(red(pr.f7), gl, p), mul_mod(red(pr.f4), q, p));
    // F = (c5 + b x)(c7 - d x) = f2 x^2 + f1 x + f0
    let f2 = sub_mod(0, mul_mod(b, d, p), p);
    let f1 = sub_mod(mul_mod(b, c7, p), mul_mod(c5, d, p), p);
    let f0 = mul_mod(c5, c7, p);
    let k = mul_mod(
        mul_mod(mul_mod(red(pr.j), red(pr.l1), p), red(pr.a), p),
        inv(mul_mod(mul_mod(4, red(pr.g0), p), q, p)),
        p,
    );
    let v = red(pr.v);
    let neg = |x: u64| sub_mod(0, x, p);
    if f2 == 0 {
        return Ok(match (f1, f0) {
            (0, 0) => GroundShape::Empty,
            (0, _) => GroundShape::Constant { v },
            _ => GroundShape::Linear {
                a: neg(mul_mod(k, inv(f1), p)),
                v,
            },
        });
    }
    let rho1 = neg(mul_mod(c5, inv(b), p));
    let rho2 = mul_mod(c7, inv(d), p);
    if rho1 == rho2 {
        return Ok(GroundShape::Square {
            a: neg(mul_mod(k, inv(f2), p)),
            v,
        });
    }
    let dist = sub_mod(rho2, rho1, p);
    let a = neg(mul_mod(k, inv(mul_mod(f2, mul_mod(dist, dist, p), p)), p));
    Ok(GroundShape::Split {
        a,
        v: mul_mod(v, dist, p),
    })
}

fn shape_value(shape: &GroundShape, y: u64, p: u64) -> u64 {
    match shape {
        GroundShape::Linear { .. } => y,
        GroundShape::Square { .. } => mul_mod(y, y, p),
        GroundShape::Split { .. } => mul_mod(y, sub_mod(y, 1, p), p),
        GroundShape::Empty => 0,
        GroundShape::Constant { .. } => 1,
    }
}

/// The normal-form sum of `shape` modulo `p`.
pub fn ground_shape_sum(shape: &GroundShape, p: u64) -> Complex64 {
    let (a, v) = match *shape {
        GroundShape::Empty => return Complex64::new(0.0, 0.0),
        GroundShape::Constant { v } => {
            return Complex64::new(if v % p == 0 { p as f64 } else { 0.0 }, 0.0)
        }
        GroundShape::Linear { a, v }
        | GroundShape::Square { a, v }
        | GroundShape::Split { a, v } => (a, v),
    };
    let mut acc = CompensatedSum::new();
    for y in 0..p {
        let s = shape_value(shape, y, p);
        if s == 0 {
            continue;
        }
        let z = unit(
            (mul_mod(a, inv_residue(s, p).expect("unit"), p) + mul_mod(v, y, p)) % p,
            p,
        );
        acc.add(if jacobi_odd(s, p) > 0 { z } else { -z });
    }
    acc.value()
}

/// Largest `|sum|` over all `(A, v)` modulo `p` for each shape.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GroundGrid {
    pub p: u64,
    pub split: f64,
    pub linear: f64,
    pub square: f64,
}

/// Exhausts the normal forms modulo the odd prime `p`: `3 p^2` sums of `p`
/// terms each, evaluated from shared tables.
pub fn ground_grid_max(p: u64) -> Result<GroundGrid> {
    if p.is_multiple_of(2) {
        return Err(Error::EvenModulus(p));
    }
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    let roots: Vec<Complex64> = (0..p).map(|k| unit(k, p)).collect();
    let shapes = [
        GroundShape::Split { a: 0, v: 0 },
        GroundShape::Linear { a: 0, v: 0 },
        GroundShape::Square { a: 0, v: 0 },
    ];
    let mut best = [0f64; 3];
    for (slot, shape) in shapes.iter().enumerate() {
        // (sign, inverse of s(y), y) for the surviving y
        let terms: Vec<(f64, u64, u64)> = (0..p)
            .filter_map(|y| {
                let s = shape_value(shape, y, p);
                (s != 0).then(|| (jacobi_odd(s, p) as f64, inv_residue(s, p).expect("unit"), y))
            })
            .collect();
        for a in 0..p {
            for v in 0..p {
                let mut acc = CompensatedSum::new();
                for &(sign, inv, y) in &terms {
                    acc.add(roots[((a * inv + v * y) % p) as usize] * sign);
                }
                best[slot] = best[slot].max(acc.value().norm());
            }
        }
    }
    Ok(GroundGrid {
        p,
        split: best[0],
        linear: best[1],
        square: best[2],
    })
}
