//! Farey fractions with square denominators in short intervals and the large
//! sieve with square moduli.
//!
//! `P(alpha)` counts the coprime pairs `(q, a)`, `1 <= q <= Q`, with
//! `|a / q^2 - alpha| <= Delta`. Targets and radii are exact rationals, so
//! boundary hits are decided without rounding.

use crate::arith::{factorize, gcd, FactoredModulus};
use crate::error::{invalid, Error, Result};
use crate::phase::{CompensatedSum, RootTable};
use num_complex::Complex64;
use num_rational::Ratio;
use rayon::prelude::*;

pub type Rational = Ratio<i128>;

/// Operation budget of the exact evaluators.
pub const OPS_LIMIT: u128 = 1_000_000_000;

/// Exact value of a finite `f64` as a fraction with a power-of-two
/// denominator.
pub fn rational_from_f64(x: f64) -> Result<Rational> {
    if !x.is_finite() {
        return invalid(format!("{x} is not finite"));
    }
    if x == 0.0 {
        return Ok(Rational::from_integer(0));
    }
    let bits = x.to_bits();
    let sign = if bits >> 63 == 1 { -1i128 } else { 1 };
    let raw_exp = ((bits >> 52) & 0x7ff) as i32;
    let frac = bits & ((1 << 52) - 1);
    let (mut mant, mut exp) = if raw_exp == 0 {
        (frac as i128, -1074)
    } else {
        ((frac | (1 << 52)) as i128, raw_exp - 1075)
    };
    let tz = mant.trailing_zeros() as i32;
    mant >>= tz;
    exp += tz;
    if exp >= 0 {
        if exp > 126 - 53 {
            return Err(Error::Invalid(format!(
                "{x} is too large for an exact fraction"
            )));
        }
        Ok(Rational::from_integer(sign * (mant << exp)))
    } else {
        if -exp > 120 {
            return Err(Error::Invalid(format!(
                "{x} is too small for an exact fraction"
            )));
        }
        Ok(Rational::new(sign * mant, 1i128 << -exp))
    }
}

/// `alpha = b / r + z`.
pub fn structural_alpha(b: i64, r: u64, z: Rational) -> Rational {
    Rational::new(b as i128, r as i128) + z
}

/// One evaluation of `P(alpha)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FareyQuery {
    pub q_max: u64,
    pub delta: Rational,
    pub alpha: Rational,
}

impl FareyQuery {
    pub fn new(q_max: u64, delta: Rational, alpha: Rational) -> Result<Self> {
        if q_max == 0 {
            return Err(Error::Zero);
        }
        if delta <= Rational::from_integer(0) {
            return invalid("Delta must be positive");
        }
        Ok(FareyQuery {
            q_max,
            delta,
            alpha,
        })
    }

    /// Query at `b / r + z` with `gcd(b, r) = 1` and `Delta <= z <= sqrt(Delta) / r`.
    pub fn structural(q_max: u64, delta: Rational, b: i64, r: u64, z: Rational) -> Result<Self> {
        if r == 0 {
            return Err(Error::Zero);
        }
        if gcd(b.unsigned_abs(), r) != 1 {
            return Err(Error::NotCoprime(b.unsigned_abs(), r));
        }
        if !z_in_range(z, delta, r) {
            return invalid(format!("z = {z} outside [Delta, sqrt(Delta)/r]"));
        }
        Self::new(q_max, delta, structural_alpha(b, r, z))
    }
}

/// `Delta <= z <= sqrt(Delta) / r`, decided exactly.
pub fn z_in_range(z: Rational, delta: Rational, r: u64) -> bool {
    let zr = z * Rational::from_integer(r as i128);
    z >= delta && zr * zr <= delta
}

/// Möbius data for every `q <= Q`, reused across many counts.
#[derive(Clone, Debug)]
pub struct FareyCounter {
    /// `squarefree[q - 1]` lists `(d, mu(d))` for `d | rad(q)`.
    squarefree: Vec<Vec<(i128, i8)>>,
}

impl FareyCounter {
    pub fn new(q_max: u64) -> Result<Self> {
        let mut squarefree = Vec::with_capacity(q_max as usize);
        for q in 1..=q_max {
            let mut divs = vec![(1i128, 1i8)];
            for &(p, _) in factorize(q)?.factors() {
                let len = divs.len();
                for i in 0..len {
                    let (d, mu) = divs[i];
                    divs.push((d * p as i128, -mu));
                }
            }
            squarefree.push(divs);
        }
        Ok(FareyCounter { squarefree })
    }

    pub fn q_max(&self) -> u64 {
        self.squarefree.len() as u64
    }

    /// Integers in `[lo, hi]` coprime to `q`.
    fn coprime_in(&self, q: u64, lo: i128, hi: i128) -> u64 {
        if hi < lo {
            return 0;
        }
        let total: i128 = self.squarefree[(q - 1) as usize]
            .iter()
            .map(|&(d, mu)| mu as i128 * (hi.div_euclid(d) - (lo - 1).div_euclid(d)))
            .sum();
        total as u64
    }

    /// `P(alpha)` with radius `delta`, for `q` up to `self.q_max()`.
    pub fn count(&self, alpha: Rational, delta: Rational) -> u64 {
        let (lo, hi) = (alpha - delta, alpha + delta);
        (1..=self.q_max())
            .map(|q| {
                let q2 = Rational::from_integer(q as i128 * q as i128);
                let a_lo = (lo * q2).ceil().to_integer();
                let a_hi = (hi * q2).floor().to_integer();
                self.coprime_in(q, a_lo, a_hi)
            })
            .sum()
    }
}

/// Exact `P(alpha)`.
pub fn farey_count(query: &FareyQuery) -> Result<u64> {
    Ok(FareyCounter::new(query.q_max)?.count(query.alpha, query.delta))
}

/// `max P(b / r + z)` over `Delta <= z <= sqrt(Delta) / r`, with a maximizing
/// `z`. `P` is a count of closed intervals in `z`, one per fraction, so the
/// maximum is attained at `z = Delta` or at a left endpoint
/// `a / q^2 - b / r - Delta` inside the range; all of these are evaluated.
pub fn max_count_over_z(
    counter: &FareyCounter,
    delta: Rational,
    b: i64,
    r: u64,
) -> Result<(u64, Rational)> {
    if gcd(b.unsigned_abs(), r) != 1 {
        return Err(Error::NotCoprime(b.unsigned_abs(), r));
    }
    if !z_in_range(delta, delta, r) {
        return invalid(format!("empty z-range: Delta > sqrt(Delta)/{r}"));
    }
    let z_points = breakpoints(counter.q_max(), delta, b, r)?;
    let base = Rational::new(b as i128, r as i128);
    let mut best = (counter.count(base + delta, delta), delta);
    for z in z_points {
        let c = counter.count(base + z, delta);
        if c > best.0 {
            best = (c, z);
        }
    }
    Ok(best)
}

/// Left endpoints `a / q^2 - b / r - Delta` (coprime `a`) lying in
/// `(Delta, sqrt(Delta) / r]`, ascending.
pub fn breakpoints(q_max: u64, delta: Rational, b: i64, r: u64) -> Result<Vec<Rational>> {
    let base = Rational::new(b as i128, r as i128);
    let approx = |x: Rational| *x.numer() as f64 / *x.denom() as f64;
    let zhi_f = approx(delta).sqrt() / r as f64;
    let budget: f64 = (1..=q_max).map(|q| (q * q) as f64 * zhi_f + 2.0).sum();
    if budget > OPS_LIMIT as f64 {
        return Err(Error::Oversize {
            ops: budget as u128,
            limit: OPS_LIMIT,
        });
    }
    let mut out = Vec::new();
    for q in 1..=q_max {
        let q2 = (q * q) as i128;
        let q2r = Rational::from_integer(q2);
        let start = ((base + delta + delta) * q2r).ceil().to_integer();
        let end = ((approx(base + delta) + zhi_f) * q2 as f64).floor() as i128 + 1;
        for a in start..=end {
            if gcd(a.unsigned_abs() as u64, q) != 1 {
                continue;
            }
            let z = Rational::new(a, q2) - base - delta;
            if z > delta && z_in_range(z, delta, r) {
                out.push(z);
            }
        }
    }
    out.sort();
    out.dedup();
    Ok(out)
}

/// Coefficients `a_n` for `M < n <= M + N`.
#[derive(Clone, Debug)]
pub struct LsInstance {
    pub q_max: u64,
    pub offset: i64,
    pub coeffs: Vec<Complex64>,
}

impl LsInstance {
    pub fn new(q_max: u64, offset: i64, coeffs: Vec<Complex64>) -> Result<Self> {
        if q_max == 0 || coeffs.is_empty() {
            return Err(Error::Zero);
        }
        Ok(LsInstance {
            q_max,
            offset,
            coeffs,
        })
    }

    /// `N`.
    pub fn len(&self) -> u64 {
        self.coeffs.len() as u64
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `Z = sum |a_n|^2`.
    pub fn z(&self) -> f64 {
        let mut acc = CompensatedSum::new();
        for c in &self.coeffs {
            acc.add(Complex64::new(c.norm_sqr(), 0.0));
        }
        acc.value().re
    }
}

/// `sum_{q <= Q} sum_{a mod k(q), (a, q) = 1} |sum_n a_n e(n a / k(q))|^2`.
fn quadform(inst: &LsInstance, q_max: u64, modulus: impl Fn(u64) -> u64 + Sync) -> Result<f64> {
    let n = inst.len() as u128;
    let ops: u128 = (1..=q_max as u128)
        .map(|q| modulus(q as u64) as u128)
        .sum::<u128>()
        * n;
    if ops > OPS_LIMIT {
        return Err(Error::Oversize {
            ops,
            limit: OPS_LIMIT,
        });
    }
    let per_q: Vec<f64> = (1..=q_max)
        .into_par_iter()
        .map(|q| {
            let k = modulus(q);
            let table = RootTable::new(k);
            let first = (inst.offset + 1).rem_euclid(k as i64) as u64;
            let mut acc = CompensatedSum::new();
            for a in 1..=k {
                if gcd(a, q) != 1 {
                    continue;
                }
                let mut inner = CompensatedSum::new();
                let mut idx = first * a % k;
                for c in &inst.coeffs {
                    inner.add(c * table.get(idx));
                    idx = (idx + a) % k;
                }
                acc.add(Complex64::new(inner.value().norm_sqr(), 0.0));
            }
            acc.value().re
        })
        .collect();
    let mut acc = CompensatedSum::new();
    for v in per_q {
        acc.add(Complex64::new(v, 0.0));
    }
    Ok(acc.value().re)
}

/// The square-moduli form `sum_{q <= Q} sum_{(a, q) = 1, a <= q^2} |sum a_n e(n a / q^2)|^2`.
/// Refuses instances with `N sum q^2` above [`OPS_LIMIT`].
pub fn ls_quadform_square_moduli(inst: &LsInstance) -> Result<f64> {
    quadform(inst, inst.q_max, |q| q * q)
}

/// The classical form over all moduli `q <= q_max`, which is at most
/// `(N + q_max^2 - 1) Z`.
pub fn ls_quadform_classical(inst: &LsInstance, q_max: u64) -> Result<f64> {
    quadform(inst, q_max, |q| q)
}

/// `N + Q^2 - 1`.
pub fn classical_bound(n: u64, q_max: u64) -> f64 {
    n as f64 + (q_max as f64).powi(2) - 1.0
}

/// Bounds for the square-moduli form per unit `Z`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LsBounds {
    /// `Q^3 + Q^2 N^1/2 + Q^1/2 N`.
    pub original: f64,
    /// `Q^3 + N + min(Q^2 N^1/2, Q^1/2 N)`.
    pub best_known: f64,
    /// `Q^3 + N`.
    pub conjecture: f64,
}

pub fn ls_bound_eval(q_max: u64, n: u64) -> Result<LsBounds> {
    if q_max == 0 || n == 0 {
        return Err(Error::Zero);
    }
    let (q, n) = (q_max as f64, n as f64);
    let a = q * q * n.sqrt();
    let b = q.sqrt() * n;
    Ok(LsBounds {
        original: q.powi(3) + a + b,
        best_known: q.powi(3) + n + a.min(b),
        conjecture: q.powi(3) + n,
    })
}

/// Result of comparing the square-moduli form with the largest Farey count.
#[derive(Clone, Debug, PartialEq)]
pub struct RelationCheck {
    pub lhs: f64,
    pub z: f64,
    pub max_p: u64,
    /// `(r, b, z)` attaining `max_p`.
    pub argmax: (u64, i64, Rational),
}

/// The form against `Z` times `max P(b / r + z)` over `r <= sqrt(N)`,
/// `(b, r) = 1`, `Delta = 1 / N <= z <= sqrt(Delta) / r`.
pub fn ls_relation_check(inst: &LsInstance) -> Result<RelationCheck> {
    let n = inst.len();
    let lhs = ls_quadform_square_moduli(inst)?;
    let delta = Rational::new(1, n as i128);
    let counter = FareyCounter::new(inst.q_max)?;
    let r_max = (1..=n).take_while(|r| r * r <= n).last().unwrap_or(1);
    let mut best = (0u64, (1u64, 0i64, delta));
    for r in 1..=r_max {
        for b in 0..r as i64 {
            if gcd(b as u64, r) != 1 {
                continue;
            }
            let (c, z) = max_count_over_z(&counter, delta, b, r)?;
            if c > best.0 {
                best = (c, (r, b, z));
            }
        }
    }
    Ok(RelationCheck {
        lhs,
        z: inst.z(),
        max_p: best.0,
        argmax: best.1,
    })
}

/// Constants of the parameter pipeline.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PipelineConstants {
    pub epsilon: f64,
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
}

impl Default for PipelineConstants {
    fn default() -> Self {
        PipelineConstants {
            epsilon: 0.05,
            c0: 0.5,
            c1: 2.0,
            c2: 1.0,
        }
    }
}

/// Balanced parameters for `N = Q^3`, `z = 1 / (Q^(3/2 + gamma) r)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LsParams {
    pub q_max: u64,
    pub r: u64,
    pub gamma: f64,
    pub constants: PipelineConstants,
    pub z: f64,
    pub delta: f64,
    pub l: f64,
    pub m0: f64,
    pub m: f64,
    pub f: f64,
    pub h: f64,
    /// `Q^(1/2 + gamma) r <= delta <= Q^2`.
    pub delta_in_range: bool,
    /// `1 <= L, M <= r` and `1 <= H <= min(1 / (L F), M)`.
    pub lmh_ok: bool,
    /// `r <= Q^(3/2 - gamma - 2 eps)`.
    pub r_below_cap: bool,
    /// `Q^(1/2 + gamma + eps) <= r <= Q^(1 - 2 eps)` and `gamma <= 1/2`.
    pub r_in_window: bool,
}

impl LsParams {
    pub fn valid(&self) -> bool {
        self.delta_in_range && self.lmh_ok && self.r_below_cap && self.r_in_window
    }

    /// The bilinear route does not apply and the count falls back to
    /// [`lemma41_bound`].
    pub fn use_fallback(&self) -> bool {
        !self.r_in_window
    }
}

pub fn params_pipeline(
    q_max: u64,
    r: &FactoredModulus,
    gamma: f64,
    constants: PipelineConstants,
) -> Result<LsParams> {
    if q_max < 2 {
        return invalid("Q must be at least 2");
    }
    r.require_odd()?;
    if gamma.is_nan() || gamma < 0.0 {
        return invalid("gamma must be non-negative");
    }
    let PipelineConstants {
        epsilon: eps,
        c0,
        c1,
        c2,
    } = constants;
    let q = q_max as f64;
    let rf = r.n() as f64;
    let l = rf.sqrt() / q.powf(0.25 + gamma / 2.0);
    let delta = q.powf(1.0 + eps) * rf / l;
    let m = c1 * q.powf(0.5 - gamma);
    let f = c2 * q.powf(0.5 + gamma) / rf;
    let h = 1.0 / (l * f);
    Ok(LsParams {
        q_max,
        r: r.n(),
        gamma,
        constants,
        z: 1.0 / (q.powf(1.5 + gamma) * rf),
        delta,
        l,
        m0: c0 * q.powf(0.5 - gamma),
        m,
        f,
        h,
        delta_in_range: q.powf(0.5 + gamma) * rf <= delta && delta <= q * q,
        lmh_ok: (1.0..=rf).contains(&l) && (1.0..=rf).contains(&m) && 1.0 <= h && h <= m,
        r_below_cap: rf <= q.powf(1.5 - gamma - 2.0 * eps),
        r_in_window: q.powf(0.5 + gamma + eps) <= rf
            && rf <= q.powf(1.0 - 2.0 * eps)
            && gamma <= 0.5,
    })
}

/// `Q^5/8 r^-1/4 + Q^1/2 s0^-1/4 + Q^1/4 r^1/4 s1^1/8`.
pub fn thm3_bound(q_max: u64, r: &FactoredModulus) -> Result<f64> {
    r.require_odd()?;
    let q = q_max as f64;
    let rf = r.n() as f64;
    let s0 = r.squarefree_part() as f64;
    let s1 = r.squarefull_part() as f64;
    Ok(q.powf(0.625) * rf.powf(-0.25)
        + q.sqrt() * s0.powf(-0.25)
        + q.powf(0.25) * rf.powf(0.25) * s1.powf(0.125))
}

/// `1 + Q^2 r z + Q^3 Delta`.
pub fn lemma41_bound(q_max: u64, r: u64, z: f64, delta: f64) -> f64 {
    let q = q_max as f64;
    1.0 + q * q * r as f64 * z + q.powi(3) * delta
}
