//! Unit-circle evaluation of rational phases and compensated complex summation.

use num_complex::Complex64;
use std::f64::consts::TAU;
use std::ops::AddAssign;

/// `e(num/den)`, with the argument reduced into `(-1/2, 1/2]` before the
/// transcendental call so the phase error does not grow with `num`.
pub fn unit(num: u64, den: u64) -> Complex64 {
    debug_assert!(den > 0);
    let k = num % den;
    let signed = if 2 * (k as u128) > den as u128 {
        k as f64 - den as f64
    } else {
        k as f64
    };
    let (s, c) = (TAU * (signed / den as f64)).sin_cos();
    Complex64::new(c, s)
}

/// `e(x)` for a real `x`, reduced modulo 1 first.
pub fn unit_real(x: f64) -> Complex64 {
    let y = x - x.round();
    let (s, c) = (TAU * y).sin_cos();
    Complex64::new(c, s)
}

/// Table of `e(k/n)` for `k` in `[0, n)`.
#[derive(Clone, Debug)]
pub struct RootTable {
    n: u64,
    values: Vec<Complex64>,
}

impl RootTable {
    pub fn new(n: u64) -> Self {
        let values = (0..n).map(|k| unit(k, n)).collect();
        RootTable { n, values }
    }

    pub fn modulus(&self) -> u64 {
        self.n
    }

    #[inline]
    pub fn get(&self, k: u64) -> Complex64 {
        self.values[(k % self.n) as usize]
    }
}

/// Neumaier-compensated accumulator for complex values.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum {
    re: f64,
    re_c: f64,
    im: f64,
    im_c: f64,
}

#[inline]
fn two_sum(s: &mut f64, c: &mut f64, x: f64) {
    let t = *s + x;
    if s.abs() >= x.abs() {
        *c += (*s - t) + x;
    } else {
        *c += (x - t) + *s;
    }
    *s = t;
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, z: Complex64) {
        two_sum(&mut self.re, &mut self.re_c, z.re);
        two_sum(&mut self.im, &mut self.im_c, z.im);
    }

    pub fn merge(&mut self, other: &CompensatedSum) {
        self.add(Complex64::new(other.re, other.im));
        self.add(Complex64::new(other.re_c, other.im_c));
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re + self.re_c, self.im + self.im_c)
    }
}

impl AddAssign<Complex64> for CompensatedSum {
    fn add_assign(&mut self, rhs: Complex64) {
        self.add(rhs);
    }
}

impl FromIterator<Complex64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = Complex64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        for z in iter {
            acc.add(z);
        }
        acc
    }
}

/// Compensated sum of a sequence of reals.
pub fn sum_real<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    let (mut s, mut c) = (0.0, 0.0);
    for x in iter {
        two_sum(&mut s, &mut c, x);
    }
    s + c
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_quarter_turns() {
        assert!((unit(1, 4) - Complex64::new(0.0, 1.0)).norm() < 1e-15);
        assert!((unit(2, 4) - Complex64::new(-1.0, 0.0)).norm() < 1e-15);
        assert!((unit(7, 4) - Complex64::new(0.0, -1.0)).norm() < 1e-15);
        assert!((unit(0, 1) - Complex64::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn large_numerators_keep_precision() {
        let n = 1_000_003u64;
        let z = unit(n * 1_000 + 5, n);
        assert!((z - unit(5, n)).norm() < 1e-15);
    }

    #[test]
    fn compensation_recovers_small_terms() {
        let mut acc = CompensatedSum::new();
        acc.add(Complex64::new(1e16, 0.0));
        for _ in 0..1000 {
            acc.add(Complex64::new(1.0, 0.5));
        }
        acc.add(Complex64::new(-1e16, 0.0));
        let v = acc.value();
        assert_eq!(v.re, 1000.0);
        assert_eq!(v.im, 500.0);
    }

    #[test]
    fn roots_of_unity_sum_to_zero() {
        let t = RootTable::new(97);
        let s: CompensatedSum = (0..97).map(|k| t.get(k)).collect();
        assert!(s.value().norm() < 1e-13);
    }
}
