//! Quadratic Gauss sums `G(a, b, c) = sum_{n mod c} e((a n^2 + b n) / c)` for
//! odd `c`, by direct summation and by closed-form reduction.

use crate::arith::{gcd_i, inv_residue, jacobi_odd, mul_mod, reduce};
use crate::error::{Error, Result};
use crate::phase::{unit, CompensatedSum};
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

/// Largest modulus accepted by [`gauss_direct`].
pub const DIRECT_LIMIT: u64 = 10_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GaussSumParams {
    pub a: i64,
    pub b: i64,
    c: u64,
}

impl GaussSumParams {
    pub fn new(a: i64, b: i64, c: u64) -> Result<Self> {
        if c == 0 {
            return Err(Error::Zero);
        }
        if c.is_multiple_of(2) {
            return Err(Error::EvenModulus(c));
        }
        Ok(GaussSumParams { a, b, c })
    }

    pub fn c(&self) -> u64 {
        self.c
    }
}

/// `1` if `c = 1 (mod 4)`, `i` if `c = 3 (mod 4)`.
pub fn epsilon_c(c: u64) -> Result<Complex64> {
    match c % 4 {
        1 => Ok(Complex64::new(1.0, 0.0)),
        3 => Ok(Complex64::new(0.0, 1.0)),
        _ => Err(Error::EvenModulus(c)),
    }
}

/// Compensated sum of the `c` unit terms.
pub fn gauss_direct(params: &GaussSumParams) -> Result<Complex64> {
    let c = params.c;
    if c > DIRECT_LIMIT {
        return Err(Error::TooLarge {
            value: c,
            limit: DIRECT_LIMIT,
        });
    }
    let a = reduce(params.a, c);
    let b = reduce(params.b, c);
    let mut acc = CompensatedSum::new();
    for n in 0..c {
        // a n^2 + b n = n (a n + b)
        let phase = mul_mod(n, (mul_mod(a, n, c) + b) % c, c);
        acc.add(unit(phase, c));
    }
    Ok(acc.value())
}

/// `G(a, b, c)` for every `b` in `[0, c)` at once: the row is the discrete
/// Fourier transform of `n -> e(a n^2 / c)`, evaluated with an FFT.
pub fn gauss_direct_row(a: i64, c: u64) -> Result<Vec<Complex64>> {
    DirectRows::new(c)?.row(a)
}

/// Rows of direct Gauss sums for one modulus, sharing the FFT plan.
pub struct DirectRows {
    c: u64,
    fft: Arc<dyn Fft<f64>>,
}

impl DirectRows {
    pub fn new(c: u64) -> Result<Self> {
        GaussSumParams::new(0, 0, c)?;
        if c > DIRECT_LIMIT {
            return Err(Error::TooLarge {
                value: c,
                limit: DIRECT_LIMIT,
            });
        }
        // rustfft's inverse transform uses e(+kn/c), matching e(bn/c).
        Ok(DirectRows {
            c,
            fft: FftPlanner::new().plan_fft_inverse(c as usize),
        })
    }

    pub fn row(&self, a: i64) -> Result<Vec<Complex64>> {
        let c = self.c;
        let ar = reduce(a, c);
        let mut buf: Vec<Complex64> = (0..c)
            .map(|n| unit(mul_mod(ar, mul_mod(n, n, c), c), c))
            .collect();
        self.fft.process(&mut buf);
        Ok(buf)
    }
}

/// Reduction by `d = gcd(a, c)`: zero unless `d | b`, otherwise
/// `d * eps_{c'} * (a'|c') * e(-inv(4a') b'^2 / c') * sqrt(c')` with primes
/// denoting division by `d`.
pub fn gauss_closed_form(params: &GaussSumParams) -> Result<Complex64> {
    let c = params.c;
    let d = gcd_i(params.a, c);
    if !params.b.unsigned_abs().is_multiple_of(d) {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let cr = c / d;
    if cr == 1 {
        return Ok(Complex64::new(d as f64, 0.0));
    }
    let ar = reduce(params.a / d as i64, cr);
    let br = reduce(params.b / d as i64, cr);
    let inv4a = inv_residue(mul_mod(4, ar, cr), cr).expect("gcd(4a', c') = 1");
    let phase = cr - mul_mod(inv4a, mul_mod(br, br, cr), cr);
    let sign = jacobi_odd(ar, cr) as f64;
    let value = epsilon_c(cr)? * unit(phase, cr) * (sign * (cr as f64).sqrt() * d as f64);
    Ok(value)
}

/// Closed form for every `b` in `[0, c)`, sharing the per-`a` work.
pub fn gauss_closed_form_row(a: i64, c: u64) -> Result<Vec<Complex64>> {
    GaussSumParams::new(a, 0, c)?;
    let d = gcd_i(a, c);
    let cr = c / d;
    if cr == 1 {
        return Ok((0..c)
            .map(|b| {
                if b % d == 0 {
                    Complex64::new(d as f64, 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
            .collect());
    }
    let ar = reduce(a / d as i64, cr);
    let inv4a = inv_residue(mul_mod(4, ar, cr), cr).expect("gcd(4a', c') = 1");
    let scale = epsilon_c(cr)? * (jacobi_odd(ar, cr) as f64 * (cr as f64).sqrt() * d as f64);
    Ok((0..c)
        .map(|b| {
            if b % d != 0 {
                return Complex64::new(0.0, 0.0);
            }
            let br = (b / d) % cr;
            let phase = cr - mul_mod(inv4a, mul_mod(br, br, cr), cr);
            scale * unit(phase, cr)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    fn naive(a: i64, b: i64, c: u64) -> Complex64 {
        // independent: floating phase from the unreduced integer
        (0..c as i64)
            .map(|n| {
                let x = ((a * n * n + b * n) as f64) / c as f64;
                Complex64::from_polar(1.0, TAU * x)
            })
            .sum()
    }

    fn g(a: i64, b: i64, c: u64) -> GaussSumParams {
        GaussSumParams::new(a, b, c).unwrap()
    }

    #[test]
    fn epsilon_values() {
        assert_eq!(epsilon_c(1).unwrap(), Complex64::new(1.0, 0.0));
        assert_eq!(epsilon_c(7).unwrap(), Complex64::new(0.0, 1.0));
        assert_eq!(epsilon_c(13).unwrap(), Complex64::new(1.0, 0.0));
        assert_eq!(epsilon_c(6), Err(Error::EvenModulus(6)));
    }

    #[test]
    fn direct_examples() {
        for (a, b) in [(0, 0), (5, -3), (17, 2)] {
            assert!((gauss_direct(&g(a, b, 1)).unwrap() - 1.0).norm() < 1e-15);
        }
        let v = gauss_direct(&g(1, 0, 5)).unwrap();
        assert!((v - Complex64::new(5f64.sqrt(), 0.0)).norm() < 1e-12);
        let v = gauss_direct(&g(1, 0, 3)).unwrap();
        assert!((v - Complex64::new(0.0, 3f64.sqrt())).norm() < 1e-12);
        assert!(GaussSumParams::new(1, 0, 4).is_err());
        assert!(gauss_direct(&g(1, 0, DIRECT_LIMIT + 1)).is_err());
    }

    #[test]
    fn direct_matches_naive() {
        for c in (1..60u64).step_by(2) {
            for a in 0..c as i64 {
                for b in [0i64, 1, 2, c as i64 - 1] {
                    let d = gauss_direct(&g(a, b, c)).unwrap() - naive(a, b, c);
                    assert!(d.norm() < 1e-9 * c as f64);
                }
            }
        }
    }

    #[test]
    fn closed_form_examples() {
        assert_eq!(
            gauss_closed_form(&g(3, 1, 9)).unwrap(),
            Complex64::new(0.0, 0.0)
        );
        // G(3,3,9) = 3 G(1,1,3) = 3 e(-inv(4,3)/3) eps_3 (1|3) sqrt 3, inv(4,3) = 1
        let want = Complex64::new(0.0, 1.0) * unit(2, 3) * (3.0 * 3f64.sqrt());
        assert!((gauss_closed_form(&g(3, 3, 9)).unwrap() - want).norm() < 1e-12);
        assert!((gauss_direct(&g(3, 3, 9)).unwrap() - want).norm() < 1e-12);
        let d = gauss_closed_form(&g(2, 4, 15)).unwrap() - gauss_direct(&g(2, 4, 15)).unwrap();
        assert!(d.norm() < 1e-6);
        assert!((gauss_closed_form(&g(0, 0, 9)).unwrap() - 9.0).norm() < 1e-12);
        assert_eq!(
            gauss_closed_form(&g(0, 2, 9)).unwrap(),
            Complex64::new(0.0, 0.0)
        );
    }

    #[test]
    fn modulus_of_pure_gauss_sum() {
        for c in (3..300u64).step_by(2) {
            for a in 1..c as i64 {
                if gcd_i(2 * a, c) == 1 {
                    let v = gauss_closed_form(&g(a, 0, c)).unwrap();
                    assert!((v.norm() - (c as f64).sqrt()).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn periodicity() {
        for c in [9u64, 15, 21, 49] {
            for a in 0..c as i64 {
                for b in 0..c as i64 {
                    let base = gauss_closed_form(&g(a, b, c)).unwrap();
                    let ci = c as i64;
                    assert!((gauss_closed_form(&g(a + ci, b, c)).unwrap() - base).norm() < 1e-9);
                    assert!((gauss_closed_form(&g(a, b + ci, c)).unwrap() - base).norm() < 1e-9);
                    assert!(
                        (gauss_closed_form(&g(a - ci, b - ci, c)).unwrap() - base).norm() < 1e-9
                    );
                }
            }
        }
    }

    #[test]
    fn rows_match_cells() {
        for c in [1u64, 3, 9, 25, 27, 45, 77, 121] {
            for a in 0..c as i64 {
                let direct = gauss_direct_row(a, c).unwrap();
                let closed = gauss_closed_form_row(a, c).unwrap();
                for b in 0..c as i64 {
                    let cell = gauss_direct(&g(a, b, c)).unwrap();
                    assert!(
                        (direct[b as usize] - cell).norm() < 1e-9,
                        "a={a} b={b} c={c}"
                    );
                    let cell = gauss_closed_form(&g(a, b, c)).unwrap();
                    assert!((closed[b as usize] - cell).norm() < 1e-12);
                }
            }
        }
    }
}
