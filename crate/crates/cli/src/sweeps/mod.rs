//! One module per command. Each `run` builds a [`Report`](crate::report::Report)
//! from a grid and a seed; the check functions are shared with the acceptance
//! suite.

pub mod bilinear;
pub mod expsum;
pub mod farey;
pub mod gauss;
pub mod sieve;
pub mod sqrt;
pub mod thm3;

use rand::Rng;
use sqrtsieve::rng::SplitMix64;

/// Odd integer, log-uniform in `[lo, hi]`.
pub fn log_uniform_odd(rng: &mut SplitMix64, lo: u64, hi: u64) -> u64 {
    let (a, b) = ((lo as f64).ln(), (hi as f64 + 1.0).ln());
    loop {
        let x = (a + (b - a) * rng.random::<f64>()).exp() as u64 | 1;
        if (lo..=hi).contains(&x) {
            return x;
        }
    }
}

/// Odd primes up to `n`.
pub fn odd_primes(n: u64) -> Vec<u64> {
    (3..=n).filter(|&p| sqrtsieve::arith::is_prime(p)).collect()
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_slope(points: &[(f64, f64)]) -> f64 {
    let pts: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

/// Relative slack for comparing a measured value with a bound it can meet
/// with equality.
pub const BOUND_SLACK: f64 = 1e-9;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn helpers() {
        assert_eq!(odd_primes(13), vec![3, 5, 7, 11, 13]);
        let s = log_slope(&[(2.0, 8.0), (4.0, 64.0), (8.0, 512.0)]);
        assert!((s - 3.0).abs() < 1e-12);
        let mut rng = sqrtsieve::rng::seeded(1);
        for _ in 0..100 {
            let x = log_uniform_odd(&mut rng, 101, 999);
            assert!(x % 2 == 1 && (101..=999).contains(&x));
        }
    }
}
