//! Farey fractions with square denominators near a point: exact counts
//! against a double loop, and structural points against the short-interval
//! bound.

use crate::config::{Command, FareyGrid};
use crate::coverage::touch;
use crate::report::Report;
use crate::RunError;
use rand::Rng;
use rayon::prelude::*;
use sqrtsieve::arith::gcd;
use sqrtsieve::rng::{substream, SplitMix64};
use sqrtsieve::sieve::{structural_alpha, z_in_range};
use sqrtsieve::{farey_count, lemma41_bound, FareyQuery, Rational};

fn rat(n: i128, d: i128) -> Rational {
    Rational::new(n, d)
}

fn to_f64(x: Rational) -> f64 {
    *x.numer() as f64 / *x.denom() as f64
}

/// `#{(a, q): q <= Q, (a, q) = 1, |a / q^2 - alpha| <= Delta}` by scanning
/// every numerator in a window around `alpha q^2`.
pub fn double_loop(q_max: u64, alpha: Rational, delta: Rational) -> u64 {
    let mut total = 0;
    for q in 1..=q_max as i128 {
        let q2 = rat(q * q, 1);
        let lo = ((alpha - delta) * q2).floor().to_integer() - 1;
        let hi = ((alpha + delta) * q2).ceil().to_integer() + 1;
        for a in lo..=hi {
            let x = rat(a, q * q) - alpha;
            if gcd(a.unsigned_abs() as u64, q as u64) == 1 && x <= delta && -x <= delta {
                total += 1;
            }
        }
    }
    total
}

#[derive(Clone, Debug, PartialEq)]
pub struct QueryCheck {
    pub q_max: u64,
    pub alpha: Rational,
    pub delta: Rational,
    pub count: u64,
    pub expected: u64,
    /// Counts at `-alpha` and `alpha + 1` agree with `count`.
    pub symmetric: bool,
}

impl QueryCheck {
    pub fn passed(&self) -> bool {
        self.count == self.expected && self.symmetric
    }
}

fn random_query(rng: &mut SplitMix64, q_max: u64) -> (u64, Rational, Rational) {
    let q = rng.random_range(1..=q_max);
    let alpha = rat(
        rng.random_range(-20_000..=20_000),
        rng.random_range(1..=5000),
    );
    let delta = if rng.random_bool(0.5) {
        rat(1, rng.random_range(2..=1_000_000))
    } else {
        rat(rng.random_range(1..=50), rng.random_range(1000..=200_000))
    };
    (q, alpha, delta)
}

pub fn query_case(seed: u64, index: u64, q_max: u64) -> Result<QueryCheck, RunError> {
    touch("farey_count");
    let mut rng = substream(seed, index);
    let (q, alpha, delta) = random_query(&mut rng, q_max);
    let count = farey_count(&FareyQuery::new(q, delta, alpha)?)?;
    let neg = farey_count(&FareyQuery::new(q, delta, -alpha)?)?;
    let shifted = farey_count(&FareyQuery::new(q, delta, alpha + rat(1, 1))?)?;
    Ok(QueryCheck {
        q_max: q,
        alpha,
        delta,
        count,
        expected: double_loop(q, alpha, delta),
        symmetric: neg == count && shifted == count,
    })
}

pub fn query_batch(seed: u64, count: usize, q_max: u64) -> Result<Vec<QueryCheck>, RunError> {
    (0..count as u64)
        .into_par_iter()
        .map(|i| query_case(seed, i, q_max))
        .collect()
}

/// Count at a structural point `b / r + z` and the short-interval bound.
#[derive(Clone, Debug, PartialEq)]
pub struct StructuralCheck {
    pub q_max: u64,
    pub r: u64,
    pub b: i64,
    pub z: Rational,
    pub delta: Rational,
    pub count: u64,
    pub bound: f64,
}

impl StructuralCheck {
    pub fn constant(&self) -> f64 {
        self.count as f64 / self.bound
    }
}

/// `Delta = 1 / N` with `N` in `[Q, Q^4]`, odd `r <= sqrt(N)`, `(b, r) = 1`
/// and `z` drawn in `[Delta, sqrt(Delta) / r]`.
pub fn structural_case(seed: u64, index: u64, q_max: u64) -> Result<StructuralCheck, RunError> {
    touch("farey_count");
    touch("lemma41_bound");
    let mut rng = substream(seed ^ 0x73747275, index);
    let q = rng.random_range(1..=q_max);
    let n = rng.random_range(q.max(9)..=q.pow(4).max(9));
    let delta = rat(1, n as i128);
    let r_cap = (n as f64).sqrt().floor() as u64;
    let r = 2 * rng.random_range(0..=(r_cap - 1) / 2) + 1;
    let b = loop {
        let b = rng.random_range(0..r as i64);
        if gcd(b as u64, r) == 1 {
            break b;
        }
    };
    let hi = 1.0 / ((n as f64).sqrt() * r as f64);
    let x = 1.0 / n as f64 + rng.random::<f64>() * (hi - 1.0 / n as f64);
    let z = rat((x * 1e12).round() as i128, 1_000_000_000_000).max(delta);
    let z = if z_in_range(z, delta, r) { z } else { delta };
    let count = farey_count(&FareyQuery::structural(q, delta, b, r, z)?)?;
    Ok(StructuralCheck {
        q_max: q,
        r,
        b,
        z,
        delta,
        count,
        bound: lemma41_bound(q, r, to_f64(z), to_f64(delta)),
    })
}

pub fn run(grid: &FareyGrid, seed: u64) -> Result<Report, RunError> {
    let mut report = Report::new(
        Command::FareyCount,
        seed,
        &[
            "check", "Q", "alpha", "delta", "r", "b", "z", "count", "expected", "bound", "ratio",
            "ok",
        ],
    );
    for c in query_batch(seed, grid.queries, grid.q_max)? {
        report.summary.check(c.passed());
        report.push(vec![
            "query".into(),
            c.q_max.into(),
            c.alpha.to_string().into(),
            c.delta.to_string().into(),
            0u64.into(),
            0i64.into(),
            "".into(),
            c.count.into(),
            c.expected.into(),
            f64::NAN.into(),
            f64::NAN.into(),
            c.passed().into(),
        ]);
    }
    let structural: Vec<StructuralCheck> = (0..grid.structural as u64)
        .into_par_iter()
        .map(|i| structural_case(seed, i, grid.q_max))
        .collect::<Result<_, _>>()?;
    let mut worst = 0f64;
    for c in &structural {
        worst = worst.max(c.constant());
        let alpha = structural_alpha(c.b, c.r, c.z);
        let expected = double_loop(c.q_max, alpha, c.delta);
        let ok = expected == c.count;
        report.summary.check(ok);
        report.push(vec![
            "structural".into(),
            c.q_max.into(),
            alpha.to_string().into(),
            c.delta.to_string().into(),
            c.r.into(),
            c.b.into(),
            c.z.to_string().into(),
            c.count.into(),
            expected.into(),
            c.bound.into(),
            c.constant().into(),
            ok.into(),
        ]);
    }
    report.summary.stat("max_structural_constant", worst);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn double_loop_small_cases() {
        // Around 0 with Delta = 1/4 and q <= 2: 0/1 and 1/4, -1/4 (denominator 4).
        assert_eq!(double_loop(2, rat(0, 1), rat(1, 4)), 3);
        assert_eq!(double_loop(1, rat(1, 2), rat(1, 3)), 0);
    }

    #[test]
    fn queries_and_structural_points_agree() {
        assert!(query_batch(8, 40, 30)
            .unwrap()
            .iter()
            .all(QueryCheck::passed));
        for i in 0..20 {
            let c = structural_case(8, i, 30).unwrap();
            let alpha = structural_alpha(c.b, c.r, c.z);
            assert_eq!(double_loop(c.q_max, alpha, c.delta), c.count);
            assert!(c.bound >= 1.0);
        }
    }
}
