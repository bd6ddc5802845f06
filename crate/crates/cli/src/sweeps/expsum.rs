//! The splitting identity of `E_j`, the critical-point structure of the prime
//! power sums and the prime-modulus bound.

use super::{log_uniform_odd, odd_primes, BOUND_SLACK};
use crate::config::{Command, ExpsumGrid};
use crate::coverage::touch;
use crate::report::{Report, Value};
use crate::RunError;
use num_complex::Complex64;
use rayon::prelude::*;
use sqrtsieve::expsum::{
    cochrane_bound, esum_size_bound, ground_grid_max, ground_shape, ground_shape_sum, localize,
    perelmuter_bound, product_decomposition, sample_local_params, sample_params, GroundGrid,
};
use sqrtsieve::rng::substream;
use sqrtsieve::{
    critical_points, esum_bound_check, esum_eval, esum_multiplicativity_check, factorize,
    mixed_sum_eval, partial_sum_alpha, MixedSum,
};

/// All coprime splittings of one random modulus.
#[derive(Clone, Debug, PartialEq)]
pub struct SplitCheck {
    pub r2: u64,
    pub splits: usize,
    /// Largest `|lhs - rhs|` over the splittings and the full prime-power
    /// product.
    pub max_dev: f64,
    /// `1e-6 sqrt(r2)`.
    pub tol: f64,
    /// `(measured, bound, ratio)` of the size estimate.
    pub size: (f64, f64, f64),
}

impl SplitCheck {
    pub fn passed(&self) -> bool {
        self.max_dev <= self.tol
    }
}

/// Unordered coprime pairs `(q1, q2)` with `q1 q2 = n`, including `(1, n)`.
pub fn coprime_splits(n: u64) -> Result<Vec<(u64, u64)>, RunError> {
    let parts: Vec<u64> = factorize(n)?.prime_powers().collect();
    let mut out = Vec::new();
    for mask in 0u32..(1 << parts.len()) {
        let q1: u64 = parts
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, &x)| x)
            .product();
        let q2 = n / q1;
        if q1 <= q2 {
            out.push((q1, q2));
        }
    }
    Ok(out)
}

/// The `index`-th tuple of a seeded run.
pub fn check_splitting(seed: u64, index: u64, r2_max: u64) -> Result<SplitCheck, RunError> {
    touch("esum_multiplicativity_check");
    touch("esum_eval");
    touch("esum_bound_check");
    let mut rng = substream(seed, index);
    let r2 = log_uniform_odd(&mut rng, 3, r2_max);
    let params = sample_params(&mut rng, factorize(r2)?);
    let splits = coprime_splits(r2)?;
    // The first split goes through the library check; the rest reuse its
    // full-modulus value.
    let (whole, _, mut max_dev) = esum_multiplicativity_check(&params, splits[0].0, splits[0].1)?;
    for &(q1, q2) in &splits[1..] {
        let rhs = esum_eval(&localize(&params, q1, q2)?)? * esum_eval(&localize(&params, q2, q1)?)?;
        max_dev = max_dev.max((whole - rhs).norm());
    }
    let (_, product) = product_decomposition(&params)?;
    max_dev = max_dev.max((whole - product).norm());
    let measured = whole.norm();
    let bound = esum_size_bound(&params)?;
    if index.is_multiple_of(64) {
        let (m, b, _) = esum_bound_check(&params)?;
        max_dev = max_dev.max((m - measured).abs()).max((b - bound).abs());
    }
    Ok(SplitCheck {
        r2,
        splits: splits.len(),
        max_dev,
        tol: 1e-6 * (r2 as f64).sqrt(),
        size: (measured, bound, measured / bound),
    })
}

pub fn splitting_batch(seed: u64, count: usize, r2_max: u64) -> Result<Vec<SplitCheck>, RunError> {
    (0..count as u64)
        .into_par_iter()
        .map(|i| check_splitting(seed, i, r2_max))
        .collect()
}

/// Per-class data of one prime-power sum with `t <= m - 2`.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalCheck {
    pub p: u64,
    pub m: u32,
    pub t: u32,
    pub critical: usize,
    /// Largest `|S_alpha|` over non-critical classes.
    pub off_max: f64,
    /// `1e-6 p^(m/2)`.
    pub off_tol: f64,
    /// Largest `|S_alpha| / bound_alpha` over critical classes.
    pub crit_ratio: f64,
    /// `|sum_alpha S_alpha - S|`.
    pub partition_dev: f64,
}

impl LocalCheck {
    /// The exact identities: vanishing off the critical set and the
    /// partition of `S` into classes.
    pub fn identities_hold(&self) -> bool {
        let pm = (self.p as f64).powi(self.m as i32);
        self.off_max <= self.off_tol && self.partition_dev <= 1e-8 * pm.sqrt()
    }

    pub fn within_bound(&self) -> bool {
        self.crit_ratio <= 1.0 + BOUND_SLACK
    }
}

/// Draws tuples modulo `p^m` until `count` of them have `t <= m - 2`.
pub fn local_batch(seed: u64, p: u64, m: u32, count: usize) -> Result<Vec<LocalCheck>, RunError> {
    touch("critical_points");
    touch("partial_sum_alpha");
    touch("mixed_sum_eval");
    let mut rng = substream(seed, p.pow(m));
    let pm = (p as f64).powi(m as i32);
    let mut out = Vec::with_capacity(count);
    let mut attempts = 0usize;
    while out.len() < count {
        attempts += 1;
        if attempts > 100 * count + 100 {
            return Err(RunError::Eval(sqrtsieve::Error::Invalid(format!(
                "only {} of {count} tuples modulo {p}^{m} reached t <= m - 2",
                out.len()
            ))));
        }
        let (params, q) = sample_local_params(&mut rng, p, m)?;
        let sum = MixedSum::new(&params, q)?;
        let ctx = critical_points(&sum)?;
        if !ctx.in_range() {
            continue;
        }
        let mut total = Complex64::new(0.0, 0.0);
        let (mut off_max, mut crit_ratio) = (0f64, 0f64);
        for alpha in 0..p {
            let s = partial_sum_alpha(&sum, alpha);
            total += s;
            match ctx.multiplicity(alpha) {
                Some(nu) => crit_ratio = crit_ratio.max(s.norm() / cochrane_bound(&ctx, nu)),
                None => off_max = off_max.max(s.norm()),
            }
        }
        out.push(LocalCheck {
            p,
            m,
            t: ctx.t,
            critical: ctx.critical_points.len(),
            off_max,
            off_tol: 1e-6 * pm.sqrt(),
            crit_ratio,
            partition_dev: (total - mixed_sum_eval(&sum)).norm(),
        });
    }
    Ok(out)
}

/// Exhaustive prime-modulus grids with their bounds `3 sqrt(p)` (split and
/// linear shapes, `p` not dividing `g4`) and `3 p` (square shape).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GroundCheck {
    pub grid: GroundGrid,
    pub bound_unit: f64,
    pub bound_square: f64,
}

impl GroundCheck {
    pub fn ratio(&self) -> f64 {
        (self.grid.split.max(self.grid.linear) / self.bound_unit)
            .max(self.grid.square / self.bound_square)
    }

    /// Largest unit-case sum in units of `sqrt(p)`.
    pub fn unit_constant(&self) -> f64 {
        self.grid.split.max(self.grid.linear) / (self.grid.p as f64).sqrt()
    }
}

pub fn ground_checks(p_max: u64) -> Result<Vec<GroundCheck>, RunError> {
    odd_primes(p_max)
        .par_iter()
        .map(|&p| {
            Ok(GroundCheck {
                grid: ground_grid_max(p)?,
                bound_unit: perelmuter_bound(p, 1),
                bound_square: perelmuter_bound(p, p as i64),
            })
        })
        .collect()
}

/// Largest `| |S| - |normal form| |` over random prime-modulus tuples.
pub fn normal_form_deviation(seed: u64, count: usize, p_max: u64) -> Result<f64, RunError> {
    let primes = odd_primes(p_max.max(3));
    let devs: Vec<f64> = (0..count as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = substream(seed ^ 0x6e6f726d, i);
            let p = primes[(i as usize) % primes.len()];
            let (params, q) = sample_local_params(&mut rng, p, 1)?;
            let sum = MixedSum::new(&params, q)?;
            let shape = ground_shape(&sum)?;
            Ok((mixed_sum_eval(&sum).norm() - ground_shape_sum(&shape, p).norm()).abs())
        })
        .collect::<Result<_, RunError>>()?;
    Ok(devs.into_iter().fold(0.0, f64::max))
}

pub const COLUMNS: [&str; 8] = [
    "check", "kind", "modulus", "detail", "measured", "bound", "ratio", "ok",
];

fn row(
    check: &str,
    kind: &str,
    modulus: u64,
    detail: String,
    measured: f64,
    bound: f64,
    ok: bool,
) -> Vec<Value> {
    vec![
        check.into(),
        kind.into(),
        modulus.into(),
        detail.into(),
        measured.into(),
        bound.into(),
        (measured / bound).into(),
        ok.into(),
    ]
}

pub fn run(grid: &ExpsumGrid, seed: u64) -> Result<Report, RunError> {
    let mut report = Report::new(Command::ExpsumVerify, seed, &COLUMNS);
    let mut max_split = 0f64;
    let mut max_size = 0f64;
    for c in splitting_batch(seed, grid.tuples, grid.r2_max)? {
        report.summary.check(c.passed());
        max_split = max_split.max(c.max_dev / c.tol);
        max_size = max_size.max(c.size.2);
        report.push(row(
            "splitting",
            "identity",
            c.r2,
            format!("splits={}", c.splits),
            c.max_dev,
            c.tol,
            c.passed(),
        ));
        report.push(row(
            "size",
            "ratio",
            c.r2,
            String::new(),
            c.size.0,
            c.size.1,
            true,
        ));
    }
    let mut max_crit = 0f64;
    for &pm in &grid.local_moduli {
        let (p, m) = factorize(pm)?.factors()[0];
        for c in local_batch(seed, p, m, grid.local_tuples)? {
            report.summary.check(c.identities_hold());
            report.summary.bound(c.within_bound());
            max_crit = max_crit.max(c.crit_ratio);
            let detail = format!("t={} critical={}", c.t, c.critical);
            report.push(row(
                "off-critical",
                "identity",
                pm,
                detail.clone(),
                c.off_max,
                c.off_tol,
                c.identities_hold(),
            ));
            report.push(row(
                "critical",
                "bound",
                pm,
                detail,
                c.crit_ratio,
                1.0,
                c.within_bound(),
            ));
        }
    }
    let mut max_ground = 0f64;
    for g in ground_checks(grid.ground_p_max)? {
        let p = g.grid.p;
        let within = g.ratio() <= 1.0 + BOUND_SLACK;
        report.summary.bound(within);
        max_ground = max_ground.max(g.ratio());
        report.push(row(
            "prime-split",
            "bound",
            p,
            String::new(),
            g.grid.split,
            g.bound_unit,
            g.grid.split <= g.bound_unit * (1.0 + BOUND_SLACK),
        ));
        report.push(row(
            "prime-linear",
            "bound",
            p,
            String::new(),
            g.grid.linear,
            g.bound_unit,
            g.grid.linear <= g.bound_unit * (1.0 + BOUND_SLACK),
        ));
        report.push(row(
            "prime-square",
            "bound",
            p,
            String::new(),
            g.grid.square,
            g.bound_square,
            g.grid.square <= g.bound_square * (1.0 + BOUND_SLACK),
        ));
    }
    if grid.ground_tuples > 0 {
        let dev = normal_form_deviation(seed, grid.ground_tuples, grid.ground_p_max)?;
        report.summary.check(dev <= 1e-8);
        report.push(row(
            "normal-form",
            "identity",
            0,
            format!("tuples={}", grid.ground_tuples),
            dev,
            1e-8,
            dev <= 1e-8,
        ));
    }
    report.summary.stat("max_split_dev_over_tol", max_split);
    report.summary.stat("max_size_ratio", max_size);
    report.summary.stat("max_critical_ratio", max_crit);
    report.summary.stat("max_prime_ratio", max_ground);
    Ok(report)
}
