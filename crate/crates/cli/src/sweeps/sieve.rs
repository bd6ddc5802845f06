//! Large sieve quadratic forms: the classical inequality, square moduli
//! against the stated bounds, and the relation with the Farey count.

use super::BOUND_SLACK;
use crate::config::{Command, SieveGrid};
use crate::coverage::touch;
use crate::report::{Report, Value};
use crate::RunError;
use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use sqrtsieve::bilinear::{ones, unit_phases};
use sqrtsieve::rng::{substream, SplitMix64};
use sqrtsieve::sieve::{classical_bound, ls_quadform_classical};
use sqrtsieve::{ls_bound_eval, ls_quadform_square_moduli, ls_relation_check, LsInstance};

fn random_coeffs(rng: &mut SplitMix64, n: usize) -> Vec<Complex64> {
    unit_phases(rng, n)
        .into_iter()
        .map(|z| z * rng.random::<f64>())
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClassicalCheck {
    pub q_max: u64,
    pub n: u64,
    pub lhs: f64,
    /// `(N + Q^2 - 1) Z`.
    pub bound: f64,
}

impl ClassicalCheck {
    pub fn passed(&self) -> bool {
        self.lhs <= self.bound * (1.0 + BOUND_SLACK)
    }
}

pub fn classical_case(
    seed: u64,
    index: u64,
    n_max: u64,
    q_max: u64,
) -> Result<ClassicalCheck, RunError> {
    let mut rng = substream(seed, index);
    let n = rng.random_range(1..=n_max);
    let q = rng.random_range(1..=q_max);
    let offset = rng.random_range(-1000..=1000);
    let coeffs = if rng.random_bool(0.2) {
        ones(n as usize)
    } else {
        random_coeffs(&mut rng, n as usize)
    };
    let inst = LsInstance::new(q, offset, coeffs)?;
    let lhs = ls_quadform_classical(&inst, q)?;
    Ok(ClassicalCheck {
        q_max: q,
        n,
        lhs,
        bound: classical_bound(n, q) * inst.z(),
    })
}

pub fn classical_batch(
    seed: u64,
    count: usize,
    n_max: u64,
    q_max: u64,
) -> Result<Vec<ClassicalCheck>, RunError> {
    (0..count as u64)
        .into_par_iter()
        .map(|i| classical_case(seed, i, n_max, q_max))
        .collect()
}

/// The square-moduli form of one instance with its ratios to each bound.
#[derive(Clone, Debug, PartialEq)]
pub struct SquareCheck {
    pub q_max: u64,
    pub n: u64,
    pub coefficients: &'static str,
    pub lhs: f64,
    pub z: f64,
    /// `(N + Q^4 - 1) Z`, the classical inequality with moduli `q^2`.
    pub classical: f64,
    pub original: f64,
    pub best_known: f64,
    pub conjecture: f64,
}

impl SquareCheck {
    pub fn passed(&self) -> bool {
        self.lhs <= self.classical * (1.0 + BOUND_SLACK)
    }
}

pub fn square_case(seed: u64, q_max: u64, n: u64, all_ones: bool) -> Result<SquareCheck, RunError> {
    touch("ls_quadform_square_moduli");
    touch("ls_bound_eval");
    let mut rng = substream(seed, q_max << 32 | n);
    let coeffs = if all_ones {
        ones(n as usize)
    } else {
        unit_phases(&mut rng, n as usize)
    };
    let inst = LsInstance::new(q_max, 0, coeffs)?;
    let lhs = ls_quadform_square_moduli(&inst)?;
    let z = inst.z();
    let b = ls_bound_eval(q_max, n)?;
    Ok(SquareCheck {
        q_max,
        n,
        coefficients: if all_ones { "ones" } else { "random" },
        lhs,
        z,
        classical: classical_bound(n, q_max * q_max) * z,
        original: b.original * z,
        best_known: b.best_known * z,
        conjecture: b.conjecture * z,
    })
}

pub fn run(grid: &SieveGrid, seed: u64) -> Result<Report, RunError> {
    let mut report = Report::new(
        Command::SieveSweep,
        seed,
        &[
            "check",
            "Q",
            "N",
            "coefficients",
            "measured",
            "bound",
            "ratio",
            "ratio_original",
            "ratio_best",
            "ratio_conjecture",
            "ok",
        ],
    );
    let nan = || -> Value { f64::NAN.into() };
    for c in classical_batch(
        seed,
        grid.classical,
        grid.classical_n_max,
        grid.classical_q_max,
    )? {
        report.summary.check(c.passed());
        report.push(vec![
            "classical".into(),
            c.q_max.into(),
            c.n.into(),
            "".into(),
            c.lhs.into(),
            c.bound.into(),
            (c.lhs / c.bound).into(),
            nan(),
            nan(),
            nan(),
            c.passed().into(),
        ]);
    }
    let cases: Vec<(u64, u64, bool)> = grid
        .square
        .iter()
        .flat_map(|&(q, n)| [(q, n, false), (q, n, true)])
        .collect();
    let squares: Vec<SquareCheck> = cases
        .par_iter()
        .map(|&(q, n, o)| square_case(seed, q, n, o))
        .collect::<Result<_, _>>()?;
    let mut worst_best = 0f64;
    for c in squares {
        report.summary.check(c.passed());
        worst_best = worst_best.max(c.lhs / c.best_known);
        report.push(vec![
            "square".into(),
            c.q_max.into(),
            c.n.into(),
            c.coefficients.into(),
            c.lhs.into(),
            c.classical.into(),
            (c.lhs / c.classical).into(),
            (c.lhs / c.original).into(),
            (c.lhs / c.best_known).into(),
            (c.lhs / c.conjecture).into(),
            c.passed().into(),
        ]);
    }
    touch("ls_relation_check");
    let mut worst_relation = 0f64;
    for i in 0..grid.relation as u64 {
        let mut rng = substream(seed ^ 0x72656c61, i);
        let inst = LsInstance::new(
            grid.relation_q,
            0,
            unit_phases(&mut rng, grid.relation_n as usize),
        )?;
        let rc = ls_relation_check(&inst)?;
        let rhs = rc.z * rc.max_p as f64;
        let ok = rc.max_p >= 1;
        report.summary.check(ok);
        worst_relation = worst_relation.max(rc.lhs / rhs);
        report.push(vec![
            "relation".into(),
            grid.relation_q.into(),
            grid.relation_n.into(),
            "random".into(),
            rc.lhs.into(),
            rhs.into(),
            (rc.lhs / rhs).into(),
            nan(),
            nan(),
            nan(),
            ok.into(),
        ]);
    }
    report.summary.stat("max_ratio_best_known", worst_best);
    report.summary.stat("max_relation_ratio", worst_relation);
    Ok(report)
}
