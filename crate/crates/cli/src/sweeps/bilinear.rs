//! Bilinear sums over modular square roots: oracle comparison, energy
//! identities and measured-to-bound ratios.

use super::{log_uniform_odd, BOUND_SLACK};
use crate::config::{BilinearGrid, Coefficients, Command};
use crate::coverage::touch;
use crate::report::Report;
use crate::RunError;
use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use sqrtsieve::arith::{gcd, mul_mod};
use sqrtsieve::bilinear::{aligned_alpha, energy_profile, ones, thm2_shapes, unit_phases};
use sqrtsieve::rng::{substream, SplitMix64};
use sqrtsieve::sqrt_mod;
use sqrtsieve::{
    bound_thm1, bound_thm2, bound_trivial, energy_count, factorize, inv_mod, sigma_eval,
    BilinearInstance, FactoredModulus, PhaseFn,
};
use std::collections::BTreeMap;
use std::f64::consts::TAU;

fn random_unit(rng: &mut SplitMix64, r: u64) -> i64 {
    loop {
        let j = rng.random_range(1..=r.max(2)) as i64;
        if gcd(j as u64, r) == 1 {
            return j;
        }
    }
}

/// Coefficients with random phases and moduli in `[0, 1]`.
fn random_coeffs(rng: &mut SplitMix64, n: usize) -> Vec<Complex64> {
    unit_phases(rng, n)
        .into_iter()
        .map(|z| z * rng.random::<f64>())
        .collect()
}

/// `Sigma` by looping over `l`, `m` and every `k mod r` with `k^2 = j m`.
pub fn triple_loop(inst: &BilinearInstance) -> Complex64 {
    let r = inst.r().n() as i64;
    let (l_range, m_range) = (inst.l_range() as i64, inst.m_range() as i64);
    let j = inst.j();
    let phase = |m: i64| -> f64 {
        match inst.phase() {
            PhaseFn::Zero => 0.0,
            PhaseFn::ScaledSqrt { amplitude } => -amplitude * (m as f64).sqrt(),
            PhaseFn::Tabulated(v) => v[(m - 1) as usize],
        }
    };
    let roots: Vec<Vec<i64>> = (1..=m_range)
        .map(|m| {
            (0..r)
                .filter(|&k| (k * k - j * m).rem_euclid(r) == 0)
                .collect()
        })
        .collect();
    let mut total = Complex64::new(0.0, 0.0);
    for l in -l_range..=l_range {
        let a = inst.alpha()[(l + l_range) as usize];
        for m in 1..=m_range {
            let b = inst.beta()[(m - 1) as usize];
            for &k in &roots[(m - 1) as usize] {
                let x = (l * k).rem_euclid(r) as f64 / r as f64 + l as f64 * phase(m);
                total += a * b * Complex64::from_polar(1.0, TAU * x);
            }
        }
    }
    total
}

#[derive(Clone, Debug, PartialEq)]
pub struct OracleCheck {
    pub r: u64,
    pub l: u64,
    pub m: u64,
    pub phase: &'static str,
    pub dev: f64,
    /// `1e-6 max(L, 1) M`.
    pub tol: f64,
}

impl OracleCheck {
    pub fn passed(&self) -> bool {
        self.dev <= self.tol
    }
}

/// One random instance modulo `r`, drawn from the `index`-th substream.
pub fn oracle_case(seed: u64, index: u64, r: u64) -> Result<OracleCheck, RunError> {
    touch("sigma_eval");
    let mut rng = substream(seed, index);
    let j = random_unit(&mut rng, r);
    let l = rng.random_range(0..=r);
    let m = rng.random_range(1..=r);
    let f_max = 1.0 / l.max(1) as f64;
    let (phase, name, f) = match rng.random_range(0..3) {
        0 => (PhaseFn::Zero, "zero", 0.0),
        1 => {
            let amp = 2.0 * f_max * rng.random::<f64>();
            (PhaseFn::ScaledSqrt { amplitude: amp }, "sqrt", amp / 2.0)
        }
        _ => (
            PhaseFn::Tabulated((0..m).map(|_| rng.random::<f64>()).collect()),
            "table",
            f_max,
        ),
    };
    let alpha = random_coeffs(&mut rng, 2 * l as usize + 1);
    let beta = random_coeffs(&mut rng, m as usize);
    let inst = BilinearInstance::new(factorize(r)?, j, l, m, alpha, beta, phase, f)?;
    let dev = (sigma_eval(&inst)? - triple_loop(&inst)).norm();
    Ok(OracleCheck {
        r,
        l,
        m,
        phase: name,
        dev,
        tol: 1e-6 * (l.max(1) * m) as f64,
    })
}

/// `cases` instances spread over the odd moduli up to `r_max` in turn.
pub fn oracle_batch(seed: u64, cases: usize, r_max: u64) -> Result<Vec<OracleCheck>, RunError> {
    let rs: Vec<u64> = (1..=r_max).filter(|r| r % 2 == 1).collect();
    (0..cases as u64)
        .into_par_iter()
        .map(|i| oracle_case(seed, i, rs[i as usize % rs.len()]))
        .collect()
}

/// Energy profile against an exhaustive scan over root pairs, with the
/// symmetry and partition identities. Returns the number of failed checks.
pub fn energy_checks(r: u64, j: i64, m: u64, h: u64) -> Result<u64, RunError> {
    touch("energy_count");
    let fr = factorize(r)?;
    let profile = energy_profile(&fr, j, m, h)?;
    let jinv = inv_mod(j, r)?.value();
    let mut scan = vec![0u64; r as usize];
    let m_of = |k: u64| mul_mod(mul_mod(k, k, r), jinv, r);
    for k1 in 0..r {
        let m1 = m_of(k1);
        if m1 == 0 || m1 > m {
            continue;
        }
        for k2 in 0..r {
            let m2 = m_of(k2);
            if m2 != 0 && m2 <= m && m1.abs_diff(m2) <= h {
                scan[((k1 + r - k2) % r) as usize] += 1;
            }
        }
    }
    let mut failures = u64::from(profile != scan);
    for d in 1..r as usize {
        failures += u64::from(profile[d] != profile[r as usize - d]);
    }
    let counts: Vec<u64> = (1..=m)
        .map(|x| (0..r).filter(|&k| m_of(k) == x).count() as u64)
        .collect();
    let mut pairs = 0u64;
    for m1 in 1..=m {
        for m2 in 1..=m {
            if m1.abs_diff(m2) <= h {
                pairs += counts[(m1 - 1) as usize] * counts[(m2 - 1) as usize];
            }
        }
    }
    failures += u64::from(profile.iter().sum::<u64>() != pairs);
    failures += u64::from(energy_count(&fr, j, m, h, 1)?.count != profile[1 % r as usize]);
    Ok(failures)
}

/// One cell of the ratio sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct RatioCell {
    pub r: u64,
    pub s0: u64,
    pub s1: u64,
    pub j: i64,
    pub l: u64,
    pub m: u64,
    pub phase: &'static str,
    pub f: f64,
    /// Shift minimizing the refined bound.
    pub h: u64,
    pub sigma: f64,
    pub thm2_first: f64,
    pub thm2_second: f64,
    pub thm2: f64,
    pub thm1: f64,
    pub trivial: f64,
    /// Mean number of square roots of `j m` over `m <= M`.
    pub mean_roots: f64,
    /// Second branch for squarefree `r` against its specialized form.
    pub squarefree_dev: Option<f64>,
}

impl RatioCell {
    pub fn ratio(&self) -> f64 {
        self.sigma / self.thm2
    }

    /// `|Sigma|` per mean root count over the trivial bound.
    /// Zero when no `j m` is a square, since then `Sigma` is empty.
    pub fn per_root_ratio(&self) -> f64 {
        if self.mean_roots == 0.0 {
            return 0.0;
        }
        self.sigma / self.mean_roots / self.trivial
    }
}

/// The `(L, M, f)` cells for one modulus with `alpha` aligned to the
/// instance, so that `Sigma` is as large as the coefficient norms allow.
pub fn ratio_cells(
    r: u64,
    grid: &BilinearGrid,
    coefficients: Coefficients,
    seed: u64,
) -> Result<Vec<RatioCell>, RunError> {
    touch("bound_thm1");
    touch("bound_thm2");
    touch("bound_trivial");
    touch("sigma_eval");
    let fr: FactoredModulus = factorize(r)?;
    let mut rng = substream(seed, r);
    let j = random_unit(&mut rng, r);
    let rf = r as f64;
    let mut cells = Vec::new();
    for &le in &grid.l_exponents {
        let l = (rf.powf(le).round() as u64).clamp(1, r);
        for &me in &grid.m_exponents {
            let m = if me >= 1.0 {
                r / 2
            } else {
                (rf.powf(me).floor() as u64).min(r / 2)
            }
            .max(1);
            let sqrt_f = 1.0 / (l as f64 * (m as f64).sqrt());
            for (phase, name, f) in [
                (PhaseFn::Zero, "zero", 0.0),
                (
                    PhaseFn::ScaledSqrt {
                        amplitude: 2.0 * sqrt_f,
                    },
                    "sqrt",
                    sqrt_f,
                ),
            ] {
                let beta = match coefficients {
                    Coefficients::Random => unit_phases(&mut rng, m as usize),
                    Coefficients::Ones => ones(m as usize),
                };
                let inst = BilinearInstance::new(
                    fr.clone(),
                    j,
                    l,
                    m,
                    ones(2 * l as usize + 1),
                    beta,
                    phase,
                    f,
                )?;
                let inst = inst.with_alpha(aligned_alpha(&inst)?)?;
                let sigma = sigma_eval(&inst)?.norm();
                let mut best = None::<(u64, sqrtsieve::bilinear::Thm2Bound)>;
                let mut thm1 = f64::INFINITY;
                for h in 1..=inst.max_h() {
                    let b = bound_thm2(&inst, h)?;
                    if best.is_none_or(|(_, x)| b.min < x.min) {
                        best = Some((h, b));
                    }
                    thm1 = thm1.min(bound_thm1(&inst, h)?);
                }
                let (h, b) = best.expect("max_h >= 1");
                let roots: usize = (1..=m as i64)
                    .map(|x| sqrt_mod(j * x, &fr).map(|s| s.len()))
                    .sum::<Result<usize, _>>()?;
                let squarefree_dev = fr.is_squarefree().then(|| {
                    let (hf, lf, mf) = (h as f64, l as f64, m as f64);
                    let (_, general) = thm2_shapes(hf, lf, mf, rf, rf, 1.0);
                    let special = hf.powf(-0.5) * lf.sqrt() * mf
                        + hf.powf(-0.5) * mf.sqrt() * rf.powf(0.25)
                        + lf.sqrt() * mf.sqrt() * rf.powf(0.25)
                        + mf;
                    (general - special).abs() / special
                });
                cells.push(RatioCell {
                    r,
                    s0: fr.squarefree_part(),
                    s1: fr.squarefull_part(),
                    j,
                    l,
                    m,
                    phase: name,
                    f,
                    h,
                    sigma,
                    thm2_first: b.first,
                    thm2_second: b.second,
                    thm2: b.min,
                    thm1,
                    trivial: bound_trivial(&inst),
                    mean_roots: roots as f64 / m as f64,
                    squarefree_dev,
                });
            }
        }
    }
    Ok(cells)
}

/// `count` distinct moduli in ascending order: the `extra` values in
/// `[lo, hi]`, then log-uniform odd values in `[lo, hi]` until the total is
/// reached.
pub fn sweep_moduli(seed: u64, count: usize, lo: u64, hi: u64, extra: &[u64]) -> Vec<u64> {
    let mut rng = substream(seed, u64::MAX);
    let mut rs: std::collections::BTreeSet<u64> = extra
        .iter()
        .copied()
        .filter(|r| (lo..=hi).contains(r))
        .collect();
    let span = ((hi - lo) / 2 + 1) as usize;
    while rs.len() < count.min(span) {
        rs.insert(log_uniform_odd(&mut rng, lo, hi));
    }
    rs.into_iter().collect()
}

pub fn ratio_sweep(
    rs: &[u64],
    grid: &BilinearGrid,
    coefficients: Coefficients,
    seed: u64,
) -> Result<Vec<RatioCell>, RunError> {
    let per_r: Vec<Vec<RatioCell>> = rs
        .par_iter()
        .map(|&r| ratio_cells(r, grid, coefficients, seed))
        .collect::<Result<_, _>>()?;
    Ok(per_r.into_iter().flatten().collect())
}

/// Largest ratio per nearest power of ten, keyed by `round(log10 r)`.
pub fn decade_maxima(cells: &[RatioCell]) -> BTreeMap<u32, f64> {
    let mut out = BTreeMap::new();
    for c in cells {
        let d = (c.r as f64).log10().round() as u32;
        let e = out.entry(d).or_insert(0f64);
        *e = e.max(c.ratio());
    }
    out
}

pub fn run(grid: &BilinearGrid, seed: u64) -> Result<Report, RunError> {
    let mut report = Report::new(
        Command::BilinearSweep,
        seed,
        &[
            "check",
            "r",
            "s0",
            "s1",
            "j",
            "L",
            "M",
            "f",
            "F",
            "H",
            "measured",
            "thm2_first",
            "thm2_second",
            "thm2_min",
            "ratio_thm2",
            "ratio_thm1",
            "ratio_trivial",
            "ok",
        ],
    );
    let blank = || -> Vec<crate::report::Value> { vec![f64::NAN.into(); 6] };
    let mut worst_oracle = 0f64;
    for c in oracle_batch(seed, grid.oracle_cases, grid.oracle_r_max)? {
        report.summary.check(c.passed());
        worst_oracle = worst_oracle.max(c.dev / c.tol);
        let mut row = vec![
            "oracle".into(),
            c.r.into(),
            0u64.into(),
            0u64.into(),
            0i64.into(),
            c.l.into(),
            c.m.into(),
            c.phase.into(),
            f64::NAN.into(),
            0u64.into(),
            c.dev.into(),
        ];
        row.extend(blank());
        row.push(c.passed().into());
        report.push(row);
    }
    for &r in &grid.energy_moduli {
        let m = (r / 2).min(40);
        for h in [1, m / 3 + 1, m] {
            let failures = energy_checks(r, 1, m, h)?;
            report.summary.check(failures == 0);
            let mut row = vec![
                "energy".into(),
                r.into(),
                0u64.into(),
                0u64.into(),
                1i64.into(),
                0u64.into(),
                m.into(),
                "".into(),
                f64::NAN.into(),
                h.into(),
                (failures as f64).into(),
            ];
            row.extend(blank());
            row.push((failures == 0).into());
            report.push(row);
        }
    }
    let rs = sweep_moduli(
        seed,
        grid.sweep_count,
        grid.r_min,
        grid.r_max,
        &grid.squarefull,
    );
    let cells = ratio_sweep(&rs, grid, grid.coefficients, seed)?;
    for c in &cells {
        if let Some(dev) = c.squarefree_dev {
            report.summary.check(dev <= 1e-12);
        }
        report
            .summary
            .bound(c.per_root_ratio() <= 1.0 + BOUND_SLACK);
        report.push(vec![
            "ratio".into(),
            c.r.into(),
            c.s0.into(),
            c.s1.into(),
            c.j.into(),
            c.l.into(),
            c.m.into(),
            c.phase.into(),
            c.f.into(),
            c.h.into(),
            c.sigma.into(),
            c.thm2_first.into(),
            c.thm2_second.into(),
            c.thm2.into(),
            c.ratio().into(),
            (c.sigma / c.thm1).into(),
            (c.sigma / c.trivial).into(),
            c.squarefree_dev.is_none_or(|d| d <= 1e-12).into(),
        ]);
    }
    report.summary.stat("max_oracle_dev_over_tol", worst_oracle);
    report.summary.stat(
        "max_per_root_ratio_trivial",
        cells
            .iter()
            .map(RatioCell::per_root_ratio)
            .fold(0.0, f64::max),
    );
    report.summary.stat(
        "max_ratio_thm2",
        cells.iter().map(RatioCell::ratio).fold(0.0, f64::max),
    );
    for (d, v) in decade_maxima(&cells) {
        report.summary.stat(&format!("max_ratio_near_1e{d}"), v);
    }
    Ok(report)
}
