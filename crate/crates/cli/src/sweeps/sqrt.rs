//! Square-root sets against exhaustive tables, with cross-checks through the
//! prime, prime-power and CRT routes, and the gcd sum.

use crate::config::{Command, SqrtGrid};
use crate::coverage::touch;
use crate::report::Report;
use crate::RunError;
use rayon::prelude::*;
use sqrtsieve::arith::{gcd, ResidueClass};
use sqrtsieve::sqrtmod::root_table;
use sqrtsieve::{
    crt_combine, factorize, gcd_average, inv_mod, jacobi, sqrt_mod, sqrt_mod_prime,
    sqrt_mod_prime_power,
};

#[derive(Clone, Debug, PartialEq)]
pub struct ModulusCheck {
    pub r: u64,
    pub omega: usize,
    /// `sum_s |roots(s)|`, which must equal `r`.
    pub total_roots: u64,
    /// Residues whose computed root set differs from the table, or fails a
    /// cross-check.
    pub mismatches: u64,
    pub gcd_sum: u64,
    /// `gcd_sum / (r d(r))`, at most 1.
    pub gcd_ratio: f64,
}

impl ModulusCheck {
    pub fn passed(&self) -> bool {
        self.mismatches == 0 && self.total_roots == self.r && self.gcd_ratio <= 1.0
    }
}

pub fn check_modulus(r: u64) -> Result<ModulusCheck, RunError> {
    touch("factorize");
    touch("sqrt_mod");
    touch("jacobi");
    touch("inv_mod");
    touch("gcd_average");
    let fr = factorize(r)?;
    let table = root_table(r);
    let mut mismatches = 0u64;
    let mut total = 0u64;
    let prime_power = match fr.factors() {
        [(p, e)] => Some((*p, *e)),
        _ => None,
    };
    // split r = pe * rest for the CRT route
    let split = match fr.factors() {
        [(p, e), _, ..] => {
            let pe = p.pow(*e);
            Some((factorize(pe)?, factorize(r / pe)?))
        }
        _ => None,
    };
    for s in 0..r as i64 {
        let set = sqrt_mod(s, &fr)?;
        total += set.len() as u64;
        let mut ok = set.roots() == table[s as usize].as_slice();
        if jacobi(s, r)? == -1 {
            ok &= set.is_empty();
        }
        if let Some((p, e)) = prime_power {
            touch("sqrt_mod_prime_power");
            ok &= sqrt_mod_prime_power(s, p, e)?.roots() == set.roots();
            if e == 1 {
                touch("sqrt_mod_prime");
                ok &= sqrt_mod_prime(s, p)?.roots() == set.roots();
            }
        }
        if let Some((a, b)) = &split {
            touch("crt_combine");
            let (ra, rb) = (sqrt_mod(s, a)?, sqrt_mod(s, b)?);
            let mut combined = Vec::with_capacity(ra.len() * rb.len());
            for &x in ra.roots() {
                for &y in rb.roots() {
                    let parts = [
                        ResidueClass::new(x as i64, a.n())?,
                        ResidueClass::new(y as i64, b.n())?,
                    ];
                    combined.push(crt_combine(&parts)?.value());
                }
            }
            combined.sort_unstable();
            ok &= combined == set.roots();
        }
        if r > 1 && gcd(s as u64, r) == 1 && !set.is_empty() {
            // roots of s^-1 are the inverses of the roots of s
            let inv_s = inv_mod(s, r)?.value();
            let mut inv_roots: Vec<u64> = set
                .roots()
                .iter()
                .map(|&k| inv_mod(k as i64, r).map(|x| x.value()))
                .collect::<Result<_, _>>()?;
            inv_roots.sort_unstable();
            ok &= inv_roots == table[inv_s as usize];
        }
        if !ok {
            mismatches += 1;
        }
    }
    let gcd_sum = gcd_average(r, r)?;
    let direct: u64 = (1..=r).map(|m| gcd(r, m)).sum();
    if direct != gcd_sum {
        mismatches += 1;
    }
    Ok(ModulusCheck {
        r,
        omega: fr.factors().len(),
        total_roots: total,
        mismatches,
        gcd_sum,
        gcd_ratio: gcd_sum as f64 / (r * fr.divisor_count()) as f64,
    })
}

pub fn check_range(r_min: u64, r_max: u64) -> Result<Vec<ModulusCheck>, RunError> {
    let rs: Vec<u64> = (r_min..=r_max).filter(|r| r % 2 == 1).collect();
    rs.par_iter().map(|&r| check_modulus(r)).collect()
}

pub fn run(grid: &SqrtGrid, seed: u64) -> Result<Report, RunError> {
    let mut report = Report::new(
        Command::SqrtVerify,
        seed,
        &[
            "r",
            "omega",
            "total_roots",
            "mismatches",
            "gcd_sum",
            "gcd_ratio",
            "pass",
        ],
    );
    let checks = check_range(grid.r_min, grid.r_max)?;
    for m in &checks {
        report.summary.check(m.passed());
        report.push(vec![
            m.r.into(),
            m.omega.into(),
            m.total_roots.into(),
            m.mismatches.into(),
            m.gcd_sum.into(),
            m.gcd_ratio.into(),
            m.passed().into(),
        ]);
    }
    let worst = checks.iter().map(|m| m.gcd_ratio).fold(0.0, f64::max);
    report.summary.stat("max_gcd_ratio", worst);
    Ok(report)
}
