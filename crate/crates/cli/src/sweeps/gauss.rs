//! Closed-form Gauss sums against direct evaluation on complete grids.

use crate::config::{Command, GaussGrid};
use crate::coverage::touch;
use crate::report::Report;
use crate::RunError;
use num_complex::Complex64;
use rayon::prelude::*;
use sqrtsieve::gauss::{gauss_closed_form_row, DirectRows};
use sqrtsieve::{epsilon_c, gauss_closed_form, gauss_direct, GaussSumParams};

/// Comparison over all `(a, b)` modulo one `c`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModulusCheck {
    pub c: u64,
    pub cells: u64,
    /// Cells where the closed form is exactly zero (`gcd(a, c)` not dividing `b`).
    pub zero_cells: u64,
    pub max_dev: f64,
    /// `1e-6 sqrt(c)`.
    pub tol: f64,
}

impl ModulusCheck {
    pub fn passed(&self) -> bool {
        self.max_dev <= self.tol
    }
}

pub fn check_modulus(c: u64) -> Result<ModulusCheck, RunError> {
    let rows = DirectRows::new(c)?;
    touch("gauss_direct");
    touch("gauss_closed_form");
    touch("epsilon_c");
    let mut max_dev = 0f64;
    let mut zero_cells = 0;
    for a in 0..c as i64 {
        let direct = rows.row(a)?;
        let closed = gauss_closed_form_row(a, c)?;
        for (d, z) in direct.iter().zip(&closed) {
            if *z == Complex64::new(0.0, 0.0) {
                zero_cells += 1;
            }
            max_dev = max_dev.max((d - z).norm());
        }
    }
    // the rows must agree with the single-cell evaluators
    let probe = GaussSumParams::new(1, 1, c)?;
    let cell_dev = (gauss_direct(&probe)? - gauss_closed_form(&probe)?).norm();
    let eps = epsilon_c(c)?;
    let quarter = Complex64::new(0.0, 1.0).powu(((c % 4) / 2) as u32);
    let eps_dev = (eps - quarter).norm();
    Ok(ModulusCheck {
        c,
        cells: c * c,
        zero_cells,
        max_dev: max_dev.max(cell_dev).max(eps_dev),
        tol: 1e-6 * (c as f64).sqrt(),
    })
}

pub fn check_range(c_min: u64, c_max: u64) -> Result<Vec<ModulusCheck>, RunError> {
    let cs: Vec<u64> = (c_min..=c_max).filter(|c| c % 2 == 1).collect();
    cs.par_iter().map(|&c| check_modulus(c)).collect()
}

pub fn run(grid: &GaussGrid, seed: u64) -> Result<Report, RunError> {
    let mut report = Report::new(
        Command::GaussVerify,
        seed,
        &[
            "c",
            "cells",
            "zero_cells",
            "max_dev",
            "tol",
            "ratio",
            "pass",
        ],
    );
    let checks = check_range(grid.c_min, grid.c_max)?;
    let mut worst = 0f64;
    for m in &checks {
        report.summary.check(m.passed());
        worst = worst.max(m.max_dev / m.tol);
        report.push(vec![
            m.c.into(),
            m.cells.into(),
            m.zero_cells.into(),
            m.max_dev.into(),
            m.tol.into(),
            (m.max_dev / m.tol).into(),
            m.passed().into(),
        ]);
    }
    report
        .summary
        .stat("cells", checks.iter().map(|m| m.cells).sum::<u64>());
    report.summary.stat("max_dev_over_tol", worst);
    Ok(report)
}
