//! Acceptance suite: one PASS/FAIL line per criterion. A criterion listed in
//! `UNATTAINABLE` may fail without failing the suite; its reason is printed.

use sqrtsieve_cli::config::{BilinearGrid, Coefficients, Thm3Grid};
use sqrtsieve_cli::sweeps::{bilinear, expsum, farey, gauss, sieve, sqrt, thm3, BOUND_SLACK};
use sqrtsieve_cli::RunError;
use std::process::Command;
use std::time::Instant;

const SEED: u64 = 20_240_611;

/// Criteria whose stated bound is violated by exact computation, with the
/// reason. The identities behind them are still asserted.
const UNATTAINABLE: &[(&str, &str)] = &[(
    "AC5",
    "the prime-modulus bound 3 sqrt(p) gcd(p, g4)^1/2 is exceeded by the exhaustive grid: the split shape \
     sum chi(y(y-1)) e((A y + v y^-1) / p) reaches 3.479 sqrt(p) at p = 163. The phase v y^-1 has poles at \
     0 and infinity besides the two zeros of y(y-1), so the Weil estimate gives 4 sqrt(p), which holds",
)];

struct Outcome {
    pass: bool,
    detail: String,
    /// Failures that no documented reason covers, such as a broken identity.
    hard_failure: bool,
}

fn pass_if(pass: bool, detail: String) -> Outcome {
    Outcome {
        pass,
        detail,
        hard_failure: !pass,
    }
}

type Check = fn() -> Result<Outcome, RunError>;

fn ac1() -> Result<Outcome, RunError> {
    let checks = gauss::check_range(1, 999)?;
    let failed = checks.iter().filter(|c| !c.passed()).count();
    let worst = checks.iter().map(|c| c.max_dev / c.tol).fold(0.0, f64::max);
    let cells: u64 = checks.iter().map(|c| c.cells).sum();
    let zero: u64 = checks.iter().map(|c| c.zero_cells).sum();
    Ok(pass_if(
        failed == 0,
        format!(
            "{} moduli, {cells} cells ({zero} zero), {failed} failing, max dev/tol {worst:.3e}",
            checks.len()
        ),
    ))
}

fn ac2() -> Result<Outcome, RunError> {
    let checks = sqrt::check_range(1, 2000)?;
    let failed = checks.iter().filter(|c| !c.passed()).count();
    let mismatches: u64 = checks.iter().map(|c| c.mismatches).sum();
    let bad_totals = checks.iter().filter(|c| c.total_roots != c.r).count();
    Ok(pass_if(
        failed == 0,
        format!(
            "{} moduli, {mismatches} root-set mismatches, {bad_totals} root totals != r",
            checks.len()
        ),
    ))
}

fn ac3() -> Result<Outcome, RunError> {
    let checks = expsum::splitting_batch(SEED, 10_000, 100_000)?;
    let failed = checks.iter().filter(|c| !c.passed()).count();
    let splits: usize = checks.iter().map(|c| c.splits).sum();
    let worst = checks.iter().map(|c| c.max_dev / c.tol).fold(0.0, f64::max);
    let largest = checks.iter().map(|c| c.r2).max().unwrap_or(0);
    Ok(pass_if(
        failed == 0,
        format!("{} tuples, {splits} splits, largest r2 {largest}, {failed} failing, max dev/tol {worst:.3e}", checks.len()),
    ))
}

fn ac4() -> Result<Outcome, RunError> {
    let mut parts = Vec::new();
    let mut ok = true;
    for (p, m) in [(3u64, 3u32), (3, 4), (3, 7), (5, 3), (5, 5), (7, 3), (7, 4)] {
        let checks = expsum::local_batch(SEED, p, m, 500)?;
        let broken = checks.iter().filter(|c| !c.identities_hold()).count();
        let over = checks.iter().filter(|c| !c.within_bound()).count();
        let crit = checks.iter().map(|c| c.crit_ratio).fold(0.0, f64::max);
        let with_crit = checks.iter().filter(|c| c.critical > 0).count();
        ok &= broken == 0 && over == 0 && checks.len() >= 500;
        parts.push(format!(
            "{}: n={} crit={with_crit} off!=0 {broken} over {over} max {crit:.4}",
            p.pow(m),
            checks.len()
        ));
    }
    Ok(pass_if(ok, parts.join("; ")))
}

fn ac5() -> Result<Outcome, RunError> {
    let grids = expsum::ground_checks(200)?;
    let worst = grids
        .iter()
        .max_by(|a, b| a.ratio().total_cmp(&b.ratio()))
        .expect("primes up to 200");
    let unit = grids.iter().map(|g| g.unit_constant()).fold(0.0, f64::max);
    let square = grids
        .iter()
        .map(|g| g.grid.square / g.bound_square)
        .fold(0.0, f64::max);
    let normal = expsum::normal_form_deviation(SEED, 2000, 200)?;
    let stated = grids.iter().all(|g| g.ratio() <= 1.0 + BOUND_SLACK);
    let weil = unit <= 4.0 * (1.0 + BOUND_SLACK) && square <= 1.0 + BOUND_SLACK;
    let identity = normal <= 1e-8;
    Ok(Outcome {
        pass: stated && identity,
        detail: format!(
            "{} primes, max |S| / bound {:.4} at p = {}, unit-case max |S| / sqrt(p) {unit:.4} \
             (4 sqrt(p) {}), square case max |S| / 3p {square:.4}, normal-form deviation {normal:.1e}",
            grids.len(),
            worst.ratio(),
            worst.grid.p,
            if weil { "holds" } else { "FAILS" },
        ),
        hard_failure: !identity || !weil,
    })
}

fn ac6() -> Result<Outcome, RunError> {
    let checks = bilinear::oracle_batch(SEED, 1000, 255)?;
    let failed = checks.iter().filter(|c| !c.passed()).count();
    let moduli = checks
        .iter()
        .map(|c| c.r)
        .collect::<std::collections::BTreeSet<_>>()
        .len();
    let worst = checks.iter().map(|c| c.dev / c.tol).fold(0.0, f64::max);
    Ok(pass_if(
        failed == 0,
        format!(
            "{} cases over {moduli} moduli, {failed} failing, max dev/tol {worst:.3e}",
            checks.len()
        ),
    ))
}

fn ratio_grid(coefficients: Coefficients) -> BilinearGrid {
    BilinearGrid {
        sweep_count: 200,
        r_min: 101,
        r_max: 9999,
        squarefull: vec![
            243, 375, 675, 1125, 1323, 2187, 3375, 3993, 5103, 6125, 6561, 8575, 9261,
        ],
        l_exponents: vec![0.25, 0.5],
        m_exponents: vec![0.5, 0.75, 1.0],
        coefficients,
        ..BilinearGrid::default()
    }
}

fn decade_summary(cells: &[bilinear::RatioCell]) -> (f64, f64, f64) {
    let d = bilinear::decade_maxima(cells);
    let max = cells.iter().map(|c| c.ratio()).fold(0.0, f64::max);
    (
        max,
        d.get(&3).copied().unwrap_or(f64::NAN),
        d.get(&4).copied().unwrap_or(f64::NAN),
    )
}

fn ac7() -> Result<Outcome, RunError> {
    let grid = ratio_grid(Coefficients::Random);
    let rs = bilinear::sweep_moduli(
        SEED,
        grid.sweep_count,
        grid.r_min,
        grid.r_max,
        &grid.squarefull,
    );
    let squarefull = rs
        .iter()
        .filter(|&&r| !sqrtsieve::factorize(r).is_ok_and(|f| f.is_squarefree()))
        .count();
    let cells = bilinear::ratio_sweep(&rs, &grid, Coefficients::Random, SEED)?;
    let identity = cells
        .iter()
        .all(|c| c.squarefree_dev.is_none_or(|d| d <= 1e-12));
    let (max, near3, near4) = decade_summary(&cells);
    let ones = bilinear::ratio_sweep(&rs, &grid, Coefficients::Ones, SEED)?;
    let (omax, o3, o4) = decade_summary(&ones);
    println!(
        "     info: all-ones beta on the same grid: max {omax:.4}, near 1e3 {o3:.4}, near 1e4 {o4:.4} \
         (the M-term of the bound is attained by the diagonal, so the ratio approaches a constant)"
    );
    Ok(pass_if(
        identity && max <= 100.0 && near4 <= near3 && rs.len() == 200,
        format!(
            "{} moduli ({squarefull} not squarefree), {} cells, random unit beta with aligned alpha: max {max:.4}, \
             near 1e3 {near3:.4}, near 1e4 {near4:.4}, squarefree branch identity {}",
            rs.len(),
            cells.len(),
            if identity { "holds" } else { "FAILS" },
        ),
    ))
}

fn ac8() -> Result<Outcome, RunError> {
    let queries = farey::query_batch(SEED, 200, 60)?;
    let bad_queries = queries.iter().filter(|c| !c.passed()).count();
    let grid = Thm3Grid {
        q: vec![16, 24, 32, 48, 64],
        r_lo: 0.6,
        r_hi: 0.9,
        b_per_r: 0,
    };
    let cells = thm3::sweep(&grid, SEED)?;
    let bad_cells = cells.iter().filter(|c| !c.oracle_ok()).count();
    let worst = cells.iter().map(|c| c.ratio()).fold(0.0, f64::max);
    let by_q = thm3::max_ratio_by_q(&cells);
    let pts: Vec<(f64, f64)> = by_q.iter().map(|(&q, &v)| (q as f64, v)).collect();
    let slope = sqrtsieve_cli::sweeps::log_slope(&pts);
    for (q, r, count, scaled) in thm3::three_quarter_table(&cells) {
        println!("     info: Q = {q:>2}, r = {r:>2} (Q^3/4 = {:.1}): max count {count}, count / Q^7/16 = {scaled:.4}", (q as f64).powf(0.75));
    }
    let per_q: Vec<String> = by_q.iter().map(|(q, v)| format!("{q}:{v:.3}")).collect();
    Ok(pass_if(
        bad_queries == 0 && bad_cells == 0 && worst <= 100.0 && slope <= 0.0,
        format!(
            "{} queries ({bad_queries} wrong), {} cells ({bad_cells} wrong), max count/bound {worst:.4}, \
             per-Q max [{}], log-log slope {slope:.3}",
            queries.len(),
            cells.len(),
            per_q.join(" "),
        ),
    ))
}

fn ac9() -> Result<Outcome, RunError> {
    let checks = sieve::classical_batch(SEED, 100, 300, 30)?;
    let violations = checks.iter().filter(|c| c.lhs > c.bound).count();
    let worst = checks.iter().map(|c| c.lhs / c.bound).fold(0.0, f64::max);
    Ok(pass_if(
        violations == 0,
        format!(
            "{} instances, {violations} violations, max lhs/bound {worst:.6}",
            checks.len()
        ),
    ))
}

fn cli_output(args: &[&str]) -> Result<Vec<u8>, RunError> {
    let out = Command::new(env!("CARGO_BIN_EXE_sqrtsieve"))
        .args(args)
        .output()
        .map_err(|e| RunError::Io(e.to_string()))?;
    if !out.status.success() {
        return Err(RunError::Io(format!("{args:?} exited with {}", out.status)));
    }
    Ok(out.stdout)
}

fn ac10() -> Result<Outcome, RunError> {
    let mut runs = 0;
    let mut differing = Vec::new();
    for command in [
        "gauss-verify",
        "sqrt-verify",
        "expsum-verify",
        "bilinear-sweep",
        "farey-count",
        "sieve-sweep",
        "thm3-sweep",
    ] {
        for format in ["csv", "json"] {
            let base = ["--seed", "77", "--format", format];
            let a = cli_output(&[&[command][..], &base, &["--threads", "1"]].concat())?;
            let b = cli_output(&[&[command][..], &base, &["--threads", "1"]].concat())?;
            let c = cli_output(&[&[command][..], &base, &["--threads", "3"]].concat())?;
            runs += 3;
            if a != b || a != c || a.is_empty() {
                differing.push(format!("{command}/{format}"));
            }
        }
    }
    Ok(pass_if(
        differing.is_empty(),
        format!("{runs} runs, differing: [{}]", differing.join(" ")),
    ))
}

fn main() {
    let criteria: [(&str, Check); 10] = [
        ("AC1", ac1),
        ("AC2", ac2),
        ("AC3", ac3),
        ("AC4", ac4),
        ("AC5", ac5),
        ("AC6", ac6),
        ("AC7", ac7),
        ("AC8", ac8),
        ("AC9", ac9),
        ("AC10", ac10),
    ];
    let mut unexpected = Vec::new();
    for (id, check) in criteria {
        let start = Instant::now();
        let outcome = check().unwrap_or_else(|e| Outcome {
            pass: false,
            detail: format!("error: {e}"),
            hard_failure: true,
        });
        let secs = start.elapsed().as_secs_f64();
        println!(
            "{id} {} ({secs:.1}s) {}",
            if outcome.pass { "PASS" } else { "FAIL" },
            outcome.detail
        );
        if !outcome.pass {
            match UNATTAINABLE.iter().find(|(u, _)| *u == id) {
                Some((_, reason)) if !outcome.hard_failure => {
                    println!("     documented as unattainable: {reason}")
                }
                _ => unexpected.push(id),
            }
        }
    }
    if !unexpected.is_empty() {
        println!("unexpected failures: {}", unexpected.join(", "));
        std::process::exit(1);
    }
}
