//! Bilinear sums over modular square roots,
//!
//! ```text
//! Sigma = sum_{|l| <= L} sum_{1 <= m <= M} alpha_l beta_m
//!         sum_{k^2 = j m (mod r)} e_r(l k) e(l f(m)),
//! ```
//!
//! the additive-energy counts of the roots, and the bounds they are measured
//! against.

use crate::arith::{gcd_i, mul_mod, reduce, FactoredModulus};
use crate::error::{invalid, Error, Result};
use crate::phase::{unit_real, CompensatedSum, RootTable};
use crate::sqrtmod::sqrt_mod;
use num_complex::Complex64;
use rand::Rng;

/// The real phase `f` in `e(l f(m))`.
#[derive(Clone, Debug, PartialEq)]
pub enum PhaseFn {
    Zero,
    /// `f(x) = -amplitude * sqrt(x)`; `sup |f'| = |amplitude| / 2`, at `x = 1`.
    ScaledSqrt {
        amplitude: f64,
    },
    /// `values[m - 1] = f(m)`.
    Tabulated(Vec<f64>),
}

impl PhaseFn {
    pub fn value(&self, m: u64) -> f64 {
        match self {
            PhaseFn::Zero => 0.0,
            PhaseFn::ScaledSqrt { amplitude } => -amplitude * (m as f64).sqrt(),
            PhaseFn::Tabulated(values) => values[(m - 1) as usize],
        }
    }

    /// Analytic `sup |f'|` on `[1, inf)` when known.
    pub fn derivative_sup(&self) -> Option<f64> {
        match self {
            PhaseFn::Zero => Some(0.0),
            PhaseFn::ScaledSqrt { amplitude } => Some(amplitude.abs() / 2.0),
            PhaseFn::Tabulated(_) => None,
        }
    }
}

/// Inputs of one bilinear sum. `alpha[i]` is `alpha_l` for `l = i - L`;
/// `beta[i]` is `beta_m` for `m = i + 1`. `f_bound` is a bound `F` for `|f'|`
/// on `[1, M]` with `F L <= 1`.
#[derive(Clone, Debug)]
pub struct BilinearInstance {
    r: FactoredModulus,
    j: i64,
    l: u64,
    m: u64,
    alpha: Vec<Complex64>,
    beta: Vec<Complex64>,
    phase: PhaseFn,
    f_bound: f64,
}

impl BilinearInstance {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        r: FactoredModulus,
        j: i64,
        l: u64,
        m: u64,
        alpha: Vec<Complex64>,
        beta: Vec<Complex64>,
        phase: PhaseFn,
        f_bound: f64,
    ) -> Result<Self> {
        r.require_odd()?;
        let n = r.n();
        if gcd_i(j, n) != 1 {
            return Err(Error::NotCoprime(j.unsigned_abs(), n));
        }
        if l > n || m == 0 || m > n {
            return invalid(format!(
                "need L <= r and 1 <= M <= r (L = {l}, M = {m}, r = {n})"
            ));
        }
        if alpha.len() as u64 != 2 * l + 1 {
            return invalid(format!(
                "alpha has {} entries, expected {}",
                alpha.len(),
                2 * l + 1
            ));
        }
        if beta.len() as u64 != m {
            return invalid(format!("beta has {} entries, expected {m}", beta.len()));
        }
        if let PhaseFn::Tabulated(v) = &phase {
            if (v.len() as u64) < m {
                return invalid(format!("phase table has {} values, expected {m}", v.len()));
            }
        }
        if f_bound.is_nan() || f_bound < 0.0 || f_bound * l as f64 > 1.0 + 1e-12 {
            return invalid(format!(
                "derivative bound F = {f_bound} must satisfy 0 <= F <= 1/L"
            ));
        }
        if let Some(sup) = phase.derivative_sup() {
            if sup > f_bound * (1.0 + 1e-12) {
                return invalid(format!("F = {f_bound} is below sup |f'| = {sup}"));
            }
        }
        Ok(BilinearInstance {
            r,
            j,
            l,
            m,
            alpha,
            beta,
            phase,
            f_bound,
        })
    }

    pub fn r(&self) -> &FactoredModulus {
        &self.r
    }

    pub fn j(&self) -> i64 {
        self.j
    }

    /// `L`.
    pub fn l_range(&self) -> u64 {
        self.l
    }

    /// `M`.
    pub fn m_range(&self) -> u64 {
        self.m
    }

    pub fn alpha(&self) -> &[Complex64] {
        &self.alpha
    }

    pub fn beta(&self) -> &[Complex64] {
        &self.beta
    }

    pub fn phase(&self) -> &PhaseFn {
        &self.phase
    }

    pub fn f_bound(&self) -> f64 {
        self.f_bound
    }

    pub fn alpha_l2(&self) -> f64 {
        self.alpha.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn beta_max(&self) -> f64 {
        self.beta.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest admissible Weyl shift, `floor(min(1/(L F), M))`.
    pub fn max_h(&self) -> u64 {
        let lf = self.l as f64 * self.f_bound;
        if lf <= 0.0 {
            self.m
        } else {
            ((1.0 / lf).floor() as u64).min(self.m)
        }
    }

    fn check_h(&self, h: u64) -> Result<()> {
        if h == 0 || h > self.max_h() {
            return invalid(format!("H = {h} outside [1, {}]", self.max_h()));
        }
        Ok(())
    }

    /// Same instance with a different `alpha`.
    pub fn with_alpha(&self, alpha: Vec<Complex64>) -> Result<Self> {
        if alpha.len() != self.alpha.len() {
            return invalid(format!(
                "alpha has {} entries, expected {}",
                alpha.len(),
                self.alpha.len()
            ));
        }
        Ok(BilinearInstance {
            alpha,
            ..self.clone()
        })
    }
}

/// `T_l = sum_m beta_m e(l f(m)) sum_{k^2 = j m} e_r(l k)` for each
/// `l in [-L, L]`, so that `Sigma = sum_l alpha_l T_l`.
pub fn inner_sums(inst: &BilinearInstance) -> Result<Vec<Complex64>> {
    let r = inst.r.n();
    let big_l = inst.l as i64;
    let table = RootTable::new(r);
    let width = (2 * big_l + 1) as usize;
    let mut acc = vec![CompensatedSum::new(); width];
    let jr = reduce(inst.j, r);
    let mut root_sums = vec![Complex64::new(0.0, 0.0); width];
    for m in 1..=inst.m {
        let beta = inst.beta[(m - 1) as usize];
        if beta == Complex64::new(0.0, 0.0) {
            continue;
        }
        let roots = sqrt_mod(mul_mod(jr, m % r, r) as i64, &inst.r)?;
        if roots.is_empty() {
            continue;
        }
        for (i, slot) in root_sums.iter_mut().enumerate() {
            let l = reduce(i as i64 - big_l, r);
            *slot = roots
                .roots()
                .iter()
                .map(|&k| table.get(mul_mod(l, k, r)))
                .sum();
        }
        let w = unit_real(inst.phase.value(m));
        let mut wl = w.conj().powi(big_l as i32);
        for (slot, sum) in acc.iter_mut().zip(&root_sums) {
            slot.add(beta * wl * sum);
            wl *= w;
        }
    }
    Ok(acc.iter().map(CompensatedSum::value).collect())
}

/// Exact `Sigma`, summing over every root of `k^2 = j m (mod r)`.
pub fn sigma_eval(inst: &BilinearInstance) -> Result<Complex64> {
    let t = inner_sums(inst)?;
    let mut acc = CompensatedSum::new();
    for (a, x) in inst.alpha.iter().zip(&t) {
        acc.add(a * x);
    }
    Ok(acc.value())
}

/// `alpha_l = conj(T_l) / |T|_2`, the unit-norm choice maximizing `|Sigma|`
/// for the instance's `beta` and `f`.
pub fn aligned_alpha(inst: &BilinearInstance) -> Result<Vec<Complex64>> {
    let t = inner_sums(inst)?;
    let norm = t.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm == 0.0 {
        let mut a = vec![Complex64::new(0.0, 0.0); t.len()];
        a[t.len() / 2] = Complex64::new(1.0, 0.0);
        return Ok(a);
    }
    Ok(t.iter().map(|z| z.conj() / norm).collect())
}

pub fn ones(n: usize) -> Vec<Complex64> {
    vec![Complex64::new(1.0, 0.0); n]
}

/// Independent uniformly random unit-modulus values.
pub fn unit_phases<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<Complex64> {
    (0..n).map(|_| unit_real(rng.random::<f64>())).collect()
}

/// Parses one complex number per line as `re im`. Blank lines and lines
/// starting with `#` are skipped; errors carry the 1-based line number.
pub fn parse_coefficients(text: &str) -> Result<Vec<Complex64>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let parsed = match fields.as_slice() {
            [re, im] => re.parse::<f64>().ok().zip(im.parse::<f64>().ok()),
            _ => None,
        };
        match parsed {
            Some((re, im)) if re.is_finite() && im.is_finite() => out.push(Complex64::new(re, im)),
            _ => return invalid(format!("line {}: expected `re im`, found `{line}`", i + 1)),
        }
    }
    Ok(out)
}

/// Number of pairs of roots `(k1, k2)`, `k_i^2 = j m_i`, with `d` the shift.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EnergyCount {
    /// Symmetric representative in `(-r/2, r/2]`.
    pub d: i64,
    pub count: u64,
}

fn check_energy_args(r: &FactoredModulus, j: i64, m: u64, h: u64) -> Result<()> {
    r.require_odd()?;
    if gcd_i(j, r.n()) != 1 {
        return Err(Error::NotCoprime(j.unsigned_abs(), r.n()));
    }
    if h == 0 || h > m || 2 * m > r.n() {
        return invalid(format!(
            "need 1 <= H <= M <= r/2 (H = {h}, M = {m}, r = {})",
            r.n()
        ));
    }
    Ok(())
}

/// `A(d)` for every `d mod r`: the number of `(m1, m2)` in `[1, M]^2` with
/// `|m1 - m2| <= H` and roots `k1 - k2 = d (mod r)`, indexed by `d in [0, r)`.
pub fn energy_profile(r: &FactoredModulus, j: i64, m: u64, h: u64) -> Result<Vec<u64>> {
    check_energy_args(r, j, m, h)?;
    let n = r.n();
    let jr = reduce(j, n);
    let roots: Vec<Vec<u64>> = (1..=m)
        .map(|x| sqrt_mod(mul_mod(jr, x, n) as i64, r).map(|s| s.roots().to_vec()))
        .collect::<Result<_>>()?;
    let mut profile = vec![0u64; n as usize];
    for m1 in 1..=m {
        let lo = m1.saturating_sub(h).max(1);
        let hi = (m1 + h).min(m);
        for k1 in &roots[(m1 - 1) as usize] {
            for m2 in lo..=hi {
                for k2 in &roots[(m2 - 1) as usize] {
                    profile[((k1 + n - k2) % n) as usize] += 1;
                }
            }
        }
    }
    Ok(profile)
}

/// `(-r/2, r/2]` representative of `d mod r`.
pub fn symmetric_residue(d: i64, r: u64) -> i64 {
    let x = reduce(d, r);
    if 2 * x > r {
        x as i64 - r as i64
    } else {
        x as i64
    }
}

/// `A(d)` for a single shift.
pub fn energy_count(r: &FactoredModulus, j: i64, m: u64, h: u64, d: i64) -> Result<EnergyCount> {
    let profile = energy_profile(r, j, m, h)?;
    let n = r.n();
    Ok(EnergyCount {
        d: symmetric_residue(d, n),
        count: profile[reduce(d, n) as usize],
    })
}

fn norms(inst: &BilinearInstance) -> f64 {
    inst.alpha_l2() * inst.beta_max()
}

/// `(H^-1/2 L^1/2 M + H^1/4 L^1/4 M + H^-1/4 L^1/4 M^3/4 r^1/4) |alpha|_2 |beta|_inf`.
pub fn bound_thm1(inst: &BilinearInstance, h: u64) -> Result<f64> {
    inst.check_h(h)?;
    let (h, l, m, r) = (h as f64, inst.l as f64, inst.m as f64, inst.r.n() as f64);
    let shape = h.powf(-0.5) * l.sqrt() * m
        + h.powf(0.25) * l.powf(0.25) * m
        + h.powf(-0.25) * l.powf(0.25) * m.powf(0.75) * r.powf(0.25);
    Ok(shape * norms(inst))
}

/// Both branches of the refined bound and their minimum.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Thm2Bound {
    pub first: f64,
    pub second: f64,
    pub min: f64,
}

/// First branch `H^-1/2 L^1/2 M^1/2 r^1/2 + M^1/2 r^1/4 + M`; second branch
/// `H^-1/2 L^1/2 M + H^-1/2 M^1/2 r^1/2 s0^-1/4 + L^1/2 M^1/2 r^1/4 s1^1/8 + M`,
/// both times `|alpha|_2 |beta|_inf`.
pub fn bound_thm2(inst: &BilinearInstance, h: u64) -> Result<Thm2Bound> {
    if 2 * inst.m > inst.r.n() {
        return invalid(format!("M = {} exceeds r/2", inst.m));
    }
    inst.check_h(h)?;
    let s0 = inst.r.squarefree_part() as f64;
    let s1 = inst.r.squarefull_part() as f64;
    let (first, second) = thm2_shapes(
        h as f64,
        inst.l as f64,
        inst.m as f64,
        inst.r.n() as f64,
        s0,
        s1,
    );
    let k = norms(inst);
    Ok(Thm2Bound {
        first: first * k,
        second: second * k,
        min: first.min(second) * k,
    })
}

/// The two bracketed expressions of [`bound_thm2`] for raw parameters.
pub fn thm2_shapes(h: f64, l: f64, m: f64, r: f64, s0: f64, s1: f64) -> (f64, f64) {
    let hi = h.powf(-0.5);
    let first = hi * l.sqrt() * m.sqrt() * r.sqrt() + m.sqrt() * r.powf(0.25) + m;
    let second = hi * l.sqrt() * m
        + hi * m.sqrt() * r.sqrt() * s0.powf(-0.25)
        + l.sqrt() * m.sqrt() * r.powf(0.25) * s1.powf(0.125)
        + m;
    (first, second)
}

/// `L^1/2 M |alpha|_2 |beta|_inf`.
pub fn bound_trivial(inst: &BilinearInstance) -> f64 {
    (inst.l as f64).sqrt() * inst.m as f64 * norms(inst)
}

/// `L^1/2 M^5/4 r^-1/4 + L^1/4 M^7/8 r^1/8`, the shape for `f = 0` and
/// `H = sqrt(r / M)`.
pub fn corollary1_shape(l: f64, m: f64, r: f64) -> f64 {
    l.sqrt() * m.powf(1.25) * r.powf(-0.25) + l.powf(0.25) * m.powf(0.875) * r.powf(0.125)
}

/// `L^1/2 r^1/2 + M^1/2 r^1/4 + M`, the shape for `f = 0` and `H = M`.
pub fn corollary2_shape(l: f64, m: f64, r: f64) -> f64 {
    l.sqrt() * r.sqrt() + m.sqrt() * r.powf(0.25) + m
}
