//! Modular square roots, quadratic Gauss sums, mixed character sums modulo
//! prime powers, bilinear sums over square roots and Farey fractions with
//! square denominators.

pub mod arith;
pub mod bilinear;
pub mod error;
pub mod expsum;
pub mod gauss;
pub mod phase;
pub mod rng;
pub mod sieve;
pub mod sqrtmod;

pub use arith::{
    crt_combine, factorize, gcd_average, inv_mod, jacobi, FactoredModulus, ResidueClass,
};
pub use bilinear::{
    bound_thm1, bound_thm2, bound_trivial, energy_count, sigma_eval, BilinearInstance, EnergyCount,
    PhaseFn,
};
pub use error::{Error, Result};
pub use expsum::{
    critical_points, esum_bound_check, esum_eval, esum_multiplicativity_check, mixed_sum_eval,
    partial_sum_alpha, CochraneContext, ExpSumParams, MixedSum,
};
pub use gauss::{epsilon_c, gauss_closed_form, gauss_direct, GaussSumParams};
pub use sieve::{
    farey_count, lemma41_bound, ls_bound_eval, ls_quadform_square_moduli, ls_relation_check,
    params_pipeline, thm3_bound, FareyQuery, LsInstance, LsParams, Rational,
};
pub use sqrtmod::{sqrt_mod, sqrt_mod_prime, sqrt_mod_prime_power, SquareRootSet};

pub type ComplexValue = num_complex::Complex64;

/// Names of the library operations reachable from the command line.
pub const OPERATIONS: [&str; 29] = [
    "factorize",
    "jacobi",
    "inv_mod",
    "crt_combine",
    "gcd_average",
    "sqrt_mod_prime",
    "sqrt_mod_prime_power",
    "sqrt_mod",
    "gauss_direct",
    "epsilon_c",
    "gauss_closed_form",
    "esum_eval",
    "esum_multiplicativity_check",
    "mixed_sum_eval",
    "partial_sum_alpha",
    "critical_points",
    "esum_bound_check",
    "sigma_eval",
    "energy_count",
    "bound_thm1",
    "bound_thm2",
    "bound_trivial",
    "farey_count",
    "ls_quadform_square_moduli",
    "ls_bound_eval",
    "ls_relation_check",
    "params_pipeline",
    "thm3_bound",
    "lemma41_bound",
];
