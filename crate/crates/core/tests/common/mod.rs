//! Test-only oracles, written against the closed-form densities directly so
//! they do not share code paths with the samplers they check.
#![allow(dead_code)]

use gradual_core::quadrature::integrate_with_breaks;
use gradual_core::{LevelPair, PrivacyLevel, RandomSource};

pub fn lvl(v: f64) -> PrivacyLevel {
    PrivacyLevel::new(v).unwrap()
}

pub fn pair(a: f64, b: f64) -> LevelPair {
    LevelPair::from_values(a, b).unwrap()
}

/// Laplace(1/ε) draw from an exponential magnitude and a fair sign; a
/// different construction from the library's single-uniform inverse CDF.
pub fn oracle_laplace(eps: f64, rng: &mut RandomSource) -> f64 {
    let magnitude = -rng.uniform_nonzero().ln() / eps;
    rng.sign() * magnitude
}

/// Closed-form continuous part of the two-level joint density.
pub fn joint_continuous(x: f64, y: f64, e1: f64, e2: f64) -> f64 {
    e1 * (e2 * e2 - e1 * e1) / (4.0 * e2) * (-e1 * (x - y).abs() - e2 * y.abs()).exp()
}

/// Rejection sampler for the normalized continuous part of the joint law.
/// Proposal: `y ~ Laplace(1/ε2)`, `x = y + Laplace(2/ε1)`. The density
/// ratio target/proposal is bounded, and the acceptance test is evaluated
/// from the closed form.
pub fn oracle_joint_continuous(e1: f64, e2: f64, rng: &mut RandomSource) -> (f64, f64) {
    let cont_mass = 1.0 - (e1 / e2).powi(2);
    loop {
        let y = oracle_laplace(e2, rng);
        let x = y + oracle_laplace(0.5 * e1, rng);
        let proposal = 0.5 * e2 * (-e2 * y.abs()).exp() * 0.25 * e1 * (-0.5 * e1 * (x - y).abs()).exp();
        let target = joint_continuous(x, y, e1, e2) / cont_mass;
        // sup target/proposal = 2
        if rng.uniform() * 2.0 * proposal < target {
            return (x, y);
        }
    }
}

pub fn integrate_line<F: Fn(f64) -> f64>(f: F, reach: f64, breaks: &[f64]) -> f64 {
    integrate_with_breaks(f, -reach, reach, breaks, 1e-11).unwrap().value
}

/// Total diagonal mass of the joint law, by quadrature of its coefficient.
pub fn diagonal_mass(e1: f64, e2: f64) -> f64 {
    integrate_line(|y| e1 * e1 / (2.0 * e2) * (-e2 * y.abs()).exp(), 50.0 / e2, &[0.0])
}

/// Probability that the forward step `e1 → e2` leaves a Laplace(1/e1) value
/// unchanged, by quadrature of the closed-form atom weight.
pub fn forward_atom_probability(e1: f64, e2: f64) -> f64 {
    integrate_line(
        |x| (e1 / e2) * (-(e2 - e1) * x.abs()).exp() * 0.5 * e1 * (-e1 * x.abs()).exp(),
        50.0 / e1,
        &[0.0],
    )
}

/// Probability that both steps of `e1 → e2 → e3` are lazy.
pub fn double_atom_probability(e1: f64, e2: f64, e3: f64) -> f64 {
    integrate_line(
        |x| {
            (e1 / e2) * (-(e2 - e1) * x.abs()).exp()
                * (e2 / e3)
                * (-(e3 - e2) * x.abs()).exp()
                * 0.5
                * e1
                * (-e1 * x.abs()).exp()
        },
        50.0 / e1,
        &[0.0],
    )
}

pub fn fraction_equal(pairs: &[(f64, f64)]) -> f64 {
    pairs.iter().filter(|(a, b)| a.to_bits() == b.to_bits()).count() as f64 / pairs.len() as f64
}
