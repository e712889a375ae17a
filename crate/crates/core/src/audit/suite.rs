//! Named audit suites with deterministic, batch-parallel sampling.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::laws::{forward_conditional, laplace_pdf, laplace_sample, relax_sample, tighten_sample};
use crate::level::{LevelPair, PrivacyLevel};
use crate::mechanism::{naive_composition_release, MechanismState, PrivateVector};
use crate::process::JumpChain;
use crate::quadrature::{integrate_with_breaks, DEFAULT_TOLERANCE};
use crate::rng::RandomSource;

use super::numeric::{
    chapman_kolmogorov_audit, kernel_normalization_audit, laplace_slope_audit,
    lipschitz_grid_audit, marginal_consistency_audit, naive_pair_slope_audit, GridSpec,
};
use super::report::AuditReport;
use super::statistical::{
    atom_fraction_audit, atom_mass_audit, correlation_audit, independence_audit, ks_one_sample,
    ks_two_sample, mse_audit, ATOM_TOLERANCE, CORRELATION_TOLERANCE, MIN_OBSERVATIONS,
};

const BATCH: usize = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Marginals,
    Atoms,
    Correlation,
    Mse,
    Markov,
    Privacy,
    Tighten,
    All,
}

impl Suite {
    pub const NAMES: [&'static str; 8] = [
        "marginals",
        "atoms",
        "correlation",
        "mse",
        "markov",
        "privacy",
        "tighten",
        "all",
    ];

    fn parts(self) -> Vec<Suite> {
        match self {
            Suite::All => vec![
                Suite::Marginals,
                Suite::Atoms,
                Suite::Correlation,
                Suite::Mse,
                Suite::Markov,
                Suite::Privacy,
                Suite::Tighten,
            ],
            s => vec![s],
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let idx = match self {
            Suite::Marginals => 0,
            Suite::Atoms => 1,
            Suite::Correlation => 2,
            Suite::Mse => 3,
            Suite::Markov => 4,
            Suite::Privacy => 5,
            Suite::Tighten => 6,
            Suite::All => 7,
        };
        f.write_str(Suite::NAMES[idx])
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "marginals" => Suite::Marginals,
            "atoms" => Suite::Atoms,
            "correlation" => Suite::Correlation,
            "mse" => Suite::Mse,
            "markov" => Suite::Markov,
            "privacy" => Suite::Privacy,
            "tighten" => Suite::Tighten,
            "all" => Suite::All,
            other => {
                return Err(Error::InvalidArgument(format!(
                    "unknown audit suite {other:?}; expected one of {}",
                    Suite::NAMES.join(", ")
                )))
            }
        })
    }
}

/// Draws `n` values, batch `i` from its own stream `(seed, tag, i)`. The
/// result does not depend on the thread count.
pub fn par_draw<T, F>(seed: u64, tag: u64, n: usize, draw: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut RandomSource) -> T + Sync,
{
    let batches = n.div_ceil(BATCH);
    let stream_seed = seed.wrapping_mul(0x100_0000_01b3).wrapping_add(tag);
    (0..batches)
        .into_par_iter()
        .flat_map_iter(|b| {
            let mut rng = RandomSource::for_batch(stream_seed, b as u64);
            let len = BATCH.min(n - b * BATCH);
            (0..len).map(|_| draw(&mut rng)).collect::<Vec<_>>()
        })
        .collect()
}

fn lvl(v: f64) -> PrivacyLevel {
    PrivacyLevel::new(v).expect("suite levels are valid")
}

fn pair(a: f64, b: f64) -> LevelPair {
    LevelPair::from_values(a, b).expect("suite level pairs are ordered")
}

/// `(x, y)` with `x ~ Laplace(1/ε1)` and `y` drawn by relaxation to `ε2`.
pub fn relax_pairs(seed: u64, tag: u64, n: usize, p: LevelPair) -> Vec<(f64, f64)> {
    par_draw(seed, tag, n, |rng| {
        let x = laplace_sample(p.lower(), rng);
        let y = relax_sample(x, p, rng).expect("finite input");
        (x, y)
    })
}

/// `(y, x)` with `y ~ Laplace(1/ε2)` and `x` drawn by tightening to `ε1`.
pub fn tighten_pairs(seed: u64, tag: u64, n: usize, p: LevelPair) -> Vec<(f64, f64)> {
    par_draw(seed, tag, n, |rng| {
        let y = laplace_sample(p.upper(), rng);
        let x = tighten_sample(y, p, rng).expect("finite input");
        (y, x)
    })
}

fn chain_at(levels: &[f64], rng: &mut RandomSource) -> Vec<f64> {
    let child = RandomSource::seed_from_u64(rng.next_u64());
    let mut chain = JumpChain::init(lvl(levels[0]), child);
    levels
        .iter()
        .map(|&e| chain.query(lvl(e)).expect("increasing levels never bridge"))
        .collect()
}

/// Probability under `V ~ Laplace(1/ε)` of an unchanged step to `ε'`,
/// by quadrature of the forward atom mass against the marginal.
pub fn lazy_step_probability(eps: f64, next: f64) -> Result<f64> {
    let p = LevelPair::from_values(eps, next)?;
    let reach = 50.0 / eps;
    Ok(integrate_with_breaks(
        |x| forward_conditional(x, p).atom_mass * laplace_pdf(x, p.lower()).unwrap_or(0.0),
        -reach,
        reach,
        &[0.0],
        DEFAULT_TOLERANCE,
    )?
    .value)
}

fn marginals(seed: u64, n: usize) -> Result<Vec<AuditReport>> {
    let base = par_draw(seed, 1, n, |rng| laplace_sample(lvl(1.0), rng));
    let relaxed: Vec<f64> = relax_pairs(seed, 2, n, pair(1.0, 2.0)).into_iter().map(|p| p.1).collect();
    let chained = par_draw(seed, 3, n, |rng| chain_at(&[1.0, 2.0, 3.0], rng));
    let mut reports = vec![
        ks_one_sample(&base, lvl(1.0))?.renamed("marginal_laplace_eps1"),
        ks_one_sample(&relaxed, lvl(2.0))?.renamed("marginal_relax_1_to_2"),
    ];
    for (i, e) in [1.0, 2.0, 3.0].into_iter().enumerate() {
        let values: Vec<f64> = chained.iter().map(|c| c[i]).collect();
        reports.push(ks_one_sample(&values, lvl(e))?.renamed(format!("marginal_chain_level_{e}")));
    }
    reports.push(marginal_consistency_audit(pair(1.0, 2.0), 100)?);
    let xs: Vec<f64> = (-20..=20).map(|i| i as f64 * 0.25).collect();
    reports.push(kernel_normalization_audit(pair(1.0, 2.0), &xs)?);
    Ok(reports)
}

fn atoms(seed: u64, n: usize) -> Result<Vec<AuditReport>> {
    [(1.0, 2.0), (1.0, 4.0), (2.0, 3.0)]
        .into_iter()
        .enumerate()
        .map(|(i, (a, b))| {
            let p = pair(a, b);
            Ok(atom_mass_audit(&relax_pairs(seed, 10 + i as u64, n, p), p)?
                .renamed(format!("atom_mass_{a}_to_{b}")))
        })
        .collect()
}

fn correlation(seed: u64, n: usize) -> Result<Vec<AuditReport>> {
    [(1.0, 2.0), (1.0, 4.0)]
        .into_iter()
        .enumerate()
        .map(|(i, (a, b))| {
            let p = pair(a, b);
            Ok(
                correlation_audit(&relax_pairs(seed, 20 + i as u64, n, p), a / b, CORRELATION_TOLERANCE)?
                    .renamed(format!("correlation_{a}_to_{b}")),
            )
        })
        .collect()
}

fn mse(seed: u64, n: usize) -> Result<Vec<AuditReport>> {
    let mut reports = Vec::new();
    for (i, e) in [0.5, 1.0, 2.0].into_iter().enumerate() {
        let s = par_draw(seed, 30 + i as u64, n, |rng| laplace_sample(lvl(e), rng));
        reports.push(mse_audit(&s, lvl(e), 1)?.renamed(format!("mse_scalar_eps_{e}")));
    }
    let zero = PrivateVector::new(vec![0.0; 3])?;
    for (i, e) in [0.5, 1.0, 2.0].into_iter().enumerate() {
        let vectors: Vec<f64> = par_draw(seed, 60 + i as u64, n, |rng| {
            let mut m = MechanismState::new(zero.clone(), 1.0, rng.next_u64()).expect("valid state");
            m.release(lvl(e)).expect("first release").values
        })
        .into_iter()
        .flatten()
        .collect();
        reports.push(mse_audit(&vectors, lvl(e), 3)?.renamed(format!("mse_vector_n3_eps_{e}")));
    }

    // Baseline: at (1, 1.1) the naive second response pays for ε2 - ε1.
    let one = PrivateVector::new(vec![0.0])?;
    let naive: Vec<f64> = par_draw(seed, 34, n, |rng| {
        let (_, second) = naive_composition_release(&one, lvl(1.0), lvl(1.1), 1.0, rng.next_u64())
            .expect("ordered levels");
        second.values[0]
    });
    let gap = lvl(1.1 - 1.0);
    reports.push(mse_audit(&naive, gap, 1)?.renamed("baseline_naive_second_mse"));
    let gradual: Vec<f64> = relax_pairs(seed, 35, n, pair(1.0, 1.1)).into_iter().map(|p| p.1).collect();
    reports.push(mse_audit(&gradual, lvl(1.1), 1)?.renamed("baseline_gradual_second_mse"));
    Ok(reports)
}

fn markov(seed: u64, n: usize) -> Result<Vec<AuditReport>> {
    let direct: Vec<f64> = par_draw(seed, 40, n, |rng| chain_at(&[1.0, 3.0], rng)[1]);
    let stepped: Vec<f64> = par_draw(seed, 41, n, |rng| chain_at(&[1.0, 2.0, 3.0], rng)[2]);
    let mut reports = vec![ks_two_sample(&direct, &stepped)?.renamed("markov_direct_vs_two_step")];

    let paths = par_draw(seed, 42, n, |rng| chain_at(&[1.0, 2.0, 3.0], rng));
    let frac = |pred: &dyn Fn(&Vec<f64>) -> bool| paths.iter().filter(|p| pred(p)).count() as f64 / n as f64;
    let first = frac(&|p| p[0].to_bits() == p[1].to_bits());
    let second = frac(&|p| p[1].to_bits() == p[2].to_bits());
    let first_target = lazy_step_probability(1.0, 2.0)?;
    let second_target = lazy_step_probability(2.0, 3.0)?;
    let dev = (first - first_target).abs().max((second - second_target).abs());
    reports.push(
        AuditReport::new("chain_atom_pattern_m3", dev, ATOM_TOLERANCE, n)
            .with("fraction_v1_eq_v2", first)
            .with("target_v1_eq_v2", first_target)
            .with("fraction_v2_eq_v3", second)
            .with("target_v2_eq_v3", second_target),
    );
    reports.push(chapman_kolmogorov_audit(
        lvl(1.0),
        lvl(2.0),
        lvl(3.0),
        &GridSpec::new(4.0, 0.25)?,
    )?);
    Ok(reports)
}

fn privacy() -> Result<Vec<AuditReport>> {
    let p = pair(1.0, 2.0);
    let grid = GridSpec::lipschitz_default(p);
    Ok(vec![
        lipschitz_grid_audit(p, &grid)?,
        naive_pair_slope_audit(p, &grid)?,
        laplace_slope_audit(lvl(1.0), &GridSpec::new(10.0, 0.005)?)?,
    ])
}

fn tighten(seed: u64, n: usize) -> Result<Vec<AuditReport>> {
    let p = pair(1.0, 2.0);
    let pairs = tighten_pairs(seed, 50, n, p);
    let tightened: Vec<f64> = pairs.iter().map(|q| q.1).collect();
    let increments: Vec<(f64, f64)> = pairs.iter().map(|&(y, x)| (x - y, y)).collect();
    Ok(vec![
        ks_one_sample(&tightened, p.lower())?.renamed("tighten_marginal_2_to_1"),
        independence_audit(&increments)?.renamed("tighten_increment_independence"),
        atom_fraction_audit(&pairs, p.atom_mass(), ATOM_TOLERANCE)?.renamed("tighten_atom_2_to_1"),
    ])
}

/// Runs `suite` with `n` Monte-Carlo samples per statistical audit. Every
/// report records the seed.
pub fn run_suite(suite: Suite, seed: u64, n: usize) -> Result<Vec<AuditReport>> {
    if n < MIN_OBSERVATIONS {
        return Err(Error::TooFewSamples {
            got: n,
            min: MIN_OBSERVATIONS,
        });
    }
    let mut reports = Vec::new();
    for part in suite.parts() {
        let batch = match part {
            Suite::Marginals => marginals(seed, n)?,
            Suite::Atoms => atoms(seed, n)?,
            Suite::Correlation => correlation(seed, n)?,
            Suite::Mse => mse(seed, n)?,
            Suite::Markov => markov(seed, n)?,
            Suite::Privacy => privacy()?,
            Suite::Tighten => tighten(seed, n)?,
            Suite::All => unreachable!("expanded by parts()"),
        };
        reports.extend(batch.into_iter().map(|r| r.with("seed", seed).with("suite", part.to_string())));
    }
    Ok(reports)
}
