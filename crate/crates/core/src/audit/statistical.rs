use crate::error::{Error, Result};
use crate::laws::laplace_cdf;
use crate::level::{LevelPair, PrivacyLevel};
use crate::stats;

use super::report::AuditReport;

/// Sample floor for the Kolmogorov–Smirnov audits.
pub const MIN_KS_SAMPLES: usize = 1_000;
/// Sample floor for the atom, correlation and MSE audits.
pub const MIN_OBSERVATIONS: usize = 10_000;

pub const ATOM_TOLERANCE: f64 = 0.01;
pub const CORRELATION_TOLERANCE: f64 = 0.01;
pub const INDEPENDENCE_TOLERANCE: f64 = 0.005;
pub const MSE_RELATIVE_TOLERANCE: f64 = 0.02;

fn require(got: usize, min: usize) -> Result<()> {
    if got < min {
        Err(Error::TooFewSamples { got, min })
    } else {
        Ok(())
    }
}

/// KS distance of `samples` against Laplace(1/ε); threshold `1.95/√N`.
pub fn ks_one_sample(samples: &[f64], eps: PrivacyLevel) -> Result<AuditReport> {
    require(samples.len(), MIN_KS_SAMPLES)?;
    let d = stats::ks_distance(samples, |x| laplace_cdf(x, eps));
    Ok(AuditReport::new(
        "ks_one_sample",
        d,
        stats::ks_threshold_one_sample(samples.len()),
        samples.len(),
    )
    .with("eps", eps.value()))
}

/// Two-sample KS distance; threshold `1.95·√((n+m)/(nm))`.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<AuditReport> {
    require(a.len().min(b.len()), MIN_KS_SAMPLES)?;
    let d = stats::ks_distance_two_sample(a, b);
    Ok(AuditReport::new(
        "ks_two_sample",
        d,
        stats::ks_threshold_two_sample(a.len(), b.len()),
        a.len() + b.len(),
    )
    .with("n_a", a.len())
    .with("n_b", b.len()))
}

/// Fraction of bit-exactly equal pairs against `target ± tolerance`.
pub fn atom_fraction_audit(pairs: &[(f64, f64)], target: f64, tolerance: f64) -> Result<AuditReport> {
    require(pairs.len(), MIN_OBSERVATIONS)?;
    let equal = pairs
        .iter()
        .filter(|(x, y)| x.to_bits() == y.to_bits())
        .count();
    let fraction = equal as f64 / pairs.len() as f64;
    Ok(
        AuditReport::new("atom_fraction", (fraction - target).abs(), tolerance, pairs.len())
            .with("empirical", fraction)
            .with("target", target),
    )
}

/// Laziness check: the fraction of unchanged pairs must be `(ε1/ε2)² ± 0.01`.
pub fn atom_mass_audit(pairs: &[(f64, f64)], pair: LevelPair) -> Result<AuditReport> {
    Ok(atom_fraction_audit(pairs, pair.atom_mass(), ATOM_TOLERANCE)?
        .renamed("atom_mass")
        .with("eps1", pair.eps1())
        .with("eps2", pair.eps2()))
}

/// Pearson correlation against `target ± tolerance`.
pub fn correlation_audit(pairs: &[(f64, f64)], target: f64, tolerance: f64) -> Result<AuditReport> {
    require(pairs.len(), MIN_OBSERVATIONS)?;
    let rho = stats::pearson(pairs);
    Ok(AuditReport::new("correlation", (rho - target).abs(), tolerance, pairs.len())
        .with("empirical", rho)
        .with("target", target))
}

/// Correlation between increment and conditioning value must vanish.
pub fn independence_audit(pairs: &[(f64, f64)]) -> Result<AuditReport> {
    Ok(correlation_audit(pairs, 0.0, INDEPENDENCE_TOLERANCE)?.renamed("independence"))
}

/// `samples` holds consecutive `n`-dimensional noise vectors. The mean
/// squared norm must be within 2% of `2n/ε²`.
pub fn mse_audit(samples: &[f64], eps: PrivacyLevel, n: usize) -> Result<AuditReport> {
    if n == 0 || samples.len() % n != 0 {
        return Err(Error::InvalidArgument(format!(
            "{} samples do not split into vectors of dimension {n}",
            samples.len()
        )));
    }
    let trials = samples.len() / n;
    require(trials, MIN_OBSERVATIONS)?;
    let mse = samples.iter().map(|v| v * v).sum::<f64>() / trials as f64;
    let target = 2.0 * n as f64 / (eps.value() * eps.value());
    Ok(AuditReport::new(
        "mse",
        (mse / target - 1.0).abs(),
        MSE_RELATIVE_TOLERANCE,
        trials,
    )
    .with("empirical", mse)
    .with("target", target)
    .with("eps", eps.value())
    .with("dimension", n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laws::laplace_sample;
    use crate::rng::RandomSource;

    fn lvl(v: f64) -> PrivacyLevel {
        PrivacyLevel::new(v).unwrap()
    }

    fn draws(eps: f64, n: usize, seed: u64) -> Vec<f64> {
        let mut rng = RandomSource::seed_from_u64(seed);
        (0..n).map(|_| laplace_sample(lvl(eps), &mut rng)).collect()
    }

    #[test]
    fn ks_accepts_true_law_and_rejects_wrong_scale() {
        let s = draws(1.0, 100_000, 1);
        assert!(ks_one_sample(&s, lvl(1.0)).unwrap().passed);
        let t = draws(2.0, 100_000, 2);
        assert!(!ks_one_sample(&t, lvl(1.0)).unwrap().passed);
    }

    #[test]
    fn floors_are_enforced() {
        assert!(matches!(
            ks_one_sample(&[0.0; 999], lvl(1.0)),
            Err(Error::TooFewSamples { got: 999, min: 1000 })
        ));
        assert!(atom_mass_audit(&[(0.0, 0.0); 100], LevelPair::from_values(1.0, 2.0).unwrap()).is_err());
        assert!(correlation_audit(&[(0.0, 1.0); 9_999], 0.0, 0.01).is_err());
        assert!(mse_audit(&[0.0; 100], lvl(1.0), 1).is_err());
    }

    #[test]
    fn mse_dimension_must_divide() {
        assert!(matches!(
            mse_audit(&[0.0; 30_001], lvl(1.0), 3),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn atom_audit_counts_exact_equality() {
        let mut pairs = vec![(1.0, 1.0); 2_500];
        pairs.extend(std::iter::repeat((1.0, 1.0 + f64::EPSILON)).take(7_500));
        let r = atom_mass_audit(&pairs, LevelPair::from_values(1.0, 2.0).unwrap()).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert!(r.passed);
    }

    #[test]
    fn mse_targets() {
        // Deterministic samples with known mean square.
        let s = vec![2.0f64.sqrt(); 10_000];
        assert!(mse_audit(&s, lvl(1.0), 1).unwrap().passed);
        let r = mse_audit(&vec![0.5f64.sqrt(); 30_000], lvl(2.0), 3).unwrap();
        assert_eq!(r.details["target"], 1.5);
        assert!(r.passed);
    }
}
