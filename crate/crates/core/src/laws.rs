//! Single-level Laplace law, the two-level joint law, and the forward
//! (relax) and backward (tighten) transition kernels between two levels.
//!
//! With `ε1 <= ε2` the joint density of `(V1, V2)` is
//!
//! ```text
//! l(x, y) = ε1²/(2ε2) e^{-ε2|y|} δ(x - y)
//!         + ε1(ε2² - ε1²)/(4ε2) e^{-ε1|x - y| - ε2|y|}
//! ```
//!
//! whose marginals are Laplace(1/ε1) and Laplace(1/ε2). Everything is
//! evaluated in log space first and exponentiated at the boundary.

use crate::error::{Error, Result};
use crate::level::{LevelPair, PrivacyLevel};
use crate::rng::RandomSource;

/// Levels above this are treated as ε = ∞ by [`relax_sample`], which then
/// returns zero noise.
pub const LARGE_LEVEL_GUARD: f64 = 1e12;

fn check_finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must be finite, got {v}")))
    }
}

/// `ln((ε/2) e^{-ε|x|})`.
pub fn laplace_log_pdf(x: f64, eps: PrivacyLevel) -> Result<f64> {
    check_finite("x", x)?;
    let e = eps.value();
    Ok((0.5 * e).ln() - e * x.abs())
}

/// `(ε/2) e^{-ε|x|}`.
pub fn laplace_pdf(x: f64, eps: PrivacyLevel) -> Result<f64> {
    laplace_log_pdf(x, eps).map(f64::exp)
}

/// Laplace(1/ε) distribution function.
pub fn laplace_cdf(x: f64, eps: PrivacyLevel) -> f64 {
    let e = eps.value();
    if x < 0.0 {
        0.5 * (e * x).exp()
    } else {
        1.0 - 0.5 * (-e * x).exp()
    }
}

/// Draws Laplace(1/ε) noise by inverting the distribution function.
pub fn laplace_sample(eps: PrivacyLevel, rng: &mut RandomSource) -> f64 {
    let w = rng.uniform_open() - 0.5;
    // -sgn(w) ln(1 - 2|w|) / ε
    let magnitude = -(-2.0 * w.abs()).ln_1p() / eps.value();
    if w < 0.0 {
        -magnitude
    } else {
        magnitude
    }
}

/// Both components of the joint density at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointDensityValue {
    /// Coefficient of `δ(x - y)`; nonzero only when `x == y` bit-exactly.
    pub diagonal_coefficient: f64,
    pub continuous_density: f64,
}

/// Log-space form of [`JointDensityValue`]; absent components are `-inf`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointLogDensity {
    pub log_diagonal: f64,
    pub log_continuous: f64,
}

/// The two-level joint law with its normalizing constants precomputed.
#[derive(Debug, Clone, Copy)]
pub struct JointLaw {
    pair: LevelPair,
    log_diag_const: f64,
    log_cont_const: f64,
}

impl JointLaw {
    pub fn new(pair: LevelPair) -> Self {
        let (e1, e2) = (pair.eps1(), pair.eps2());
        let log_diag_const = 2.0 * e1.ln() - (2.0 * e2).ln();
        let log_cont_const = if e1 == e2 {
            f64::NEG_INFINITY
        } else {
            e1.ln() + (e2 - e1).ln() + (e2 + e1).ln() - (4.0 * e2).ln()
        };
        JointLaw {
            pair,
            log_diag_const,
            log_cont_const,
        }
    }

    pub fn pair(&self) -> LevelPair {
        self.pair
    }

    /// `ln(ε1²/(2ε2)) - ε2|y|`, the log of the diagonal coefficient at `(y, y)`.
    #[inline]
    pub fn log_diagonal(&self, y: f64) -> f64 {
        self.log_diag_const - self.pair.eps2() * y.abs()
    }

    #[inline]
    pub fn log_continuous(&self, x: f64, y: f64) -> f64 {
        self.log_cont_const - self.pair.eps1() * (x - y).abs() - self.pair.eps2() * y.abs()
    }

    pub fn log_density(&self, x: f64, y: f64) -> JointLogDensity {
        JointLogDensity {
            log_diagonal: if x == y {
                self.log_diagonal(y)
            } else {
                f64::NEG_INFINITY
            },
            log_continuous: self.log_continuous(x, y),
        }
    }

    pub fn density(&self, x: f64, y: f64) -> JointDensityValue {
        let log = self.log_density(x, y);
        JointDensityValue {
            diagonal_coefficient: log.log_diagonal.exp(),
            continuous_density: log.log_continuous.exp(),
        }
    }
}

pub fn joint_log_pdf(x: f64, y: f64, pair: LevelPair) -> Result<JointLogDensity> {
    check_finite("x", x)?;
    check_finite("y", y)?;
    Ok(JointLaw::new(pair).log_density(x, y))
}

pub fn joint_pdf(x: f64, y: f64, pair: LevelPair) -> Result<JointDensityValue> {
    check_finite("x", x)?;
    check_finite("y", y)?;
    Ok(JointLaw::new(pair).density(x, y))
}

/// Law of `V2` given `V1 = x`: an atom at `x` plus three continuous branches
/// (`y <= 0`, `y` between 0 and `x`, `y` beyond `x`, all mirrored by the sign
/// of `x`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionalLaw {
    pub atom_location: f64,
    pub atom_mass: f64,
    pub branch_weights: [f64; 3],
    pub params: LevelPair,
    pub source_noise: f64,
}

pub fn forward_conditional(x: f64, pair: LevelPair) -> ConditionalLaw {
    let (e1, e2) = (pair.eps1(), pair.eps2());
    let gap = e2 - e1;
    let ax = x.abs();
    let log_decay = -gap * ax;
    let decay = log_decay.exp();
    let atom_mass = ((e1 / e2).ln() + log_decay).exp();
    let outer = gap / (2.0 * e2);
    let branch_weights = [
        outer,
        (e1 + e2) / (2.0 * e2) * -log_decay.exp_m1(),
        outer * decay,
    ];
    ConditionalLaw {
        atom_location: x,
        atom_mass,
        branch_weights,
        params: pair,
        source_noise: x,
    }
}

impl ConditionalLaw {
    /// Log of the continuous part of the kernel at `y`.
    pub fn log_continuous_density(&self, y: f64) -> f64 {
        let (e1, e2) = (self.params.eps1(), self.params.eps2());
        if e1 == e2 {
            return f64::NEG_INFINITY;
        }
        let x = self.source_noise;
        (e2 - e1).ln() + (e2 + e1).ln() - (2.0 * e2).ln() - e1 * (y - x).abs() - e2 * y.abs()
            + e1 * x.abs()
    }

    pub fn continuous_density(&self, y: f64) -> f64 {
        self.log_continuous_density(y).exp()
    }

    /// Draws from the kernel. The atom branch returns the conditioning value
    /// verbatim so laziness is observable as bit-exact equality.
    pub fn sample(&self, rng: &mut RandomSource) -> f64 {
        let x = self.source_noise;
        let (e1, e2) = (self.params.eps1(), self.params.eps2());
        let gap = e2 - e1;
        if gap == 0.0 {
            return x;
        }
        let mut w = rng.uniform();
        if w < self.atom_mass {
            return x;
        }
        w -= self.atom_mass;
        let sum_rate = e1 + e2;
        let ax = x.abs();
        let z = if w < self.branch_weights[0] {
            // z <= 0, density ∝ e^{(ε1+ε2) z}
            rng.uniform_nonzero().ln() / sum_rate
        } else if w < self.branch_weights[0] + self.branch_weights[1] {
            // 0 <= z <= |x|, density ∝ e^{-(ε2-ε1) z}
            let span = -(-gap * ax).exp_m1();
            let z = -(-rng.uniform_nonzero() * span).ln_1p() / gap;
            z.clamp(0.0, ax)
        } else {
            // z >= |x|, density ∝ e^{-(ε1+ε2) z}
            ax - rng.uniform_nonzero().ln() / sum_rate
        };
        // sgn(0) is undefined; the kernel at x = 0 is symmetric so either
        // sign gives the right law.
        let sign = if x > 0.0 {
            1.0
        } else if x < 0.0 {
            -1.0
        } else {
            rng.sign()
        };
        sign * z
    }
}

/// Draws `V2` given `V1 = x` for `ε1 <= ε2`.
pub fn relax_sample(x: f64, pair: LevelPair, rng: &mut RandomSource) -> Result<f64> {
    check_finite("x", x)?;
    if pair.eps1() == pair.eps2() {
        return Ok(x);
    }
    if pair.eps2() > LARGE_LEVEL_GUARD {
        return Ok(0.0);
    }
    Ok(forward_conditional(x, pair).sample(rng))
}

/// Law of `V1` given `V2 = y`: atom `(ε1/ε2)²` at `y`, otherwise `y` plus
/// independent Laplace(1/ε1) noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BackwardLaw {
    pub atom_location: f64,
    pub atom_mass: f64,
    pub params: LevelPair,
}

pub fn backward_conditional(y: f64, pair: LevelPair) -> BackwardLaw {
    BackwardLaw {
        atom_location: y,
        atom_mass: pair.atom_mass(),
        params: pair,
    }
}

impl BackwardLaw {
    pub fn log_continuous_density(&self, x: f64) -> f64 {
        let e1 = self.params.eps1();
        (1.0 - self.atom_mass).ln() + (0.5 * e1).ln() - e1 * (x - self.atom_location).abs()
    }

    pub fn continuous_density(&self, x: f64) -> f64 {
        self.log_continuous_density(x).exp()
    }

    pub fn sample(&self, rng: &mut RandomSource) -> f64 {
        let y = self.atom_location;
        if self.atom_mass >= 1.0 || rng.uniform() < self.atom_mass {
            y
        } else {
            y + laplace_sample(self.params.lower(), rng)
        }
    }
}

/// Draws `V1` given `V2 = y` for `ε1 <= ε2`. Needs only the released noisy
/// value, never the private data.
pub fn tighten_sample(y: f64, pair: LevelPair, rng: &mut RandomSource) -> Result<f64> {
    check_finite("y", y)?;
    Ok(backward_conditional(y, pair).sample(rng))
}
