use std::fmt;

use crate::error::{Error, Result};

/// A Lipschitz privacy level ε; positive and finite.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct PrivacyLevel(f64);

impl PrivacyLevel {
    pub fn new(value: f64) -> Result<Self> {
        if value.is_finite() && value > 0.0 {
            Ok(PrivacyLevel(value))
        } else {
            Err(Error::InvalidLevel(value))
        }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }
}

impl fmt::Display for PrivacyLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl TryFrom<f64> for PrivacyLevel {
    type Error = Error;

    fn try_from(value: f64) -> Result<Self> {
        PrivacyLevel::new(value)
    }
}

/// Two levels with `eps1 <= eps2`: the stricter and the looser release.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelPair {
    eps1: PrivacyLevel,
    eps2: PrivacyLevel,
}

impl LevelPair {
    pub fn new(eps1: PrivacyLevel, eps2: PrivacyLevel) -> Result<Self> {
        if eps1.value() <= eps2.value() {
            Ok(LevelPair { eps1, eps2 })
        } else {
            Err(Error::Ordering {
                lower: eps1.value(),
                upper: eps2.value(),
            })
        }
    }

    /// Convenience constructor from raw values.
    pub fn from_values(eps1: f64, eps2: f64) -> Result<Self> {
        LevelPair::new(PrivacyLevel::new(eps1)?, PrivacyLevel::new(eps2)?)
    }

    #[inline]
    pub fn eps1(self) -> f64 {
        self.eps1.value()
    }

    #[inline]
    pub fn eps2(self) -> f64 {
        self.eps2.value()
    }

    pub fn lower(self) -> PrivacyLevel {
        self.eps1
    }

    pub fn upper(self) -> PrivacyLevel {
        self.eps2
    }

    /// `(eps1 / eps2)^2`, the total probability that the two noises coincide.
    pub fn atom_mass(self) -> f64 {
        let r = self.eps1() / self.eps2();
        r * r
    }
}
