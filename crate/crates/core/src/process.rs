//! One sampled path of the lazy noise process `{V_ε}`.
//!
//! The path is stored as the finite list of levels queried so far together
//! with the noise at each level. New levels above the stored range are drawn
//! with the forward kernel conditioned on the top point; new levels below it
//! with the backward kernel conditioned on the bottom point. By the Markov
//! property nothing else on the path is needed.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hexfloat;
use crate::laws::{laplace_sample, relax_sample, tighten_sample};
use crate::level::{LevelPair, PrivacyLevel};
use crate::rng::{RandomSource, RngState};

pub const CHAIN_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainPoint {
    pub eps: PrivacyLevel,
    pub noise: f64,
}

/// Levels strictly increasing, noise finite, at least one point. The random
/// source travels with the chain so a persisted chain resumes
/// deterministically.
#[derive(Debug, Clone, PartialEq)]
pub struct JumpChain {
    points: Vec<ChainPoint>,
    rng: RandomSource,
}

/// Where a requested level falls relative to the stored ones.
enum Slot {
    Stored(usize),
    Above,
    Below,
    Between(usize),
}

impl JumpChain {
    /// Starts a path with a single Laplace(1/ε) draw.
    pub fn init(eps: PrivacyLevel, mut rng: RandomSource) -> Self {
        let noise = laplace_sample(eps, &mut rng);
        JumpChain {
            points: vec![ChainPoint { eps, noise }],
            rng,
        }
    }

    pub fn points(&self) -> &[ChainPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn min_level(&self) -> PrivacyLevel {
        self.points[0].eps
    }

    pub fn max_level(&self) -> PrivacyLevel {
        self.points[self.points.len() - 1].eps
    }

    pub fn rng_state(&self) -> RngState {
        self.rng.state()
    }

    fn locate(&self, eps: f64) -> Slot {
        match self
            .points
            .binary_search_by(|p| p.eps.value().total_cmp(&eps))
        {
            Ok(i) => Slot::Stored(i),
            Err(0) => Slot::Below,
            Err(i) if i == self.points.len() => Slot::Above,
            Err(i) => Slot::Between(i),
        }
    }

    /// Stored noise at exactly `eps`, if any.
    pub fn get(&self, eps: PrivacyLevel) -> Option<f64> {
        match self.locate(eps.value()) {
            Slot::Stored(i) => Some(self.points[i].noise),
            _ => None,
        }
    }

    /// Fails with [`Error::BridgeUnsupported`] when `eps` lies strictly
    /// between two stored levels.
    pub fn check_query(&self, eps: PrivacyLevel) -> Result<()> {
        match self.locate(eps.value()) {
            Slot::Between(i) => Err(Error::BridgeUnsupported {
                requested: eps.value(),
                lower: self.points[i - 1].eps.value(),
                upper: self.points[i].eps.value(),
            }),
            _ => Ok(()),
        }
    }

    /// Noise at level `eps`, extending the path by one point if `eps` is
    /// outside the stored range. Repeated queries return the stored value.
    pub fn query(&mut self, eps: PrivacyLevel) -> Result<f64> {
        match self.locate(eps.value()) {
            Slot::Stored(i) => Ok(self.points[i].noise),
            Slot::Above => {
                let top = self.points[self.points.len() - 1];
                let pair = LevelPair::new(top.eps, eps)?;
                let noise = relax_sample(top.noise, pair, &mut self.rng)?;
                self.points.push(ChainPoint { eps, noise });
                Ok(noise)
            }
            Slot::Below => {
                let bottom = self.points[0];
                let pair = LevelPair::new(eps, bottom.eps)?;
                let noise = tighten_sample(bottom.noise, pair, &mut self.rng)?;
                self.points.insert(0, ChainPoint { eps, noise });
                Ok(noise)
            }
            Slot::Between(i) => Err(Error::BridgeUnsupported {
                requested: eps.value(),
                lower: self.points[i - 1].eps.value(),
                upper: self.points[i].eps.value(),
            }),
        }
    }

    /// Number of consecutive stored levels whose noise differs.
    pub fn jump_count(&self) -> usize {
        self.points
            .windows(2)
            .filter(|w| w[0].noise.to_bits() != w[1].noise.to_bits())
            .count()
    }

    /// Drops interior points whose noise equals their predecessor's, keeping
    /// only the jump levels and both end points. Levels removed this way
    /// become bridge queries afterwards.
    pub fn compact(&mut self) {
        let n = self.points.len();
        if n <= 2 {
            return;
        }
        let mut kept = Vec::with_capacity(n);
        kept.push(self.points[0]);
        for i in 1..n - 1 {
            if self.points[i].noise.to_bits() != self.points[i - 1].noise.to_bits() {
                kept.push(self.points[i]);
            }
        }
        kept.push(self.points[n - 1]);
        self.points = kept;
    }

    pub fn to_record(&self) -> ChainRecord {
        ChainRecord {
            version: CHAIN_FORMAT_VERSION,
            eps_levels: self.points.iter().map(|p| hexfloat::format(p.eps.value())).collect(),
            noise_values: self.points.iter().map(|p| hexfloat::format(p.noise)).collect(),
            rng_state: self.rng.state(),
        }
    }

    pub fn from_record(record: &ChainRecord) -> Result<Self> {
        if record.version != CHAIN_FORMAT_VERSION {
            return Err(Error::Parse(format!(
                "unsupported chain format version {}",
                record.version
            )));
        }
        if record.eps_levels.is_empty() || record.eps_levels.len() != record.noise_values.len() {
            return Err(Error::Parse(format!(
                "chain needs matching non-empty level and noise lists, got {} and {}",
                record.eps_levels.len(),
                record.noise_values.len()
            )));
        }
        let mut points: Vec<ChainPoint> = Vec::with_capacity(record.eps_levels.len());
        for (e, v) in record.eps_levels.iter().zip(&record.noise_values) {
            let eps = PrivacyLevel::new(hexfloat::parse(e)?)
                .map_err(|err| Error::Parse(err.to_string()))?;
            let noise = hexfloat::parse(v)?;
            if let Some(prev) = points.last() {
                if prev.eps.value() >= eps.value() {
                    return Err(Error::Parse("chain levels must be strictly increasing".into()));
                }
            }
            points.push(ChainPoint { eps, noise });
        }
        Ok(JumpChain {
            points,
            rng: RandomSource::from_state(&record.rng_state)?,
        })
    }

    /// One JSON object, no trailing newline.
    pub fn serialize(&self) -> Vec<u8> {
        serde_json::to_vec(&self.to_record()).expect("chain record always serializes")
    }

    pub fn deserialize(bytes: &[u8]) -> Result<Self> {
        let record: ChainRecord = serde_json::from_slice(bytes)?;
        JumpChain::from_record(&record)
    }
}

/// Text persistence record for a [`JumpChain`]. Floats are hexadecimal so
/// the round trip is bit-exact.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainRecord {
    pub version: u32,
    pub eps_levels: Vec<String>,
    pub noise_values: Vec<String>,
    pub rng_state: RngState,
}
