//! Vector-valued gradual release under ℓ1 adjacency `‖u - u'‖₁ <= α`.
//!
//! Each coordinate gets its own independent noise path. Internally the paths
//! are indexed by the Lipschitz level `ε_dp / α`; responses carry both.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hexfloat;
use crate::laws::{laplace_sample, tighten_sample};
use crate::level::{LevelPair, PrivacyLevel};
use crate::process::{ChainRecord, JumpChain};
use crate::rng::RandomSource;

pub const STATE_FORMAT_VERSION: u32 = 1;

/// The private data `u`: at least one finite entry.
#[derive(Debug, Clone, PartialEq)]
pub struct PrivateVector(Vec<f64>);

impl PrivateVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidArgument("private vector must not be empty".into()));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("private vector entry {v} is not finite")));
        }
        Ok(PrivateVector(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// A released noisy vector `y = u + V` with its privacy bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct Response {
    pub eps_dp: PrivacyLevel,
    pub eps_lipschitz: PrivacyLevel,
    pub values: Vec<f64>,
}

impl Response {
    pub fn to_record(&self) -> ResponseRecord {
        ResponseRecord {
            eps_dp: hexfloat::format(self.eps_dp.value()),
            eps_lipschitz: hexfloat::format(self.eps_lipschitz.value()),
            values: self.values.iter().copied().map(hexfloat::format).collect(),
            eps_dp_decimal: self.eps_dp.value(),
            values_decimal: self.values.clone(),
        }
    }

    pub fn from_record(record: &ResponseRecord) -> Result<Self> {
        let level = |s: &str| -> Result<PrivacyLevel> {
            PrivacyLevel::new(hexfloat::parse(s)?).map_err(|e| Error::Parse(e.to_string()))
        };
        let values = record
            .values
            .iter()
            .map(|v| hexfloat::parse(v))
            .collect::<Result<Vec<_>>>()?;
        if values.is_empty() {
            return Err(Error::Parse("response has no values".into()));
        }
        Ok(Response {
            eps_dp: level(&record.eps_dp)?,
            eps_lipschitz: level(&record.eps_lipschitz)?,
            values,
        })
    }
}

/// Line format of a released response. The hex fields are authoritative;
/// the decimal ones are for people.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResponseRecord {
    pub eps_dp: String,
    pub eps_lipschitz: String,
    pub values: Vec<String>,
    pub eps_dp_decimal: f64,
    pub values_decimal: Vec<f64>,
}

fn lipschitz_level(eps_dp: PrivacyLevel, alpha: f64) -> Result<PrivacyLevel> {
    PrivacyLevel::new(eps_dp.value() / alpha)
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha.is_finite() && alpha > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "adjacency scale must be positive and finite, got {alpha}"
        )))
    }
}

/// The owner's persistent release state: the data, one noise path per
/// coordinate, and every level released so far.
#[derive(Debug, Clone, PartialEq)]
pub struct MechanismState {
    data: PrivateVector,
    alpha: f64,
    seed: u64,
    /// `None` until the first release.
    chains: Option<Vec<JumpChain>>,
    /// Differential-privacy levels released so far, ascending.
    released: Vec<PrivacyLevel>,
}

impl MechanismState {
    pub fn new(data: PrivateVector, alpha: f64, seed: u64) -> Result<Self> {
        check_alpha(alpha)?;
        Ok(MechanismState {
            data,
            alpha,
            seed,
            chains: None,
            released: Vec::new(),
        })
    }

    pub fn data(&self) -> &PrivateVector {
        &self.data
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn dimension(&self) -> usize {
        self.data.len()
    }

    pub fn released_levels(&self) -> &[PrivacyLevel] {
        &self.released
    }

    pub fn chains(&self) -> Option<&[JumpChain]> {
        self.chains.as_deref()
    }

    /// Fails with [`Error::BridgeUnsupported`] (in differential-privacy
    /// levels) if `eps_dp` falls strictly between two released levels.
    pub fn check_release(&self, eps_dp: PrivacyLevel) -> Result<()> {
        let e = eps_dp.value();
        let idx = self.released.partition_point(|l| l.value() < e);
        if idx > 0 && idx < self.released.len() && self.released[idx].value() != e {
            return Err(Error::BridgeUnsupported {
                requested: e,
                lower: self.released[idx - 1].value(),
                upper: self.released[idx].value(),
            });
        }
        Ok(())
    }

    /// Releases `u + V` at differential-privacy level `eps_dp`. Releasing an
    /// already released level returns the identical response.
    pub fn release(&mut self, eps_dp: PrivacyLevel) -> Result<Response> {
        self.check_release(eps_dp)?;
        let eps_lip = lipschitz_level(eps_dp, self.alpha)?;
        let seed = self.seed;
        let chains = self.chains.get_or_insert_with(|| {
            (0..self.data.len())
                .map(|i| JumpChain::init(eps_lip, RandomSource::for_coordinate(seed, i as u64)))
                .collect()
        });
        let values = chains
            .iter_mut()
            .zip(self.data.values())
            .map(|(chain, u)| chain.query(eps_lip).map(|v| u + v))
            .collect::<Result<Vec<_>>>()?;
        if let Err(idx) = self
            .released
            .binary_search_by(|l| l.value().total_cmp(&eps_dp.value()))
        {
            self.released.insert(idx, eps_dp);
        }
        Ok(Response {
            eps_dp,
            eps_lipschitz: eps_lip,
            values,
        })
    }

    /// Text persistence: a header line followed by one chain record per
    /// coordinate (none before the first release).
    pub fn serialize(&self) -> String {
        let header = StateHeader {
            version: STATE_FORMAT_VERSION,
            n: self.data.len(),
            alpha: hexfloat::format(self.alpha),
            seed: self.seed,
            released_levels: self.released.iter().map(|l| hexfloat::format(l.value())).collect(),
            data: self.data.values().iter().copied().map(hexfloat::format).collect(),
        };
        let mut out = serde_json::to_string(&header).expect("header always serializes");
        out.push('\n');
        for chain in self.chains.iter().flatten() {
            out.push_str(&serde_json::to_string(&chain.to_record()).expect("record always serializes"));
            out.push('\n');
        }
        out
    }

    pub fn deserialize(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header: StateHeader =
            serde_json::from_str(lines.next().ok_or_else(|| Error::Parse("empty state".into()))?)?;
        if header.version != STATE_FORMAT_VERSION {
            return Err(Error::Parse(format!(
                "unsupported state format version {}",
                header.version
            )));
        }
        let data = header
            .data
            .iter()
            .map(|v| hexfloat::parse(v))
            .collect::<Result<Vec<_>>>()?;
        if data.len() != header.n {
            return Err(Error::Parse(format!(
                "header says n = {} but has {} data values",
                header.n,
                data.len()
            )));
        }
        let data = PrivateVector::new(data).map_err(|e| Error::Parse(e.to_string()))?;
        let alpha = hexfloat::parse(&header.alpha)?;
        check_alpha(alpha).map_err(|e| Error::Parse(e.to_string()))?;
        let released = header
            .released_levels
            .iter()
            .map(|s| PrivacyLevel::new(hexfloat::parse(s)?).map_err(|e| Error::Parse(e.to_string())))
            .collect::<Result<Vec<_>>>()?;
        if released.windows(2).any(|w| w[0].value() >= w[1].value()) {
            return Err(Error::Parse("released levels must be strictly increasing".into()));
        }
        let chains = lines
            .map(|l| {
                let record: ChainRecord = serde_json::from_str(l)?;
                JumpChain::from_record(&record)
            })
            .collect::<Result<Vec<_>>>()?;
        let chains = if released.is_empty() {
            if !chains.is_empty() {
                return Err(Error::Parse("chains present but nothing released".into()));
            }
            None
        } else {
            if chains.len() != header.n {
                return Err(Error::Parse(format!(
                    "expected {} chain records, found {}",
                    header.n,
                    chains.len()
                )));
            }
            for chain in &chains {
                let levels: Vec<f64> = chain.points().iter().map(|p| p.eps.value()).collect();
                let expected: Vec<f64> = released.iter().map(|l| l.value() / alpha).collect();
                if levels != expected {
                    return Err(Error::Parse(
                        "chain levels do not match the released levels".into(),
                    ));
                }
            }
            Some(chains)
        };
        Ok(MechanismState {
            data,
            alpha,
            seed: header.seed,
            chains,
            released,
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StateHeader {
    version: u32,
    n: usize,
    alpha: String,
    seed: u64,
    released_levels: Vec<String>,
    data: Vec<String>,
}

/// Produces a more private response from `response` alone: each coordinate
/// is kept with probability `(ε1/ε2)²`, otherwise shifted by independent
/// Laplace noise at the lower level. No access to the private data.
pub fn tighten_for_third_party(
    response: &Response,
    eps_dp_lower: PrivacyLevel,
    alpha: f64,
    rng: &mut RandomSource,
) -> Result<Response> {
    check_alpha(alpha)?;
    let lower = lipschitz_level(eps_dp_lower, alpha)?;
    let upper = lipschitz_level(response.eps_dp, alpha)?;
    let pair = LevelPair::new(lower, upper)?;
    let values = response
        .values
        .iter()
        .map(|&y| tighten_sample(y, pair, rng))
        .collect::<Result<Vec<_>>>()?;
    Ok(Response {
        eps_dp: eps_dp_lower,
        eps_lipschitz: lower,
        values,
    })
}

/// Baseline without coupling: independent Laplace noise at `ε1`, then
/// independent noise at `ε2 - ε1` so that the pair composes to `ε2`. The
/// second response reports its own level `ε2 - ε1`.
pub fn naive_composition_release(
    data: &PrivateVector,
    eps1: PrivacyLevel,
    eps2: PrivacyLevel,
    alpha: f64,
    seed: u64,
) -> Result<(Response, Response)> {
    check_alpha(alpha)?;
    if eps2.value() <= eps1.value() {
        return Err(Error::Ordering {
            lower: eps1.value(),
            upper: eps2.value(),
        });
    }
    let second_dp = PrivacyLevel::new(eps2.value() - eps1.value())?;
    let first_lip = lipschitz_level(eps1, alpha)?;
    let second_lip = lipschitz_level(second_dp, alpha)?;
    let (mut first, mut second) = (Vec::with_capacity(data.len()), Vec::with_capacity(data.len()));
    for (i, u) in data.values().iter().enumerate() {
        let mut rng = RandomSource::for_coordinate(seed, i as u64);
        first.push(u + laplace_sample(first_lip, &mut rng));
        second.push(u + laplace_sample(second_lip, &mut rng));
    }
    Ok((
        Response {
            eps_dp: eps1,
            eps_lipschitz: first_lip,
            values: first,
        },
        Response {
            eps_dp: second_dp,
            eps_lipschitz: second_lip,
            values: second,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lvl(v: f64) -> PrivacyLevel {
        PrivacyLevel::new(v).unwrap()
    }

    fn state(values: Vec<f64>, alpha: f64, seed: u64) -> MechanismState {
        MechanismState::new(PrivateVector::new(values).unwrap(), alpha, seed).unwrap()
    }

    #[test]
    fn init_has_no_releases() {
        let s = state(vec![0.0], 1.0, 7);
        assert_eq!(s.dimension(), 1);
        assert!(s.released_levels().is_empty());
        assert!(s.chains().is_none());
    }

    #[test]
    fn init_errors() {
        assert!(PrivateVector::new(vec![]).is_err());
        assert!(PrivateVector::new(vec![f64::NAN]).is_err());
        let data = PrivateVector::new(vec![1.0]).unwrap();
        assert!(MechanismState::new(data.clone(), 0.0, 0).is_err());
        assert!(MechanismState::new(data, -1.0, 0).is_err());
    }

    #[test]
    fn same_inputs_same_releases() {
        let mut a = state(vec![1.0, 2.0, 3.0], 1.0, 42);
        let mut b = state(vec![1.0, 2.0, 3.0], 1.0, 42);
        for e in [1.0, 2.0, 0.5] {
            assert_eq!(a.release(lvl(e)).unwrap(), b.release(lvl(e)).unwrap());
        }
    }

    #[test]
    fn release_is_idempotent() {
        let mut s = state(vec![1.0, -4.0], 2.0, 1);
        let first = s.release(lvl(1.0)).unwrap();
        s.release(lvl(3.0)).unwrap();
        let again = s.release(lvl(1.0)).unwrap();
        assert_eq!(first, again);
    }

    #[test]
    fn bridge_release_fails_without_mutation() {
        let mut s = state(vec![1.0, 2.0], 1.0, 42);
        s.release(lvl(1.0)).unwrap();
        s.release(lvl(3.0)).unwrap();
        let before = s.clone();
        match s.release(lvl(2.0)) {
            Err(Error::BridgeUnsupported { lower, upper, .. }) => assert_eq!((lower, upper), (1.0, 3.0)),
            other => panic!("expected bridge error, got {other:?}"),
        }
        assert_eq!(s, before);
    }

    #[test]
    fn response_levels_are_consistent() {
        let mut s = state(vec![0.0; 4], 0.3, 5);
        let r = s.release(lvl(0.9)).unwrap();
        assert_eq!(r.values.len(), 4);
        assert!((r.eps_lipschitz.value() * 0.3 - r.eps_dp.value()).abs() < 1e-12);
    }

    #[test]
    fn coordinate_streams_ignore_dimension() {
        let mut short = state(vec![0.0, 0.0], 1.0, 9);
        let mut long = state(vec![0.0, 0.0, 0.0, 0.0, 0.0], 1.0, 9);
        let a = short.release(lvl(1.0)).unwrap();
        let b = long.release(lvl(1.0)).unwrap();
        assert_eq!(a.values[..], b.values[..2]);
    }

    #[test]
    fn third_party_tightening_at_same_level_is_identity() {
        let mut s = state(vec![1.0, 2.0, 3.0], 1.0, 3);
        let r = s.release(lvl(2.0)).unwrap();
        let mut rng = RandomSource::seed_from_u64(0);
        let t = tighten_for_third_party(&r, lvl(2.0), 1.0, &mut rng).unwrap();
        assert_eq!(t.values, r.values);
    }

    #[test]
    fn third_party_tightening_rejects_looser_level() {
        let mut s = state(vec![1.0], 1.0, 3);
        let r = s.release(lvl(2.0)).unwrap();
        let mut rng = RandomSource::seed_from_u64(0);
        assert!(matches!(
            tighten_for_third_party(&r, lvl(3.0), 1.0, &mut rng),
            Err(Error::Ordering { .. })
        ));
    }

    #[test]
    fn naive_requires_increasing_levels() {
        let data = PrivateVector::new(vec![0.0]).unwrap();
        assert!(naive_composition_release(&data, lvl(2.0), lvl(2.0), 1.0, 0).is_err());
        assert!(naive_composition_release(&data, lvl(2.0), lvl(1.0), 1.0, 0).is_err());
        let (a, b) = naive_composition_release(&data, lvl(1.0), lvl(3.0), 1.0, 0).unwrap();
        assert_eq!(a.eps_dp, lvl(1.0));
        assert_eq!(b.eps_dp, lvl(2.0));
    }

    #[test]
    fn naive_first_response_matches_gradual_first_release() {
        let data = PrivateVector::new(vec![1.0, 2.0]).unwrap();
        let (first, _) = naive_composition_release(&data, lvl(1.0), lvl(2.0), 1.0, 77).unwrap();
        let mut s = MechanismState::new(data, 1.0, 77).unwrap();
        assert_eq!(s.release(lvl(1.0)).unwrap().values, first.values);
    }

    #[test]
    fn state_round_trip() {
        let mut s = state(vec![1.5, -2.0, 0.1], 0.5, 11);
        let fresh = MechanismState::deserialize(&s.serialize()).unwrap();
        assert_eq!(fresh, s);
        s.release(lvl(1.0)).unwrap();
        s.release(lvl(0.25)).unwrap();
        let text = s.serialize();
        let mut restored = MechanismState::deserialize(&text).unwrap();
        assert_eq!(restored.serialize(), text);
        assert_eq!(restored.release(lvl(4.0)).unwrap(), s.release(lvl(4.0)).unwrap());
    }

    #[test]
    fn state_with_mismatched_chain_is_rejected() {
        let mut s = state(vec![1.0, 2.0], 1.0, 11);
        s.release(lvl(1.0)).unwrap();
        let text = s.serialize();
        let truncated: String = text.lines().take(2).map(|l| format!("{l}\n")).collect();
        assert!(MechanismState::deserialize(&truncated).is_err());
    }

    #[test]
    fn response_record_round_trip() {
        let mut s = state(vec![1.0, 2.0], 1.0, 4);
        let r = s.release(lvl(1.0)).unwrap();
        assert_eq!(Response::from_record(&r.to_record()).unwrap(), r);
    }
}
