//! Gradual release of Laplace-noised data.
//!
//! A private value `u` is released as `u + V_ε` where the noise family `{V_ε}`
//! is a lazy Markov process indexed by the privacy level ε. Each marginal
//! `V_ε` is Laplace with scale `1/ε`, so every single release is optimal, yet
//! any set of releases is only as revealing as the loosest level in it.
//!
//! * [`laws`]: densities, conditional kernels and samplers for one step of the
//!   process (relaxation ε↑ and tightening ε↓).
//! * [`process`]: one sampled path of the process, stored as a [`JumpChain`].
//! * [`mechanism`]: vector data under ℓ1 adjacency, plus the naive
//!   independent-noise baseline.
//! * [`audit`]: Monte-Carlo and quadrature checks of every distributional
//!   property of the construction, and a grid audit of the Lipschitz bound.
//! * [`social`]: the social-network release scenario driven by the CLI.

pub mod audit;
pub mod error;
pub mod hexfloat;
pub mod laws;
pub mod level;
pub mod mechanism;
pub mod process;
pub mod quadrature;
pub mod rng;
pub mod social;
pub mod stats;

pub use error::{Error, Result};
pub use laws::{
    forward_conditional, joint_log_pdf, joint_pdf, laplace_log_pdf, laplace_pdf, laplace_sample,
    relax_sample, tighten_sample, ConditionalLaw, JointDensityValue, JointLaw,
};
pub use level::{LevelPair, PrivacyLevel};
pub use mechanism::{MechanismState, PrivateVector, Response};
pub use process::JumpChain;
pub use rng::RandomSource;
