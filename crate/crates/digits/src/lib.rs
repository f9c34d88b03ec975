//! Distribution-guided inductive synthesis.
//!
//! Given a functional specification program, an input distribution, and a
//! probabilistic postcondition, the search engine in [`search`] looks for a
//! program (an axis-aligned box or a completed sketch) that satisfies the
//! postcondition with near-minimal disagreement mass from the specification.
//! Threshold pruning (`tau < 1`) skips output labelings that are far from the
//! specification's labels in Hamming distance.
//!
//! All randomness flows through [`dist::DrawStream`], a ChaCha12 stream seeded
//! from a 64-bit integer, so every run is replayable from its seed.

pub mod analysis;
pub mod dist;
pub mod labels;
pub mod oracles;
pub mod post;
pub mod program;
pub mod sample;
pub mod search;
pub mod sketch;

pub use dist::{DrawStream, InputDistribution};
pub use labels::ConstraintString;
pub use oracles::{SynthesisResult, VerifierConfig};
pub use program::{BoxProgram, Program, ProgramClass};
pub use sample::SampleSequence;

/// Configuration error: a distribution or problem description that fails
/// validation before any sampling happens.
#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("invalid distribution: {0}")]
    Distribution(String),
    #[error("invalid parameter: {0}")]
    Parameter(String),
}
