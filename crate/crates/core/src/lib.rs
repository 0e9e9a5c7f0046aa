//! Gaussification of two-mode bosonic states.
//!
//! Pairs of identical two-mode pure (or mixed) states are mixed locally at
//! 50:50 beam splitters; one output port on each side is measured and the
//! remaining modes are kept only when both detectors see the vacuum. Iterating
//! this map drives non-Gaussian inputs towards two-mode squeezed (Gaussian)
//! fixed points. The crate also covers the preparation step that turns weakly
//! squeezed vacua into non-Gaussian seed states by click (non-vacuum)
//! detection, and the end-to-end distillation pipeline built from the two.
//!
//! Module map:
//!
//! - [`fock`]: truncated two-mode Fock states, reductions, entropy, trace distance
//! - [`state_file`]: the line-oriented `fock2` state file format
//! - [`optics`]: beam-splitter Fock matrices and the four-mode pair/measure step
//! - [`gaussifier`]: the iteration map, success probabilities and the driver
//! - [`fixed_point`]: the Γ matrix, closed-form limit states, Takagi factorization
//! - [`procrustean`]: seed-state preparation and the distillation pipeline
//! - [`sweep`]: parameter sweeps behind the probability/fidelity/distillation curves

pub mod error;
pub mod fixed_point;
pub mod fock;
pub mod gaussifier;
mod math;
pub mod optics;
pub mod procrustean;
pub mod state_file;
pub mod sweep;

pub use error::{Error, Result};
pub use fixed_point::{GammaMatrix, SqueezingParams, TakagiFactorization};
pub use fock::{Mode, MixedState2, PureState2, ReducedState1, SchmidtDiagonal, C64};
pub use gaussifier::{Iterate, IterationReport, MixedRun, ProtocolOptions, ProtocolRun};
pub use optics::{BeamSplitter, BsMatrix, Port};
pub use procrustean::{PipelineResult, PrepConfig, Prepared};
pub use sweep::{FidelityRow, PipelineRow, ProbabilityRow, SweepParameter, SweepSpec};
