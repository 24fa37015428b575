//! Simulation and analysis of the online edge-coloring game.
//!
//! The engine ([`game`]) plays a builder against one of three colorers and
//! records a full [`Transcript`]. [`instrument`] turns transcripts into the
//! per-step random variables and evaluates the bad-event detectors,
//! [`analysis`] evaluates the error recurrence and tail bounds, and
//! [`oracle`] provides exhaustive small-instance checks.
//!
//! Numeric code is generic over [`Scalar`]; [`Real`] is the fast default and
//! [`Exact`] is used wherever an inequality must be decided exactly.

pub mod analysis;
pub mod builders;
pub mod color_set;
pub mod error;
pub mod game;
pub mod instrument;
pub mod oracle;
pub mod phase;
pub mod scalar;

pub use builders::{Builder, Graph, ObliviousSchedule, StateView};
pub use color_set::{Color, ColorSet};
pub use error::{Error, Result, Violation};
pub use game::{
    run_game, ColorBudget, ColorerKind, EdgeEvent, GameConfig, GameRng, GameState, Incidence, StepOutcome, Transcript,
    Vertex,
};
pub use phase::PhaseKind;
pub use scalar::{Fraction, Scalar};

/// Fast scalar.
pub type Real = f64;

/// Exact scalar.
pub type Exact = num_rational::BigRational;

pub type RealEpsilonHat = analysis::EpsilonHatTable<Real>;
pub type ExactEpsilonHat = analysis::EpsilonHatTable<Exact>;
pub type RealDecomposition = instrument::Decomposition<Real>;
pub type ExactDecomposition = instrument::Decomposition<Exact>;
