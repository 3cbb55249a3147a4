//! Entangled histories, pre- and post-selected experiments and temporal
//! Bell-type functionals on small dense Hilbert spaces.
//!
//! Modules build on each other in order: [`linalg`] supplies dense complex
//! matrices, [`histories`] the history vectors and their reductions,
//! [`twostate`] measurement sequences, [`bell`] correlators and bounds, and
//! [`scenarios`] named constructions tying them together.

pub mod bell;
pub mod error;
pub mod histories;
pub mod linalg;
pub mod optim;
pub mod report;
pub mod scenarios;
pub mod twostate;

pub use bell::{
    BellReport, BlochAngles, ChainedReport, CorrelatorSpec, EvaluationMode, MonogamyReport,
    MonogamySpec, Objective, OptimizeResult, OptimizerConfig,
};
pub use error::{Error, Result};
pub use histories::{
    BridgingSet, ConsistencyReport, ElementaryHistory, HistoryState, MixedHistory,
    SubsystemReduction, TimeGrid,
};
pub use linalg::{ComplexMatrix, Ket};
pub use scenarios::{Artifact, ScenarioResult};
pub use twostate::{
    MeasurementSetting, OutcomeDistribution, OutcomeString, Sign, TwoTimeExperiment,
};
