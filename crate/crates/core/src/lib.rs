//! Classical and quantum correlations of finite-dimensional multipartite
//! states.
//!
//! Entropies and information quantities are in bits. Subsystems are ordered
//! row-major (the first subsystem is the slowest index).

pub mod broadcast;
pub mod channels;
pub mod classify;
pub mod corpus;
pub mod correlations;
pub mod error;
pub mod linalg;
pub mod optimize;
pub mod state;
pub mod tol;

pub use channels::{KrausChannel, Povm};
pub use classify::{ClassicalityVerdict, Kind};
pub use correlations::{CorrelationReport, Ensemble, Side, Units};
pub use error::{Error, ErrorClass, Result};
pub use optimize::{OptimizationResult, OptimizerConfig};
pub use state::{ClassicalJoint, DensityMatrix, ProbVector, SubsystemLayout};
