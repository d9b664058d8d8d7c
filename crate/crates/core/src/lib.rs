//! Purification of static state-preparation and measurement (SPAM) errors.
//!
//! A noisy qubit preparation `ρ` with fidelity `f`, a noisy two-outcome
//! measurement with noise fraction `q`, and a CNOT that depolarizes with
//! probability `eps` are the only resources. Repeating them on extra target
//! qubits and post-selecting on agreeing outcomes purifies both the
//! preparation and the measurement, up to a limit set by `eps`.
//!
//! The crate computes every quantity three ways so they can check each other:
//!
//! * [`analytic`]: closed forms and diagonal recurrences,
//! * [`exact`]: channel-level iteration on 2×2/4×4 operators,
//! * [`montecarlo`]: seeded trajectory sampling with post-selection,
//!
//! and [`verification`] recovers `(f, q, eps)` from the outcome statistics of
//! a CNOT-coupled pair of noisy qubits.

pub mod algebra;
pub mod analytic;
pub mod catalog;
pub mod error;
pub mod exact;
pub mod model;
pub mod montecarlo;
pub mod verification;

pub use algebra::{QubitOperator, TwoQubitOperator};
pub use analytic::{PurificationTrace, PurifiedPovm, RoundRecord};
pub use error::{Result, SpamError};
pub use exact::{AcceptedOperator, PurifiedMeasurement};
pub use model::{NoiseParameters, NoisyPovm};
pub use montecarlo::{McEstimate, McMeasurementResult, McStateResult};
pub use num_complex::Complex64;
pub use verification::{
    OutcomeStatistics, PurificationPrediction, SolverOptions, VerificationResult,
};
