use thiserror::Error;

pub type Result<T> = std::result::Result<T, SpamError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpamError {
    /// A model parameter lies outside its admissible domain.
    #[error("invalid parameter {name} = {value}: {constraint}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        constraint: &'static str,
    },

    #[error("operator is not Hermitian (max |A - A^dagger| = {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("operator is not positive semidefinite (min eigenvalue = {min_eigenvalue:e})")]
    NotPositive { min_eigenvalue: f64 },

    #[error("gate is not unitary (max |U U^dagger - 1| = {deviation:e})")]
    NonUnitary { deviation: f64 },

    /// The closed forms only track diagonal entries.
    #[error("closed form requires a diagonal preparation (|rho_01| = {magnitude:e}); use exact iteration")]
    NonDiagonal { magnitude: f64 },

    #[error("post-selection degenerate: accepted trace {trace:e} vanished")]
    DegeneratePostSelection { trace: f64 },

    #[error("trial count must be at least 1")]
    ZeroTrials,

    #[error("invalid outcome statistics: {0}")]
    InvalidStatistics(String),

    #[error("solver did not converge; prediction requires converged error rates")]
    NotConverged,
}
