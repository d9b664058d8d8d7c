//! Run configurations. Every report embeds the one that produced it, and
//! `replay` re-runs a report from that field alone.

use serde::{Deserialize, Serialize};
use spam_purify::{NoiseParameters, OutcomeStatistics, SpamError};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid parameters: {0}")]
    BadParameters(String),
    #[error("invalid input: {0}")]
    BadInput(String),
    #[error("solver did not converge (residual {residual:e}); report written")]
    NotConverged { residual: f64 },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::BadParameters(_) => 2,
            CliError::BadInput(_) => 3,
            CliError::NotConverged { .. } => 4,
            CliError::Io(_) => 1,
        }
    }
}

impl From<SpamError> for CliError {
    fn from(e: SpamError) -> Self {
        CliError::BadParameters(e.to_string())
    }
}

/// Observed statistics for `verify`, as read from the input file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum Observation {
    Probabilities {
        p00: f64,
        p01: f64,
        p10: f64,
        p11: f64,
    },
    /// `p00` implied by normalization.
    Triple {
        p01: f64,
        p10: f64,
        p11: f64,
    },
    Counts {
        c00: u64,
        c01: u64,
        c10: u64,
        c11: u64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        shots: Option<u64>,
    },
}

impl Observation {
    /// Validates and normalizes; `renormalize` rescales probabilities that
    /// do not sum to one (e.g. rounded published values).
    pub fn statistics(&self, renormalize: bool) -> Result<OutcomeStatistics, CliError> {
        let bad = |e: SpamError| CliError::BadInput(e.to_string());
        match *self {
            Observation::Probabilities { p00, p01, p10, p11 } => {
                let p = [p00, p01, p10, p11];
                let total: f64 = p.iter().sum();
                if renormalize && total > 0.0 && p.iter().all(|x| *x >= 0.0) {
                    OutcomeStatistics::from_probabilities(p.map(|x| x / total)).map_err(bad)
                } else {
                    OutcomeStatistics::from_probabilities(p).map_err(bad)
                }
            }
            Observation::Triple { p01, p10, p11 } => OutcomeStatistics::from_triple(p01, p10, p11).map_err(bad),
            Observation::Counts {
                c00,
                c01,
                c10,
                c11,
                shots,
            } => {
                let counts = [c00, c01, c10, c11];
                let total: u64 = counts.iter().sum();
                if let Some(s) = shots {
                    if s != total {
                        return Err(CliError::BadInput(format!("shots = {s} but counts sum to {total}")));
                    }
                }
                OutcomeStatistics::from_counts(counts).map_err(bad)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum RunConfig {
    PurifyState {
        f: f64,
        q: f64,
        eps: f64,
        n: usize,
        trials: Option<u64>,
        seed: u64,
    },
    PurifyMeasurement {
        f: f64,
        q: f64,
        eps: f64,
        m: usize,
        k: usize,
        trials: Option<u64>,
        seed: u64,
    },
    Table1,
    Cases,
    Verify {
        observation: Observation,
        renormalize: bool,
        threshold: f64,
        n_max: usize,
        n_cap: usize,
        max_iterations: usize,
    },
    Sweep {
        f: Vec<f64>,
        eps: Vec<f64>,
        threshold: f64,
        n_cap: usize,
    },
}

pub fn noise_parameters(f: f64, q: f64, eps: f64) -> Result<NoiseParameters, CliError> {
    Ok(NoiseParameters::new(f, q, eps)?)
}

pub fn check_trials(trials: Option<u64>) -> Result<(), CliError> {
    if trials == Some(0) {
        return Err(CliError::BadParameters("trials must be at least 1".into()));
    }
    Ok(())
}

pub fn check_threshold(threshold: f64) -> Result<(), CliError> {
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(CliError::BadParameters(format!(
            "threshold = {threshold}: target fidelity must lie in (0, 1]"
        )));
    }
    Ok(())
}
