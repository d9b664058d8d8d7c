//! Fixtures shared by the benchmarks.

use spam_purify::verification::forward_probabilities;
use spam_purify::{NoiseParameters, OutcomeStatistics};

/// Noisy-gate benchmark point: `1 − f = q = eps = 0.05`.
pub fn noisy_params() -> NoiseParameters {
    NoiseParameters::balanced(0.95, 0.05).expect("valid parameters")
}

/// Exact outcome statistics of the verification circuit at [`noisy_params`].
pub fn noisy_statistics() -> OutcomeStatistics {
    forward_probabilities(&noisy_params())
}
