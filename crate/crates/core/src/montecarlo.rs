//! Trajectory sampling of both protocols with post-selection.
//!
//! Each trial keeps a normalized 2×2 system state and draws the outcome of
//! every target measurement from the exact conditional branch weights of the
//! channel algebra. Trial `t` draws from its own ChaCha8 stream keyed by
//! `(seed, t)`, and trial results are reduced as integer counts, so estimates
//! do not depend on scheduling or thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::QubitOperator;
use crate::analytic::check_consistent_preparation;
use crate::error::{Result, SpamError};
use crate::exact::state_branches;
use crate::model::NoiseParameters;
use crate::verification::{forward_probabilities, OutcomeStatistics};

/// Shots per RNG stream in [`mc_verification_counts`].
pub const SHOT_BLOCK: u64 = 4096;

/// A binomial proportion estimate with its 1σ standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub value: f64,
    pub std_error: f64,
    pub trials: u64,
    pub accepted: u64,
    pub seed: u64,
}

impl McEstimate {
    /// `hits / denominator` with `sqrt(p̂(1 − p̂)/denominator)`; NaN when
    /// the denominator is zero.
    fn proportion(hits: u64, denominator: u64, trials: u64, accepted: u64, seed: u64) -> Self {
        let (value, std_error) = if denominator == 0 {
            (f64::NAN, f64::NAN)
        } else {
            let p = hits as f64 / denominator as f64;
            (p, (p * (1.0 - p) / denominator as f64).sqrt())
        };
        Self {
            value,
            std_error,
            trials,
            accepted,
            seed,
        }
    }

    /// Standard error a proportion with true value `p` would have at this
    /// sample size.
    pub fn reference_std_error(&self, p: f64, denominator: u64) -> f64 {
        (p * (1.0 - p) / denominator as f64).sqrt()
    }
}

/// Independent generator for trial (or block) `index` under `seed`.
pub fn trial_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

#[derive(Default, Clone, Copy)]
struct Tally {
    accepted: u64,
    hits: u64,
    other: u64,
}

impl std::ops::Add for Tally {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self {
            accepted: self.accepted + rhs.accepted,
            hits: self.hits + rhs.hits,
            other: self.other + rhs.other,
        }
    }
}

fn run_trials<F>(trials: u64, seed: u64, trial: F) -> Tally
where
    F: Fn(&mut ChaCha8Rng) -> Tally + Sync,
{
    let base = ChaCha8Rng::seed_from_u64(seed);
    (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = base.clone();
            rng.set_stream(t);
            trial(&mut rng)
        })
        .reduce(Tally::default, |a, b| a + b)
}

/// Draws outcome 0 with probability `w0 / (w0 + w1)`.
#[inline]
fn draw(rng: &mut ChaCha8Rng, w0: f64, w1: f64) -> usize {
    if rng.random::<f64>() * (w0 + w1) < w0 {
        0
    } else {
        1
    }
}

/// Result of [`mc_state_purification`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McStateResult {
    /// Fraction of accepted trials whose final (ideal, simulation-only)
    /// computational-basis readout was 0.
    pub fidelity: McEstimate,
    /// Fraction of trials accepted after `n` targets.
    pub p_succ: McEstimate,
}

/// Samples the state protocol with `n` targets.
///
/// A trial aborts on the first target outcome 1. Fidelity is read out with a
/// noiseless measurement on the accepted state, an observable only a
/// simulation has access to.
pub fn mc_state_purification(
    rho: &QubitOperator,
    params: &NoiseParameters,
    n: usize,
    trials: u64,
    seed: u64,
) -> Result<McStateResult> {
    if trials == 0 {
        return Err(SpamError::ZeroTrials);
    }
    check_consistent_preparation(params, rho)?;
    let povm = params.povm();
    let eps = params.eps();

    let tally = run_trials(trials, seed, |rng| {
        let mut state = *rho;
        for _ in 0..n {
            let [b0, b1] = state_branches(&state, rho, &povm, eps);
            let w0 = b0.trace().re;
            if draw(rng, w0, b1.trace().re) == 1 {
                return Tally::default();
            }
            state = b0.scale(1.0 / w0);
        }
        let zero = rng.random::<f64>() < state.diag_entry(0);
        Tally {
            accepted: 1,
            hits: zero as u64,
            other: 0,
        }
    });

    Ok(McStateResult {
        fidelity: McEstimate::proportion(tally.hits, tally.accepted, trials, tally.accepted, seed),
        p_succ: McEstimate::proportion(tally.accepted, trials, trials, tally.accepted, seed),
    })
}

/// Result of [`mc_measurement_purification`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McMeasurementResult {
    /// Fraction of accepted trials reporting the outcome opposite to the
    /// dominant basis state of `sigma`; for `sigma = |1⟩⟨1|` this estimates
    /// the purified noise fraction `q⁽ᵐ⁾`.
    pub q_hat: McEstimate,
    pub accept_rate: McEstimate,
    /// Accepted trials by reported outcome.
    pub outcome_counts: [u64; 2],
}

/// Samples the measurement protocol: `m` targets and the system are read out
/// with the noisy POVM and a trial is accepted when all `m + 1` outcomes agree.
pub fn mc_measurement_purification(
    sigma: &QubitOperator,
    params: &NoiseParameters,
    m: usize,
    trials: u64,
    seed: u64,
) -> Result<McMeasurementResult> {
    if trials == 0 {
        return Err(SpamError::ZeroTrials);
    }
    sigma.validate_density()?;
    let rho = params.preparation();
    let povm = params.povm();
    let eps = params.eps();
    let ideal = if sigma.diag_entry(0) >= sigma.diag_entry(1) { 0 } else { 1 };

    // hits counts outcome 0, other counts outcome 1
    let tally = run_trials(trials, seed, |rng| {
        let mut state = *sigma;
        let mut agreed: Option<usize> = None;
        for _ in 0..m {
            let branches = state_branches(&state, &rho, &povm, eps);
            let w = [branches[0].trace().re, branches[1].trace().re];
            let j = draw(rng, w[0], w[1]);
            match agreed {
                Some(k) if k != j => return Tally::default(),
                _ => agreed = Some(j),
            }
            state = branches[j].scale(1.0 / w[j]);
        }
        let w0 = (state * povm.m0).trace().re;
        let w1 = (state * povm.m1).trace().re;
        let s = draw(rng, w0, w1);
        if agreed.is_some_and(|k| k != s) {
            return Tally::default();
        }
        Tally {
            accepted: 1,
            hits: (s == 0) as u64,
            other: (s == 1) as u64,
        }
    });

    let outcome_counts = [tally.hits, tally.other];
    let wrong = outcome_counts[1 - ideal];
    Ok(McMeasurementResult {
        q_hat: McEstimate::proportion(wrong, tally.accepted, trials, tally.accepted, seed),
        accept_rate: McEstimate::proportion(tally.accepted, trials, trials, tally.accepted, seed),
        outcome_counts,
    })
}

/// Samples `shots` two-bit outcomes of the verification circuit.
///
/// Shots are drawn in blocks of [`SHOT_BLOCK`], block `b` using stream
/// `(seed, b)`.
pub fn mc_verification_counts(params: &NoiseParameters, shots: u64, seed: u64) -> Result<OutcomeStatistics> {
    if shots == 0 {
        return Err(SpamError::ZeroTrials);
    }
    let p = forward_probabilities(params).probabilities();
    let cumulative = [p[0], p[0] + p[1], p[0] + p[1] + p[2]];
    let blocks = shots.div_ceil(SHOT_BLOCK);
    let base = ChaCha8Rng::seed_from_u64(seed);
    let counts = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = base.clone();
            rng.set_stream(b);
            let len = SHOT_BLOCK.min(shots - b * SHOT_BLOCK);
            let mut counts = [0u64; 4];
            for _ in 0..len {
                let u: f64 = rng.random();
                let idx = cumulative.iter().take_while(|&&c| u >= c).count();
                counts[idx] += 1;
            }
            counts
        })
        .reduce(|| [0u64; 4], |a, b| [a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]]);
    OutcomeStatistics::from_counts(counts)
}
