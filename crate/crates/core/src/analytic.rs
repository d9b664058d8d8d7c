//! Closed-form purification quantities.
//!
//! Everything here tracks diagonal entries only: the accepted operator
//! `R⁽ⁿ⁾` of the state protocol and the diagonal of the purified POVM
//! element. For coherent preparations use [`crate::exact`].

use serde::{Deserialize, Serialize};

use crate::algebra::{QubitOperator, ALGEBRA_TOL};
use crate::error::{Result, SpamError};
use crate::model::{check_fidelity, NoiseParameters};

/// One round of a purification run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    /// Number of target qubits consumed so far.
    pub n: usize,
    pub r00: f64,
    pub r11: f64,
    /// `r00 / (r00 + r11)`.
    pub fidelity: f64,
    /// Trace of the accepted operator, `r00 + r11`.
    pub success_prob: f64,
}

impl RoundRecord {
    pub fn from_diagonal(n: usize, r00: f64, r11: f64) -> Self {
        let success_prob = r00 + r11;
        Self {
            n,
            r00,
            r11,
            fidelity: r00 / success_prob,
            success_prob,
        }
    }
}

/// Per-round record of a purification run, round 0 being the unpurified input.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PurificationTrace {
    pub rounds: Vec<RoundRecord>,
}

impl PurificationTrace {
    pub fn fidelities(&self) -> Vec<f64> {
        self.rounds.iter().map(|r| r.fidelity).collect()
    }

    pub fn success_probs(&self) -> Vec<f64> {
        self.rounds.iter().map(|r| r.success_prob).collect()
    }

    pub fn last(&self) -> Option<&RoundRecord> {
        self.rounds.last()
    }
}

/// Per-round contraction coefficient `α = (1 − q) f + q (1 − f)`.
pub fn alpha(params: &NoiseParameters) -> f64 {
    params.alpha()
}

pub(crate) fn check_consistent_preparation(params: &NoiseParameters, rho: &QubitOperator) -> Result<()> {
    rho.validate_density()?;
    let f0 = rho.diag_entry(0);
    if (f0 - params.f()).abs() > ALGEBRA_TOL {
        return Err(SpamError::InvalidParameter {
            name: "rho_00",
            value: f0,
            constraint: "preparation must carry the fidelity given in the noise parameters",
        });
    }
    Ok(())
}

fn diagonal_of(rho: &QubitOperator) -> Result<(f64, f64)> {
    let magnitude = rho.coherence_magnitude();
    if magnitude > ALGEBRA_TOL {
        return Err(SpamError::NonDiagonal { magnitude });
    }
    Ok((rho.diag_entry(0), rho.diag_entry(1)))
}

/// Noiseless-gate trace `R₀₀⁽ⁿ⁾ = αⁿ ρ₀₀`, `R₁₁⁽ⁿ⁾ = (1 − α)ⁿ ρ₁₁` for
/// `n = 0..=n_max`.
///
/// `rho` is the preparation used for the system and every target; it must be
/// diagonal and carry fidelity `params.f()`.
pub fn state_trace_closed_form(
    params: &NoiseParameters,
    rho: &QubitOperator,
    n_max: usize,
) -> Result<PurificationTrace> {
    if params.eps() != 0.0 {
        return Err(SpamError::InvalidParameter {
            name: "eps",
            value: params.eps(),
            constraint: "closed-form trace assumes a noiseless CNOT; use noisy_trace",
        });
    }
    check_consistent_preparation(params, rho)?;
    let (rho00, rho11) = diagonal_of(rho)?;
    let a = params.alpha();
    let rounds = (0..=n_max)
        .map(|n| {
            let n_i = n as i32;
            RoundRecord::from_diagonal(n, a.powi(n_i) * rho00, (1.0 - a).powi(n_i) * rho11)
        })
        .collect();
    Ok(PurificationTrace { rounds })
}

/// Trace built by iterating [`noisy_step`]; valid for any `eps`.
pub fn noisy_trace(params: &NoiseParameters, rho: &QubitOperator, n_max: usize) -> Result<PurificationTrace> {
    check_consistent_preparation(params, rho)?;
    let (mut r00, mut r11) = diagonal_of(rho)?;
    let mut rounds = Vec::with_capacity(n_max + 1);
    rounds.push(RoundRecord::from_diagonal(0, r00, r11));
    for n in 1..=n_max {
        (r00, r11) = noisy_step(r00, r11, params);
        rounds.push(RoundRecord::from_diagonal(n, r00, r11));
    }
    Ok(PurificationTrace { rounds })
}

/// `R₁₁⁽ⁿ⁾ / R₀₀⁽ⁿ⁾ = ((1 − α)/α)ⁿ · ρ₁₁/ρ₀₀`.
pub fn ratio_decay(params: &NoiseParameters, rho: &QubitOperator, n: usize) -> f64 {
    let a = params.alpha();
    ((1.0 - a) / a).powi(n as i32) * rho.diag_entry(1) / rho.diag_entry(0)
}

/// Purified POVM element for `m` target qubits (noiseless gates).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PurifiedPovm {
    /// Normalized elements `N_k⁽ᵐ⁾ = M̃_k⁽ᵐ⁾ / p_succ`.
    pub n0: QubitOperator,
    pub n1: QubitOperator,
    /// Noise fraction `q⁽ᵐ⁾` of the normalized elements.
    pub q_m: f64,
    /// Normalization `p_succ⁽ᵐ⁺¹⁾ = αᵐ(1 − q) + (1 − α)ᵐ q`.
    pub p_succ: f64,
}

/// `M̃_k⁽ᵐ⁾ = αᵐ(1 − q)|k⟩⟨k| + (1 − α)ᵐ q |k̄⟩⟨k̄|` normalized by its trace.
pub fn purified_povm_closed_form(params: &NoiseParameters, m: usize) -> Result<PurifiedPovm> {
    if params.eps() != 0.0 {
        return Err(SpamError::InvalidParameter {
            name: "eps",
            value: params.eps(),
            constraint: "closed-form POVM assumes a noiseless CNOT; use purified_povm_recurrence",
        });
    }
    let a = params.alpha();
    let q = params.q();
    let right = a.powi(m as i32) * (1.0 - q);
    let wrong = (1.0 - a).powi(m as i32) * q;
    Ok(normalized_povm(right, wrong))
}

/// Diagonal POVM recurrence for any `eps`, using the same affine maps as the
/// state protocol (`⟨k|M|k⟩` plays `R₀₀`, `⟨k̄|M|k̄⟩` plays `R₁₁`).
pub fn purified_povm_recurrence(params: &NoiseParameters, m: usize) -> PurifiedPovm {
    let (mut right, mut wrong) = (1.0 - params.q(), params.q());
    for _ in 0..m {
        (right, wrong) = noisy_step(right, wrong, params);
    }
    normalized_povm(right, wrong)
}

fn normalized_povm(right: f64, wrong: f64) -> PurifiedPovm {
    let p_succ = right + wrong;
    let (r, w) = (right / p_succ, wrong / p_succ);
    PurifiedPovm {
        n0: QubitOperator::diag(r, w),
        n1: QubitOperator::diag(w, r),
        q_m: w,
        p_succ,
    }
}

/// One round of the diagonal recurrence with a depolarizing CNOT:
///
/// ```text
/// R₀₀' = (1 − ε) α R₀₀ + (ε/4)(R₀₀ + R₁₁)
/// R₁₁' = (1 − ε)(1 − α) R₁₁ + (ε/4)(R₀₀ + R₁₁)
/// ```
#[inline]
pub fn noisy_step(r00: f64, r11: f64, params: &NoiseParameters) -> (f64, f64) {
    let a = params.alpha();
    let eps = params.eps();
    let mixed = 0.25 * eps * (r00 + r11);
    ((1.0 - eps) * a * r00 + mixed, (1.0 - eps) * (1.0 - a) * r11 + mixed)
}

/// `D = 2(2f − 1)(1 − 2q)(1 − ε)/ε`; `None` for a noiseless gate (D infinite).
///
/// Takes raw values so boundary cases such as `f = 1/2` can be evaluated.
pub fn dee(f: f64, q: f64, eps: f64) -> Option<f64> {
    if eps == 0.0 {
        None
    } else {
        Some(2.0 * (2.0 * f - 1.0) * (1.0 - 2.0 * q) * (1.0 - eps) / eps)
    }
}

/// Limiting ratio `g = lim R₁₁/R₀₀ = √(D² + 1) − D`; zero for a noiseless gate.
pub fn gate_ratio_limit(f: f64, q: f64, eps: f64) -> f64 {
    match dee(f, q, eps) {
        None => 0.0,
        // √(D²+1) − D = 1/(√(D²+1) + D), stable for large D.
        Some(d) if d >= 0.0 => 1.0 / (d.hypot(1.0) + d),
        Some(d) => d.hypot(1.0) - d,
    }
}

/// Fixed-point fidelity `1/(1 − D + √(D² + 1))`, exactly 1 when `eps = 0`.
pub fn fidelity_limit(params: &NoiseParameters) -> f64 {
    1.0 / (1.0 + gate_ratio_limit(params.f(), params.q(), params.eps()))
}

/// Fixed-point noise fraction `1/(1 + D + √(D² + 1))`, exactly 0 when `eps = 0`.
pub fn noise_fraction_limit(params: &NoiseParameters) -> f64 {
    let g = gate_ratio_limit(params.f(), params.q(), params.eps());
    g / (1.0 + g)
}

/// True iff one round starting from `diag(f, 1 − f)` strictly raises the fidelity.
pub fn purification_condition(params: &NoiseParameters) -> bool {
    let f = params.f();
    let (r00, r11) = noisy_step(f, 1.0 - f, params);
    r00 / (r00 + r11) > f
}

/// Balanced-noise (`1 − f = q`) critical gate error
/// `ε_c = (8f³ − 12f² + 4f) / (8f³ − 12f² + 4f − 1)`.
pub fn critical_epsilon(f: f64) -> Result<f64> {
    check_fidelity(f)?;
    let num = f * (4.0 + f * (-12.0 + 8.0 * f));
    let value = num / (num - 1.0);
    // f = 1 gives -0.0
    Ok(value + 0.0)
}

/// Second-order expansion `4(1 − f) − 28(1 − f)²` of [`critical_epsilon`].
pub fn critical_epsilon_series(f: f64) -> f64 {
    let x = 1.0 - f;
    4.0 * x - 28.0 * x * x
}

/// Smallest `n ≤ n_cap` whose fidelity reaches `target`, iterating
/// [`noisy_step`] from `(r00, r11)`.
///
/// Returns `None` when the fixed point lies below the target (even if the
/// input meets it) or the cap is hit first, and `Some(0)` when the input
/// already meets a reachable target.
pub fn rounds_to_target(
    params: &NoiseParameters,
    rho_diag: (f64, f64),
    target_fidelity: f64,
    n_cap: usize,
) -> Option<usize> {
    if fidelity_limit(params) < target_fidelity {
        return None;
    }
    let (mut r00, mut r11) = rho_diag;
    if r00 / (r00 + r11) >= target_fidelity {
        return Some(0);
    }
    for n in 1..=n_cap {
        (r00, r11) = noisy_step(r00, r11, params);
        if r00 / (r00 + r11) >= target_fidelity {
            return Some(n);
        }
    }
    None
}
