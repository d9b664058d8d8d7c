//! Exact channel-level iteration of both purification protocols.
//!
//! A collective CNOT on `n + 1` qubits factors into two-qubit CNOTs sharing
//! the control, so each round only ever brings in one fresh target: the
//! working set is a 2×2 operator and a 4×4 intermediate. Unlike the closed
//! forms this handles coherent preparations and tracks off-diagonals.

use crate::algebra::{
    contract_target_state, partial_trace_with_effect, tensor, QubitOperator, ALGEBRA_TOL,
};
use crate::analytic::{check_consistent_preparation, PurificationTrace, RoundRecord};
use crate::error::{Result, SpamError};
use crate::model::{check_depolarizing, noisy_cnot_unchecked, NoiseParameters, NoisyPovm};

/// Traces at or below this are reported as degenerate post-selection.
pub const DEGENERATE_TRACE: f64 = 1e-300;

/// Unnormalized accepted system state `R⁽ⁿ⁾` after `rounds_applied` targets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AcceptedOperator {
    pub op: QubitOperator,
    pub rounds_applied: usize,
}

impl AcceptedOperator {
    pub fn initial(rho: QubitOperator) -> Self {
        Self {
            op: rho,
            rounds_applied: 0,
        }
    }

    pub fn success_prob(&self) -> f64 {
        self.op.trace().re
    }

    pub fn fidelity(&self) -> f64 {
        self.op.diag_entry(0) / self.success_prob()
    }

    pub fn record(&self) -> RoundRecord {
        RoundRecord::from_diagonal(self.rounds_applied, self.op.diag_entry(0), self.op.diag_entry(1))
    }
}

/// Branch operators `tr_A[Φ(r ⊗ ρ)(1 ⊗ M̃_j)]` for both target outcomes.
///
/// Their traces are the (unnormalized) outcome weights and sum to `tr r`.
#[inline]
pub fn state_branches(
    r: &QubitOperator,
    rho: &QubitOperator,
    povm: &NoisyPovm,
    eps: f64,
) -> [QubitOperator; 2] {
    let joint = noisy_cnot_unchecked(eps, &tensor(r, rho));
    [
        partial_trace_with_effect(&joint, &povm.m0),
        partial_trace_with_effect(&joint, &povm.m1),
    ]
}

/// `R⁽ⁿ⁺¹⁾ = tr_A[Φ_ε(R⁽ⁿ⁾ ⊗ ρ)(1 ⊗ M̃₀)]`.
pub fn state_purification_step(
    r: &AcceptedOperator,
    rho: &QubitOperator,
    povm: &NoisyPovm,
    eps: f64,
) -> Result<AcceptedOperator> {
    check_depolarizing(eps)?;
    let [accepted, _] = state_branches(&r.op, rho, povm, eps);
    let trace = accepted.trace().re;
    if !(trace > DEGENERATE_TRACE) {
        return Err(SpamError::DegeneratePostSelection { trace });
    }
    Ok(AcceptedOperator {
        op: accepted,
        rounds_applied: r.rounds_applied + 1,
    })
}

/// Accepted operators for rounds `0..=n` with separate system and target
/// preparations.
pub fn iterate_state_purification(
    system: &QubitOperator,
    target: &QubitOperator,
    povm: &NoisyPovm,
    eps: f64,
    n: usize,
) -> Result<Vec<AcceptedOperator>> {
    let mut out = Vec::with_capacity(n + 1);
    let mut current = AcceptedOperator::initial(*system);
    out.push(current);
    for _ in 0..n {
        current = state_purification_step(&current, target, povm, eps)?;
        out.push(current);
    }
    Ok(out)
}

/// Runs the state protocol with `rho` as both system and target preparation.
///
/// `rho` may carry coherences but its `⟨0|ρ|0⟩` must equal `params.f()`.
pub fn run_state_purification(
    rho: &QubitOperator,
    params: &NoiseParameters,
    n: usize,
) -> Result<PurificationTrace> {
    check_consistent_preparation(params, rho)?;
    let ops = iterate_state_purification(rho, rho, &params.povm(), params.eps(), n)?;
    Ok(PurificationTrace {
        rounds: ops.iter().map(AcceptedOperator::record).collect(),
    })
}

/// Heisenberg update `M⁽ᵐ⁺¹⁾ = tr_A[(1 ⊗ ρ) Φ_ε†(M⁽ᵐ⁾ ⊗ M̃_k)]`.
///
/// The depolarizing CNOT is self-adjoint (V is Hermitian and the
/// depolarizing part is `tr[·] 1/4`), so `Φ_ε† = Φ_ε`.
pub fn measurement_purification_step(
    m: &QubitOperator,
    rho: &QubitOperator,
    effect: &QubitOperator,
    eps: f64,
) -> Result<QubitOperator> {
    check_depolarizing(eps)?;
    Ok(heisenberg_step(m, rho, effect, eps))
}

#[inline]
fn heisenberg_step(m: &QubitOperator, rho: &QubitOperator, effect: &QubitOperator, eps: f64) -> QubitOperator {
    contract_target_state(rho, &noisy_cnot_unchecked(eps, &tensor(m, effect)))
}

/// Purified measurement element for outcome `k` with `m` targets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PurifiedMeasurement {
    /// Unnormalized `M̃_k⁽ᵐ⁾`.
    pub element: QubitOperator,
    /// `N_k⁽ᵐ⁾ = M̃_k⁽ᵐ⁾ / p_succ`.
    pub normalized: QubitOperator,
    /// `⟨k̄|N_k⁽ᵐ⁾|k̄⟩`.
    pub q_m: f64,
    /// State-independent normalization `tr M̃_k⁽ᵐ⁾`; equals
    /// `αᵐ(1 − q) + (1 − α)ᵐ q` for a noiseless gate.
    pub p_succ: f64,
}

/// Unnormalized `M̃_k⁽ᵐ⁾` starting from the system's own noisy element.
pub fn purified_element(
    rho: &QubitOperator,
    povm: &NoisyPovm,
    eps: f64,
    m: usize,
    k: usize,
) -> Result<QubitOperator> {
    check_depolarizing(eps)?;
    let effect = povm.element(k);
    let mut current = *effect;
    for _ in 0..m {
        current = heisenberg_step(&current, rho, effect, eps);
    }
    Ok(current)
}

pub fn run_measurement_purification(params: &NoiseParameters, m: usize, k: usize) -> Result<PurifiedMeasurement> {
    let element = purified_element(&params.preparation(), &params.povm(), params.eps(), m, k)?;
    let p_succ = element.trace().re;
    let normalized = element.scale(1.0 / p_succ);
    Ok(PurifiedMeasurement {
        element,
        normalized,
        q_m: normalized.diag_entry(1 - k),
        p_succ,
    })
}

/// Probability that system and all `m` targets report `k`, computed by
/// evolving `sigma` forward (Schrödinger picture).
pub fn forward_acceptance(
    sigma: &QubitOperator,
    rho: &QubitOperator,
    povm: &NoisyPovm,
    eps: f64,
    m: usize,
    k: usize,
) -> Result<f64> {
    check_depolarizing(eps)?;
    let mut state = *sigma;
    for _ in 0..m {
        state = state_branches(&state, rho, povm, eps)[k];
    }
    Ok((state * *povm.element(k)).trace().re)
}

/// State-dependent acceptance `Σ_k tr[σ M̃_k⁽ᵐ⁾]`.
pub fn measurement_acceptance(sigma: &QubitOperator, params: &NoiseParameters, m: usize) -> Result<f64> {
    let rho = params.preparation();
    let povm = params.povm();
    let mut total = 0.0;
    for k in 0..2 {
        let element = purified_element(&rho, &povm, params.eps(), m, k)?;
        total += (*sigma * element).trace().re;
    }
    Ok(total)
}

/// Checks the accepted-operator invariants (PSD, trace in (0, 1]).
pub fn validate_accepted(r: &AcceptedOperator) -> Result<()> {
    if !r.op.is_psd(ALGEBRA_TOL) {
        return Err(SpamError::NotPositive {
            min_eigenvalue: r.op.eigenvalues()[0],
        });
    }
    let tr = r.success_prob();
    if !(tr > 0.0 && tr <= 1.0 + ALGEBRA_TOL) {
        return Err(SpamError::DegeneratePostSelection { trace: tr });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{noisy_step, purified_povm_closed_form, purified_povm_recurrence};
    use crate::model::make_noisy_povm;

    #[test]
    fn noiseless_fixed_point() {
        let r = AcceptedOperator::initial(QubitOperator::projector(0));
        let povm = make_noisy_povm(0.0).unwrap();
        let next = state_purification_step(&r, &QubitOperator::projector(0), &povm, 0.0).unwrap();
        assert_eq!(next.op, QubitOperator::projector(0));
        assert_eq!(next.rounds_applied, 1);
    }

    #[test]
    fn brute_force_step_matches_diagonal_map() {
        let rho = QubitOperator::diag(0.95, 0.05);
        let povm = make_noisy_povm(0.05).unwrap();
        let next = state_purification_step(&AcceptedOperator::initial(rho), &rho, &povm, 0.0).unwrap();
        assert!((next.op.diag_entry(0) - 0.905 * 0.95).abs() < 1e-15);
        assert!((next.op.diag_entry(1) - 0.095 * 0.05).abs() < 1e-15);
        assert!(next.op.coherence_magnitude() == 0.0);
    }

    #[test]
    fn noisy_step_agrees_with_channel() {
        let p = NoiseParameters::new(0.95, 0.05, 0.05).unwrap();
        let rho = p.preparation();
        let next = state_purification_step(&AcceptedOperator::initial(rho), &rho, &p.povm(), 0.05).unwrap();
        let (r00, r11) = noisy_step(0.95, 0.05, &p);
        assert!((next.op.diag_entry(0) - r00).abs() < 1e-12);
        assert!((next.op.diag_entry(1) - r11).abs() < 1e-12);
    }

    #[test]
    fn degenerate_post_selection_is_an_error() {
        let povm = make_noisy_povm(0.0).unwrap();
        let r = AcceptedOperator::initial(QubitOperator::projector(0));
        let err = state_purification_step(&r, &QubitOperator::projector(1), &povm, 0.0).unwrap_err();
        assert!(matches!(err, SpamError::DegeneratePostSelection { .. }));
    }

    #[test]
    fn state_runs_reproduce_table_columns() {
        let check = |f, q, eps, n, printed: &[f64]| {
            let p = NoiseParameters::new(f, q, eps).unwrap();
            let trace = run_state_purification(&p.preparation(), &p, n).unwrap();
            for (got, want) in trace.fidelities()[1..].iter().zip(printed) {
                assert!((got - want).abs() < 5e-4, "({f},{q},{eps}): {got} vs {want}");
            }
        };
        check(0.9, 0.1, 0.0, 3, &[0.976, 0.995, 0.999]);
        check(0.97, 0.05, 0.03, 2, &[0.989, 0.991]);
        check(0.95, 0.05, 0.05, 1, &[0.980]);
    }

    #[test]
    fn measurement_fixed_point_and_closed_form() {
        let povm = make_noisy_povm(0.0).unwrap();
        let out =
            measurement_purification_step(&QubitOperator::projector(0), &QubitOperator::projector(0), &povm.m0, 0.0)
                .unwrap();
        assert_eq!(out, QubitOperator::projector(0));

        let p = NoiseParameters::new(0.95, 0.05, 0.0).unwrap();
        let element = purified_element(&p.preparation(), &p.povm(), 0.0, 2, 0).unwrap();
        let a = 0.905_f64;
        let expected = QubitOperator::diag(a * a * 0.95, (1.0 - a) * (1.0 - a) * 0.05);
        assert!(element.max_abs_diff(&expected) < 1e-15);

        let run = run_measurement_purification(&p, 2, 0).unwrap();
        let closed = purified_povm_closed_form(&p, 2).unwrap();
        assert!((run.q_m - closed.q_m).abs() < 1e-15);
        assert!((run.q_m - 5.796e-4).abs() < 1e-7);
        assert!((run.p_succ - closed.p_succ).abs() < 1e-15);
    }

    #[test]
    fn measurement_run_without_targets_is_the_raw_element() {
        let p = NoiseParameters::new(0.9, 0.07, 0.02).unwrap();
        let run = run_measurement_purification(&p, 0, 1).unwrap();
        assert_eq!(run.q_m, 0.07);
        assert_eq!(run.p_succ, 1.0);
    }

    #[test]
    fn noisy_measurement_converges_to_limit() {
        let p = NoiseParameters::new(0.95, 0.05, 0.05).unwrap();
        let run = run_measurement_purification(&p, 60, 0).unwrap();
        let limit = crate::analytic::noise_fraction_limit(&p);
        assert!((run.q_m - limit).abs() < 1e-6);
        assert!((run.q_m - 0.016).abs() < 5e-4);
        let diag = purified_povm_recurrence(&p, 60);
        assert!((diag.q_m - run.q_m).abs() < 1e-12);
    }

    #[test]
    fn heisenberg_matches_forward_evolution() {
        let p = NoiseParameters::new(0.88, 0.12, 0.07).unwrap();
        let sigma = QubitOperator::hermitian(0.6, 0.4, num_complex::Complex64::new(0.2, -0.3));
        for k in 0..2 {
            for m in 0..5 {
                let element = purified_element(&p.preparation(), &p.povm(), p.eps(), m, k).unwrap();
                let heis = (sigma * element).trace().re;
                let fwd = forward_acceptance(&sigma, &p.preparation(), &p.povm(), p.eps(), m, k).unwrap();
                assert!((heis - fwd).abs() < 1e-12, "k={k} m={m}");
            }
        }
    }
}
