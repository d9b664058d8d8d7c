//! The three-parameter static error model: noisy preparation, noisy
//! two-outcome measurement, and a depolarizing CNOT.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::algebra::{cnot_conjugate, QubitOperator, TwoQubitOperator, ALGEBRA_TOL};
use crate::error::{Result, SpamError};

/// Preparation fidelity `f`, measurement noise fraction `q`, and CNOT
/// depolarizing fraction `eps`.
///
/// Construction enforces `f ∈ (1/2, 1]`, `q ∈ [0, 1/2)` and `eps ∈ [0, 1)`,
/// so everything downstream may assume the per-round contraction
/// coefficient exceeds one half.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParameters")]
pub struct NoiseParameters {
    f: f64,
    q: f64,
    eps: f64,
}

#[derive(Deserialize)]
struct RawParameters {
    f: f64,
    q: f64,
    eps: f64,
}

impl TryFrom<RawParameters> for NoiseParameters {
    type Error = SpamError;
    fn try_from(raw: RawParameters) -> Result<Self> {
        Self::new(raw.f, raw.q, raw.eps)
    }
}

pub(crate) fn check_fidelity(f: f64) -> Result<()> {
    if !(f > 0.5 && f <= 1.0) {
        return Err(SpamError::InvalidParameter {
            name: "f",
            value: f,
            constraint: "preparation fidelity must lie in (1/2, 1]; for f < 1/2 relabel the \
                         basis with a Pauli-X (bit flip) first",
        });
    }
    Ok(())
}

pub(crate) fn check_noise_fraction(q: f64) -> Result<()> {
    if !(0.0..0.5).contains(&q) {
        return Err(SpamError::InvalidParameter {
            name: "q",
            value: q,
            constraint: "measurement noise fraction must lie in [0, 1/2)",
        });
    }
    Ok(())
}

pub(crate) fn check_depolarizing(eps: f64) -> Result<()> {
    if !(0.0..1.0).contains(&eps) {
        return Err(SpamError::InvalidParameter {
            name: "eps",
            value: eps,
            constraint: "CNOT depolarizing fraction must lie in [0, 1)",
        });
    }
    Ok(())
}

impl NoiseParameters {
    pub fn new(f: f64, q: f64, eps: f64) -> Result<Self> {
        check_fidelity(f)?;
        check_noise_fraction(q)?;
        check_depolarizing(eps)?;
        Ok(Self { f, q, eps })
    }

    /// Balanced SPAM errors, `1 − f = q`.
    pub fn balanced(f: f64, eps: f64) -> Result<Self> {
        Self::new(f, 1.0 - f, eps)
    }

    /// Builds parameters from the error-rate triple `(1 − f, q, eps)`.
    pub fn from_error_rates(rates: [f64; 3]) -> Result<Self> {
        Self::new(1.0 - rates[0], rates[1], rates[2])
    }

    #[inline]
    pub fn f(&self) -> f64 {
        self.f
    }

    #[inline]
    pub fn q(&self) -> f64 {
        self.q
    }

    #[inline]
    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// The same SPAM noise with a different gate error.
    pub fn with_eps(&self, eps: f64) -> Result<Self> {
        Self::new(self.f, self.q, eps)
    }

    /// Error rates `(1 − f, q, eps)` as reported in verification tables.
    pub fn error_rates(&self) -> [f64; 3] {
        [1.0 - self.f, self.q, self.eps]
    }

    /// Per-round contraction coefficient `α = (1 − q) f + q (1 − f)`.
    #[inline]
    pub fn alpha(&self) -> f64 {
        (1.0 - self.q) * self.f + self.q * (1.0 - self.f)
    }

    /// Diagonal preparation `diag(f, 1 − f)`.
    pub fn preparation(&self) -> QubitOperator {
        QubitOperator::diag(self.f, 1.0 - self.f)
    }

    pub fn povm(&self) -> NoisyPovm {
        NoisyPovm::from_valid(self.q)
    }
}

/// Two-outcome POVM `M̃_k = (1 − q) M_k + q M_k̄`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoisyPovm {
    pub m0: QubitOperator,
    pub m1: QubitOperator,
}

impl NoisyPovm {
    fn from_valid(q: f64) -> Self {
        Self {
            m0: QubitOperator::diag(1.0 - q, q),
            m1: QubitOperator::diag(q, 1.0 - q),
        }
    }

    pub fn element(&self, k: usize) -> &QubitOperator {
        match k {
            0 => &self.m0,
            1 => &self.m1,
            _ => panic!("outcome bit out of range: {k}"),
        }
    }
}

pub fn make_noisy_povm(q: f64) -> Result<NoisyPovm> {
    check_noise_fraction(q)?;
    Ok(NoisyPovm::from_valid(q))
}

/// `⟨k̄| m |k̄⟩`: the weight an outcome-`k` element puts on the wrong basis state.
pub fn noise_fraction(m: &QubitOperator, k: usize) -> f64 {
    m.diag_entry(1 - k)
}

/// Noisy preparation with `ρ₀₀ = f`, `ρ₁₁ = 1 − f` and `ρ₀₁ = coherence`.
pub fn make_preparation(f: f64, coherence: Complex64) -> Result<QubitOperator> {
    check_fidelity(f)?;
    let bound = (f * (1.0 - f)).sqrt();
    if coherence.norm() > bound + ALGEBRA_TOL {
        return Err(SpamError::InvalidParameter {
            name: "coherence",
            value: coherence.norm(),
            constraint: "|rho_01| must not exceed sqrt(f(1-f)) for a positive state",
        });
    }
    Ok(QubitOperator::hermitian(f, 1.0 - f, coherence))
}

/// Depolarizing CNOT `(1 − ε) V s V† + ε tr[s] 1/4`, applied linearly so it
/// also acts on unnormalized operators.
///
/// `eps = 1` is accepted here (the channel is still trace preserving); only
/// [`NoiseParameters`] excludes it.
pub fn apply_noisy_cnot(eps: f64, s: &TwoQubitOperator) -> Result<TwoQubitOperator> {
    if !(0.0..=1.0).contains(&eps) {
        return Err(SpamError::InvalidParameter {
            name: "eps",
            value: eps,
            constraint: "CNOT depolarizing fraction must lie in [0, 1]",
        });
    }
    Ok(noisy_cnot_unchecked(eps, s))
}

#[inline]
pub(crate) fn noisy_cnot_unchecked(eps: f64, s: &TwoQubitOperator) -> TwoQubitOperator {
    let mut out = cnot_conjugate(s);
    if eps == 0.0 {
        return out;
    }
    let mixed = 0.25 * eps * s.trace();
    for (i, row) in out.entries.iter_mut().enumerate() {
        for (j, x) in row.iter_mut().enumerate() {
            *x *= 1.0 - eps;
            if i == j {
                *x += mixed;
            }
        }
    }
    out
}
