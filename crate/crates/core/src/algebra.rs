//! Dense complex operators on one and two qubits.
//!
//! Two-qubit operators use the computational basis order `00, 01, 10, 11`
//! with the system (control) qubit in the first slot and the target qubit in
//! the second. Nothing larger than 4×4 is ever materialized: the purification
//! recurrences bring in one target qubit at a time and trace it out again.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Result, SpamError};

/// Entrywise tolerance for algebraic identities (Hermiticity, traces).
pub const ALGEBRA_TOL: f64 = 1e-12;
/// Tolerance on `max |U U† − 1|` accepted for gates.
pub const UNITARITY_TOL: f64 = 1e-9;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// A 2×2 complex operator: a density matrix, a POVM element, or an
/// unnormalized accepted state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitOperator {
    pub entries: [[Complex64; 2]; 2],
}

/// A 4×4 complex operator on system ⊗ target.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoQubitOperator {
    pub entries: [[Complex64; 4]; 4],
}

impl QubitOperator {
    pub const fn new(entries: [[Complex64; 2]; 2]) -> Self {
        Self { entries }
    }

    pub const fn zero() -> Self {
        Self::new([[ZERO; 2]; 2])
    }

    pub const fn identity() -> Self {
        Self::new([[ONE, ZERO], [ZERO, ONE]])
    }

    /// Real diagonal operator `diag(d0, d1)`.
    pub const fn diag(d0: f64, d1: f64) -> Self {
        Self::new([
            [Complex64::new(d0, 0.0), ZERO],
            [ZERO, Complex64::new(d1, 0.0)],
        ])
    }

    /// Computational-basis projector `|k⟩⟨k|`.
    pub fn projector(k: usize) -> Self {
        assert!(k < 2, "qubit basis index out of range: {k}");
        if k == 0 {
            Self::diag(1.0, 0.0)
        } else {
            Self::diag(0.0, 1.0)
        }
    }

    /// Builds the Hermitian operator with the given real diagonal and
    /// upper off-diagonal entry.
    pub fn hermitian(d0: f64, d1: f64, off: Complex64) -> Self {
        Self::new([[Complex64::new(d0, 0.0), off], [off.conj(), Complex64::new(d1, 0.0)]])
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.entries[i][j]
    }

    /// Real part of the diagonal entry `⟨k|A|k⟩`.
    #[inline]
    pub fn diag_entry(&self, k: usize) -> f64 {
        self.entries[k][k].re
    }

    #[inline]
    pub fn trace(&self) -> Complex64 {
        self.entries[0][0] + self.entries[1][1]
    }

    pub fn dagger(&self) -> Self {
        let e = &self.entries;
        Self::new([[e[0][0].conj(), e[1][0].conj()], [e[0][1].conj(), e[1][1].conj()]])
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = *self;
        for row in out.entries.iter_mut() {
            for x in row.iter_mut() {
                *x *= s;
            }
        }
        out
    }

    /// Largest entrywise modulus of `self − other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut m: f64 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                m = m.max((self.entries[i][j] - other.entries[i][j]).norm());
            }
        }
        m
    }

    pub fn hermiticity_deviation(&self) -> f64 {
        self.max_abs_diff(&self.dagger())
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_deviation() <= tol
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn eigenvalues(&self) -> [f64; 2] {
        let a = self.entries[0][0].re;
        let d = self.entries[1][1].re;
        let b = 0.5 * (self.entries[0][1] + self.entries[1][0].conj());
        let mean = 0.5 * (a + d);
        let radius = (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt();
        [mean - radius, mean + radius]
    }

    pub fn is_psd(&self, tol: f64) -> bool {
        self.is_hermitian(tol) && self.eigenvalues()[0] >= -tol
    }

    /// Checks the density-matrix invariants: Hermitian, unit trace, PSD.
    pub fn validate_density(&self) -> Result<()> {
        let dev = self.hermiticity_deviation();
        if dev > ALGEBRA_TOL {
            return Err(SpamError::NotHermitian { deviation: dev });
        }
        let tr = self.trace();
        if (tr.re - 1.0).abs() > ALGEBRA_TOL || tr.im.abs() > ALGEBRA_TOL {
            return Err(SpamError::InvalidParameter {
                name: "trace",
                value: tr.re,
                constraint: "density matrix must have unit trace",
            });
        }
        let min = self.eigenvalues()[0];
        if min < -ALGEBRA_TOL {
            return Err(SpamError::NotPositive { min_eigenvalue: min });
        }
        Ok(())
    }

    /// Magnitude of the off-diagonal coherence `|A_01|`, symmetrized.
    pub fn coherence_magnitude(&self) -> f64 {
        self.entries[0][1].norm().max(self.entries[1][0].norm())
    }
}

impl Add for QubitOperator {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        for i in 0..2 {
            for j in 0..2 {
                self.entries[i][j] += rhs.entries[i][j];
            }
        }
        self
    }
}

impl Sub for QubitOperator {
    type Output = Self;
    fn sub(mut self, rhs: Self) -> Self {
        for i in 0..2 {
            for j in 0..2 {
                self.entries[i][j] -= rhs.entries[i][j];
            }
        }
        self
    }
}

impl Mul for QubitOperator {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let mut out = Self::zero();
        for i in 0..2 {
            for j in 0..2 {
                out.entries[i][j] =
                    self.entries[i][0] * rhs.entries[0][j] + self.entries[i][1] * rhs.entries[1][j];
            }
        }
        out
    }
}

impl TwoQubitOperator {
    pub const fn new(entries: [[Complex64; 4]; 4]) -> Self {
        Self { entries }
    }

    pub const fn zero() -> Self {
        Self::new([[ZERO; 4]; 4])
    }

    pub fn identity() -> Self {
        Self::diag([1.0; 4])
    }

    pub fn diag(d: [f64; 4]) -> Self {
        let mut out = Self::zero();
        for (i, v) in d.into_iter().enumerate() {
            out.entries[i][i] = Complex64::new(v, 0.0);
        }
        out
    }

    /// Projector onto the basis state with index `2*s + t`.
    pub fn basis_projector(index: usize) -> Self {
        let mut d = [0.0; 4];
        d[index] = 1.0;
        Self::diag(d)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.entries[i][j]
    }

    pub fn trace(&self) -> Complex64 {
        (0..4).map(|i| self.entries[i][i]).sum()
    }

    pub fn dagger(&self) -> Self {
        let mut out = Self::zero();
        for i in 0..4 {
            for j in 0..4 {
                out.entries[i][j] = self.entries[j][i].conj();
            }
        }
        out
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = *self;
        for row in out.entries.iter_mut() {
            for x in row.iter_mut() {
                *x *= s;
            }
        }
        out
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut m: f64 = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                m = m.max((self.entries[i][j] - other.entries[i][j]).norm());
            }
        }
        m
    }

    pub fn hermiticity_deviation(&self) -> f64 {
        self.max_abs_diff(&self.dagger())
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_deviation() <= tol
    }

    /// `max |U U† − 1|` entrywise.
    pub fn unitarity_deviation(&self) -> f64 {
        (*self * self.dagger()).max_abs_diff(&Self::identity())
    }

    /// Matrix-vector product on a 4-component state vector.
    pub fn apply(&self, v: &[Complex64; 4]) -> [Complex64; 4] {
        let mut out = [ZERO; 4];
        for (i, o) in out.iter_mut().enumerate() {
            *o = (0..4).map(|j| self.entries[i][j] * v[j]).sum();
        }
        out
    }
}

impl Add for TwoQubitOperator {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        for i in 0..4 {
            for j in 0..4 {
                self.entries[i][j] += rhs.entries[i][j];
            }
        }
        self
    }
}

impl Sub for TwoQubitOperator {
    type Output = Self;
    fn sub(mut self, rhs: Self) -> Self {
        for i in 0..4 {
            for j in 0..4 {
                self.entries[i][j] -= rhs.entries[i][j];
            }
        }
        self
    }
}

impl Mul for TwoQubitOperator {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let mut out = Self::zero();
        for i in 0..4 {
            for k in 0..4 {
                let a = self.entries[i][k];
                if a == ZERO {
                    continue;
                }
                for j in 0..4 {
                    out.entries[i][j] += a * rhs.entries[k][j];
                }
            }
        }
        out
    }
}

/// Kronecker product `a ⊗ b` with `a` on the system slot.
pub fn tensor(a: &QubitOperator, b: &QubitOperator) -> TwoQubitOperator {
    let mut out = TwoQubitOperator::zero();
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    out.entries[2 * i + k][2 * j + l] = a.entries[i][j] * b.entries[k][l];
                }
            }
        }
    }
    out
}

/// Traces out the target (second) qubit.
pub fn partial_trace_target(op: &TwoQubitOperator) -> QubitOperator {
    let mut out = QubitOperator::zero();
    for i in 0..2 {
        for j in 0..2 {
            out.entries[i][j] = op.entries[2 * i][2 * j] + op.entries[2 * i + 1][2 * j + 1];
        }
    }
    out
}

/// `tr_target[op · (1 ⊗ effect)]` without forming the product.
pub fn partial_trace_with_effect(op: &TwoQubitOperator, effect: &QubitOperator) -> QubitOperator {
    let mut out = QubitOperator::zero();
    for i in 0..2 {
        for j in 0..2 {
            let mut acc = ZERO;
            for t in 0..2 {
                for u in 0..2 {
                    acc += op.entries[2 * i + t][2 * j + u] * effect.entries[u][t];
                }
            }
            out.entries[i][j] = acc;
        }
    }
    out
}

/// `tr_target[(1 ⊗ state) · op]`: the Heisenberg-picture contraction of a
/// two-qubit effect against a target preparation.
pub fn contract_target_state(state: &QubitOperator, op: &TwoQubitOperator) -> QubitOperator {
    let mut out = QubitOperator::zero();
    for i in 0..2 {
        for j in 0..2 {
            let mut acc = ZERO;
            for t in 0..2 {
                for u in 0..2 {
                    acc += state.entries[t][u] * op.entries[2 * i + u][2 * j + t];
                }
            }
            out.entries[i][j] = acc;
        }
    }
    out
}

/// The two-qubit CNOT `|0⟩⟨0| ⊗ 1 + |1⟩⟨1| ⊗ X`, control first.
pub fn cnot() -> TwoQubitOperator {
    let mut out = TwoQubitOperator::zero();
    out.entries[0][0] = ONE;
    out.entries[1][1] = ONE;
    out.entries[2][3] = ONE;
    out.entries[3][2] = ONE;
    out
}

/// `u s u†`, rejecting gates that are not unitary to within [`UNITARITY_TOL`].
pub fn conjugate(u: &TwoQubitOperator, s: &TwoQubitOperator) -> Result<TwoQubitOperator> {
    let deviation = u.unitarity_deviation();
    if deviation > UNITARITY_TOL {
        return Err(SpamError::NonUnitary { deviation });
    }
    Ok(*u * *s * u.dagger())
}

/// CNOT conjugation as the basis permutation `10 ↔ 11`.
///
/// Equal to `conjugate(&cnot(), s)`; used on hot paths.
#[inline]
pub fn cnot_conjugate(s: &TwoQubitOperator) -> TwoQubitOperator {
    const PERM: [usize; 4] = [0, 1, 3, 2];
    let mut out = TwoQubitOperator::zero();
    for i in 0..4 {
        for j in 0..4 {
            out.entries[i][j] = s.entries[PERM[i]][PERM[j]];
        }
    }
    out
}
