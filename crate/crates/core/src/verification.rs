//! Error-rate verification from two-qubit outcome statistics.
//!
//! The experiment prepares two noisy qubits, couples them with a noisy CNOT
//! (first qubit as control) and reads both out with the noisy POVM. The four
//! outcome probabilities depend on `(f, q, eps)` and, unlike the single-copy
//! readout probability, determine all three.

use serde::{Deserialize, Serialize};

use crate::analytic::{fidelity_limit, noisy_trace, purification_condition, PurificationTrace};
use crate::error::{Result, SpamError};
use crate::model::NoiseParameters;

/// Tolerance on `Σ p(ij) = 1` for probability input.
pub const NORMALIZATION_TOL: f64 = 1e-9;

/// Outcome distribution over `00, 01, 10, 11` (system bit first), optionally
/// with the raw counts it was normalized from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutcomeStatistics {
    p: [f64; 4],
    counts: Option<[u64; 4]>,
}

impl OutcomeStatistics {
    pub fn from_probabilities(p: [f64; 4]) -> Result<Self> {
        if let Some(bad) = p.iter().find(|x| !x.is_finite() || **x < 0.0) {
            return Err(SpamError::InvalidStatistics(format!(
                "probabilities must be finite and non-negative, got {bad}"
            )));
        }
        let sum: f64 = p.iter().sum();
        if (sum - 1.0).abs() > NORMALIZATION_TOL {
            return Err(SpamError::InvalidStatistics(format!(
                "probabilities must sum to 1, got {sum}"
            )));
        }
        Ok(Self { p, counts: None })
    }

    /// Builds the distribution from `(p01, p10, p11)` with `p00` fixed by
    /// normalization.
    pub fn from_triple(p01: f64, p10: f64, p11: f64) -> Result<Self> {
        Self::from_probabilities([1.0 - p01 - p10 - p11, p01, p10, p11])
    }

    pub fn from_counts(counts: [u64; 4]) -> Result<Self> {
        let shots: u64 = counts.iter().sum();
        if shots == 0 {
            return Err(SpamError::InvalidStatistics("counts contain no shots".into()));
        }
        let n = shots as f64;
        Ok(Self {
            p: counts.map(|c| c as f64 / n),
            counts: Some(counts),
        })
    }

    pub fn probabilities(&self) -> [f64; 4] {
        self.p
    }

    pub fn counts(&self) -> Option<[u64; 4]> {
        self.counts
    }

    pub fn shots(&self) -> Option<u64> {
        self.counts.map(|c| c.iter().sum())
    }

    pub fn p00(&self) -> f64 {
        self.p[0]
    }
    pub fn p01(&self) -> f64 {
        self.p[1]
    }
    pub fn p10(&self) -> f64 {
        self.p[2]
    }
    pub fn p11(&self) -> f64 {
        self.p[3]
    }
}

/// Single-copy readout probability `p(0) = f(1 − q) + (1 − f)q`.
///
/// Symmetric in the roles of preparation and readout error, so one noisy
/// qubit cannot tell them apart: `(0.9, 0)` and `(1, 0.1)` give the same value.
pub fn single_copy_probability(f: f64, q: f64) -> f64 {
    f * (1.0 - q) + (1.0 - f) * q
}

/// `p(ij) = F_ij(f, q, eps)` for the CNOT-coupled verification circuit.
///
/// After the CNOT the basis weights are `f²` on `00`, `f(1−f)` on `01` and
/// `11`, and `(1−f)²` on `10`; each bit is then flipped with probability `q`
/// and the gate's depolarized fraction contributes `eps/4` everywhere.
pub fn forward_probabilities(params: &NoiseParameters) -> OutcomeStatistics {
    let (f, q, eps) = (params.f(), params.q(), params.eps());
    let (g, r) = (1.0 - f, 1.0 - q);
    let keep = 1.0 - eps;
    let mixed = 0.25 * eps;
    let p00 = keep * (f * f * r * r + f * g * r * q + g * f * q * q + g * g * q * r) + mixed;
    let p01 = keep * (f * f * r * q + f * g * r * r + g * f * q * r + g * g * q * q) + mixed;
    let p10 = keep * (f * f * q * r + f * g * q * q + g * f * r * q + g * g * r * r) + mixed;
    let p11 = keep * (f * f * q * q + f * g * q * r + g * f * r * r + g * g * r * q) + mixed;
    OutcomeStatistics {
        p: [p00, p01, p10, p11],
        counts: None,
    }
}

/// Raw model evaluation on an unvalidated parameter vector `[f, q, eps]`.
fn model(theta: &[f64; 3]) -> [f64; 4] {
    let (f, q, eps) = (theta[0], theta[1], theta[2]);
    let (c, u, s) = (2.0 * f - 1.0, 1.0 - 2.0 * q, 1.0 - eps);
    let (a, b, cc) = (s * u * c, s * u * c * c, s * u * u * c);
    [
        0.25 * (1.0 + a + b + cc),
        0.25 * (1.0 + a - b - cc),
        0.25 * (1.0 - a + b - cc),
        0.25 * (1.0 - a - b + cc),
    ]
}

/// `∂p(ij)/∂[f, q, eps]`, rows in outcome order.
///
/// Uses the correlators `⟨Z₁⟩ = s·u·c`, `⟨Z₂⟩ = s·u·c²`, `⟨Z₁Z₂⟩ = s·u²·c` with
/// `c = 2f − 1`, `u = 1 − 2q`, `s = 1 − eps`.
pub fn jacobian(theta: &[f64; 3]) -> [[f64; 3]; 4] {
    let (f, q, eps) = (theta[0], theta[1], theta[2]);
    let (c, u, s) = (2.0 * f - 1.0, 1.0 - 2.0 * q, 1.0 - eps);
    let da = [2.0 * s * u, -2.0 * s * c, -u * c];
    let db = [4.0 * s * u * c, -2.0 * s * c * c, -u * c * c];
    let dc = [2.0 * s * u * u, -4.0 * s * u * c, -u * u * c];
    let signs = [(1.0, 1.0, 1.0), (1.0, -1.0, -1.0), (-1.0, 1.0, -1.0), (-1.0, -1.0, 1.0)];
    let mut out = [[0.0; 3]; 4];
    for (row, (sa, sb, sc)) in out.iter_mut().zip(signs) {
        for k in 0..3 {
            row[k] = 0.25 * (sa * da[k] + sb * db[k] + sc * dc[k]);
        }
    }
    out
}

/// Settings for [`estimate_parameters`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Starting points per axis of the multi-start grid.
    pub grid_per_axis: usize,
    pub max_iterations: usize,
    /// Residual norm below which a local fit counts as a root.
    pub residual_tolerance: f64,
    /// Minimum parameter distance separating two reported roots.
    pub distinct_distance: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            grid_per_axis: 5,
            max_iterations: 200,
            residual_tolerance: 1e-10,
            distinct_distance: 1e-3,
        }
    }
}

/// One local least-squares fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub params: NoiseParameters,
    /// `‖p_obs − F(params)‖₂`.
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationResult {
    pub params: NoiseParameters,
    pub residual: f64,
    /// Other feasible roots, further than `distinct_distance` from `params`
    /// and from each other.
    pub alternates: Vec<Candidate>,
    /// Iterations spent by the winning start.
    pub iterations: usize,
    pub converged: bool,
    /// Every multi-start fit, in grid order.
    pub candidates: Vec<Candidate>,
}

impl VerificationResult {
    /// `(1 − f, q, eps)`.
    pub fn error_rates(&self) -> [f64; 3] {
        self.params.error_rates()
    }
}

const F_MIN: f64 = 0.5 + 1e-12;
const Q_MAX: f64 = 0.5 - 1e-12;
const EPS_MAX: f64 = 1.0 - 1e-12;

fn project(theta: [f64; 3]) -> [f64; 3] {
    [
        theta[0].clamp(F_MIN, 1.0),
        theta[1].clamp(0.0, Q_MAX),
        theta[2].clamp(0.0, EPS_MAX),
    ]
}

fn residual_vector(theta: &[f64; 3], obs: &[f64; 4]) -> [f64; 4] {
    let p = model(theta);
    [p[0] - obs[0], p[1] - obs[1], p[2] - obs[2], p[3] - obs[3]]
}

fn norm2(r: &[f64; 4]) -> f64 {
    r.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Solves the 3×3 system `a x = b` by Gaussian elimination with partial pivoting.
fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let pivot = (col..3).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..3 {
            let factor = a[row][col] / a[col][col];
            for k in col..3 {
                a[row][k] -= factor * a[col][k];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = [0.0; 3];
    for row in (0..3).rev() {
        let tail: f64 = (row + 1..3).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - tail) / a[row][row];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

struct LocalFit {
    theta: [f64; 3],
    residual: f64,
    iterations: usize,
    converged: bool,
}

/// Projected Levenberg–Marquardt from one starting point.
fn local_fit(obs: &[f64; 4], start: [f64; 3], max_iterations: usize) -> LocalFit {
    const ZERO_RESIDUAL: f64 = 1e-15;
    const STEP_TOL: f64 = 1e-14;
    const LAMBDA_MAX: f64 = 1e16;

    let mut theta = project(start);
    let mut r = residual_vector(&theta, obs);
    let mut cost = norm2(&r);
    let mut lambda = 1e-3;

    for it in 1..=max_iterations {
        if cost <= ZERO_RESIDUAL {
            return LocalFit { theta, residual: cost, iterations: it - 1, converged: true };
        }
        let jac = jacobian(&theta);
        let mut jtj = [[0.0; 3]; 3];
        let mut jtr = [0.0; 3];
        for (row, ri) in jac.iter().zip(r) {
            for a in 0..3 {
                jtr[a] += row[a] * ri;
                for b in 0..3 {
                    jtj[a][b] += row[a] * row[b];
                }
            }
        }
        let scale_floor = 1e-12 * (jtj[0][0] + jtj[1][1] + jtj[2][2]).max(1e-300);
        let mut damped = jtj;
        for k in 0..3 {
            damped[k][k] += lambda * jtj[k][k].max(scale_floor);
        }
        let step = solve3(damped, jtr.map(|g| -g));
        let candidate = step.map(|d| project([theta[0] + d[0], theta[1] + d[1], theta[2] + d[2]]));
        let improved = candidate.and_then(|next| {
            let r_next = residual_vector(&next, obs);
            let c_next = norm2(&r_next);
            (c_next < cost).then_some((next, r_next, c_next))
        });
        match improved {
            Some((next, r_next, c_next)) => {
                let moved = (0..3).map(|k| (next[k] - theta[k]).abs()).fold(0.0, f64::max);
                theta = next;
                r = r_next;
                cost = c_next;
                lambda = (lambda / 3.0).max(1e-15);
                if moved < STEP_TOL {
                    return LocalFit { theta, residual: cost, iterations: it, converged: true };
                }
            }
            None => {
                lambda *= 4.0;
                if lambda > LAMBDA_MAX {
                    // no descent direction left inside the box
                    return LocalFit { theta, residual: cost, iterations: it, converged: true };
                }
            }
        }
    }
    LocalFit {
        theta,
        residual: cost,
        iterations: max_iterations,
        converged: cost <= ZERO_RESIDUAL,
    }
}

fn grid_starts(per_axis: usize) -> Vec<[f64; 3]> {
    let g = per_axis.max(1);
    let mid = |i: usize| (i as f64 + 0.5) / g as f64;
    let mut out = Vec::with_capacity(g * g * g);
    for i in 0..g {
        for j in 0..g {
            for k in 0..g {
                out.push([0.5 + 0.5 * mid(i), 0.5 * mid(j), mid(k)]);
            }
        }
    }
    out
}

fn distance(a: &NoiseParameters, b: &NoiseParameters) -> f64 {
    let d = [a.f() - b.f(), a.q() - b.q(), a.eps() - b.eps()];
    d.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn candidate_order(a: &Candidate, b: &Candidate) -> std::cmp::Ordering {
    a.residual
        .total_cmp(&b.residual)
        .then(a.params.f().total_cmp(&b.params.f()))
        .then(a.params.q().total_cmp(&b.params.q()))
        .then(a.params.eps().total_cmp(&b.params.eps()))
}

/// Box-constrained least squares `min ‖p_obs − F(f, q, eps)‖₂` over
/// `f ∈ (1/2, 1]`, `q ∈ [0, 1/2)`, `eps ∈ [0, 1)`, multi-started from a
/// deterministic grid.
pub fn estimate_parameters(obs: &OutcomeStatistics, options: &SolverOptions) -> Result<VerificationResult> {
    let p = obs.probabilities();
    if p.iter().any(|x| *x < 0.0 || !x.is_finite()) {
        return Err(SpamError::InvalidStatistics("negative or non-finite probability".into()));
    }
    let candidates: Vec<Candidate> = grid_starts(options.grid_per_axis)
        .into_iter()
        .map(|start| {
            let fit = local_fit(&p, start, options.max_iterations);
            Candidate {
                params: NoiseParameters::new(fit.theta[0], fit.theta[1], fit.theta[2])
                    .expect("projected parameters lie in the box"),
                residual: fit.residual,
                iterations: fit.iterations,
                converged: fit.converged,
            }
        })
        .collect();

    let best = *candidates
        .iter()
        .min_by(|a, b| candidate_order(a, b))
        .expect("grid has at least one start");

    let mut roots: Vec<Candidate> = candidates
        .iter()
        .filter(|c| c.residual < options.residual_tolerance)
        .copied()
        .collect();
    roots.sort_by(candidate_order);
    let mut alternates: Vec<Candidate> = Vec::new();
    for c in roots {
        let separated = distance(&c.params, &best.params) > options.distinct_distance
            && alternates
                .iter()
                .all(|a| distance(&a.params, &c.params) > options.distinct_distance);
        if separated {
            alternates.push(c);
        }
    }

    Ok(VerificationResult {
        params: best.params,
        residual: best.residual,
        alternates,
        iterations: best.iterations,
        converged: best.converged,
        candidates,
    })
}

/// Delta-method standard errors of `(f, q, eps)` for a fit to `shots`
/// multinomial samples drawn at `params`.
pub fn parameter_standard_errors(params: &NoiseParameters, shots: u64) -> Option<[f64; 3]> {
    let theta = [params.f(), params.q(), params.eps()];
    let p = model(&theta);
    let jac = jacobian(&theta);
    let n = shots as f64;
    let mut jtj = [[0.0; 3]; 3];
    for row in &jac {
        for a in 0..3 {
            for b in 0..3 {
                jtj[a][b] += row[a] * row[b];
            }
        }
    }
    // inv(JᵀJ) column by column
    let mut inv = [[0.0; 3]; 3];
    for col in 0..3 {
        let mut e = [0.0; 3];
        e[col] = 1.0;
        let x = solve3(jtj, e)?;
        for row in 0..3 {
            inv[row][col] = x[row];
        }
    }
    // pseudo-inverse rows: P = inv(JᵀJ) Jᵀ, 3×4
    let mut pinv = [[0.0; 4]; 3];
    for a in 0..3 {
        for (o, row) in jac.iter().enumerate() {
            pinv[a][o] = (0..3).map(|b| inv[a][b] * row[b]).sum();
        }
    }
    let sigma = |i: usize, j: usize| {
        let d = if i == j { p[i] } else { 0.0 };
        (d - p[i] * p[j]) / n
    };
    let mut out = [0.0; 3];
    for (a, o) in out.iter_mut().enumerate() {
        let mut var = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                var += pinv[a][i] * sigma(i, j) * pinv[a][j];
            }
        }
        *o = var.max(0.0).sqrt();
    }
    Some(out)
}

/// Purification outlook for verified error rates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PurificationPrediction {
    pub params: NoiseParameters,
    /// Whether one round raises the fidelity.
    pub condition: bool,
    pub trace: PurificationTrace,
    pub fidelity_limit: f64,
}

pub fn predict_purification(result: &VerificationResult, n_max: usize) -> Result<PurificationPrediction> {
    if !result.converged {
        return Err(SpamError::NotConverged);
    }
    let params = result.params;
    Ok(PurificationPrediction {
        params,
        condition: purification_condition(&params),
        trace: noisy_trace(&params, &params.preparation(), n_max)?,
        fidelity_limit: fidelity_limit(&params),
    })
}
