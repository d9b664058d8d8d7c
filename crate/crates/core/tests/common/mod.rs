//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use spam_purify::{Complex64, QubitOperator, TwoQubitOperator};

/// Inverts the verification model in closed form from the Z correlators.
///
/// With `c = 2f − 1`, `u = 1 − 2q`, `s = 1 − eps` the circuit gives
/// `⟨Z₁⟩ = s·u·c`, `⟨Z₂⟩ = s·u·c²`, `⟨Z₁Z₂⟩ = s·u²·c`, hence
/// `c = ⟨Z₂⟩/⟨Z₁⟩`, `u = ⟨Z₁Z₂⟩/⟨Z₁⟩`, `s = ⟨Z₁⟩³/(⟨Z₂⟩⟨Z₁Z₂⟩)`.
pub fn invert_by_correlators(p: [f64; 4]) -> [f64; 3] {
    let z1 = p[0] + p[1] - p[2] - p[3];
    let z2 = p[0] - p[1] + p[2] - p[3];
    let z12 = p[0] - p[1] - p[2] + p[3];
    let c = z2 / z1;
    let u = z12 / z1;
    let s = z1 * z1 * z1 / (z2 * z12);
    [(1.0 + c) / 2.0, (1.0 - u) / 2.0, 1.0 - s]
}

/// Outcome probabilities by brute force: `tr[Φ(ρ⊗ρ)(M_i ⊗ M_j)]` with the
/// depolarizing CNOT written out as a dense 4×4 conjugation.
pub fn brute_force_outcomes(f: f64, q: f64, eps: f64) -> [f64; 4] {
    let rho = QubitOperator::diag(f, 1.0 - f);
    let joint = spam_purify::algebra::tensor(&rho, &rho);
    let v = spam_purify::algebra::cnot();
    let gated = (v * joint * v.dagger()).scale(1.0 - eps) + TwoQubitOperator::identity().scale(eps / 4.0);
    let m = [QubitOperator::diag(1.0 - q, q), QubitOperator::diag(q, 1.0 - q)];
    let mut out = [0.0; 4];
    for i in 0..2 {
        for j in 0..2 {
            let effect = spam_purify::algebra::tensor(&m[i], &m[j]);
            out[2 * i + j] = (gated * effect).trace().re;
        }
    }
    out
}

/// `Rz(a) Ry(b) Rz(c)`.
pub fn rotation(a: f64, b: f64, c: f64) -> QubitOperator {
    let rz = |t: f64| {
        QubitOperator::new([
            [Complex64::from_polar(1.0, -t / 2.0), Complex64::new(0.0, 0.0)],
            [Complex64::new(0.0, 0.0), Complex64::from_polar(1.0, t / 2.0)],
        ])
    };
    let (s, co) = (b / 2.0).sin_cos();
    let ry = QubitOperator::new([
        [Complex64::new(co, 0.0), Complex64::new(-s, 0.0)],
        [Complex64::new(s, 0.0), Complex64::new(co, 0.0)],
    ]);
    rz(a) * ry * rz(c)
}

/// `d` evenly spaced points from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, d: usize) -> Vec<f64> {
    if d == 1 {
        return vec![lo];
    }
    (0..d).map(|i| lo + (hi - lo) * i as f64 / (d - 1) as f64).collect()
}

/// Whether `value`, rounded or truncated to `decimals`, reproduces `printed`.
pub fn consistent_with_printed(value: f64, printed: f64, decimals: i32) -> bool {
    let ulp = 10f64.powi(-decimals);
    let rounded = (value - printed).abs() <= 0.5 * ulp + 1e-12;
    let truncated = value >= printed - 1e-12 && value < printed + ulp;
    rounded || truncated
}
