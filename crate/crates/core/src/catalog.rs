//! Reference parameter sets and their published figures.

/// A demonstration case: true error rates and the values reported for them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DemoCase {
    pub label: &'static str,
    /// `(1 − f, q, eps)`.
    pub error_rates: [f64; 3],
    /// Reported `(p01, p10, p11)`, 4 decimals.
    pub outcomes: [f64; 3],
    /// Reported `f⁽ⁿ⁾` for `n = 1, 2, ...`, 3 decimals.
    pub fidelities: &'static [f64],
    /// Reported `f⁽∞⁾`, 3 decimals.
    pub fidelity_limit: f64,
    pub condition: bool,
}

pub const DEMO_CASES: [DemoCase; 5] = [
    DemoCase {
        label: "Case 1",
        error_rates: [0.1, 0.1, 0.0],
        outcomes: [0.154, 0.09, 0.09],
        fidelities: &[0.976, 0.995, 0.999],
        fidelity_limit: 1.0,
        condition: true,
    },
    DemoCase {
        label: "Case 2",
        error_rates: [0.1, 0.05, 0.01],
        outcomes: [0.1252, 0.0540, 0.0896],
        fidelities: &[0.979, 0.994, 0.996],
        fidelity_limit: 0.996,
        condition: true,
    },
    DemoCase {
        label: "Case 3",
        error_rates: [0.03, 0.05, 0.03],
        outcomes: [0.0777, 0.0530, 0.0366],
        fidelities: &[0.989, 0.991],
        fidelity_limit: 0.991,
        condition: true,
    },
    DemoCase {
        label: "Case 4",
        error_rates: [0.05, 0.05, 0.05],
        outcomes: [0.0961, 0.0576, 0.0576],
        fidelities: &[0.980, 0.983],
        fidelity_limit: 0.984,
        condition: true,
    },
    DemoCase {
        label: "Case 5",
        error_rates: [0.01, 0.05, 0.1],
        outcomes: [0.0754, 0.0674, 0.0357],
        fidelities: &[0.971],
        fidelity_limit: 0.970,
        condition: false,
    },
];

/// Preparation fidelities of the critical-gate-error table.
pub const CRITICAL_TABLE_FIDELITIES: [f64; 6] = [1.0, 0.99, 0.97, 0.95, 0.93, 0.9];

/// Reported critical gate errors for [`CRITICAL_TABLE_FIDELITIES`], 4 decimals.
pub const CRITICAL_TABLE_VALUES: [f64; 6] = [0.0, 0.0374, 0.0986, 0.1460, 0.1830, 0.2236];
