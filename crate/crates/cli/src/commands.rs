use serde_json::{json, Map, Value};
use spam_purify::analytic::{
    critical_epsilon, fidelity_limit, noise_fraction_limit, noisy_trace, purification_condition,
    purified_povm_closed_form, purified_povm_recurrence, rounds_to_target, state_trace_closed_form,
};
use spam_purify::catalog::{CRITICAL_TABLE_FIDELITIES, DEMO_CASES};
use spam_purify::exact::{run_measurement_purification, run_state_purification};
use spam_purify::montecarlo::{mc_measurement_purification, mc_state_purification};
use spam_purify::verification::{
    estimate_parameters, forward_probabilities, parameter_standard_errors, predict_purification,
};
use spam_purify::{NoiseParameters, QubitOperator, SolverOptions};

use crate::config::{check_threshold, check_trials, noise_parameters, CliError, RunConfig};
use crate::report::{col, sig12, Cell, Display, Report};

/// Fidelity columns shown for each demonstration case.
const CASE_ROUNDS: usize = 3;

/// Runs `config`. A report that was produced despite a failure (solver
/// non-convergence) comes back together with that failure.
pub fn execute(config: &RunConfig) -> Result<(Report, Option<CliError>), CliError> {
    match config {
        RunConfig::PurifyState {
            f,
            q,
            eps,
            n,
            trials,
            seed,
        } => purify_state(config, noise_parameters(*f, *q, *eps)?, *n, *trials, *seed).map(|r| (r, None)),
        RunConfig::PurifyMeasurement {
            f,
            q,
            eps,
            m,
            k,
            trials,
            seed,
        } => purify_measurement(config, noise_parameters(*f, *q, *eps)?, *m, *k, *trials, *seed).map(|r| (r, None)),
        RunConfig::Table1 => Ok((table1(config), None)),
        RunConfig::Cases => Ok((cases(config)?, None)),
        RunConfig::Verify { .. } => verify(config),
        RunConfig::Sweep {
            f,
            eps,
            threshold,
            n_cap,
        } => sweep(config, f, eps, *threshold, *n_cap).map(|r| (r, None)),
    }
}

fn purify_state(
    config: &RunConfig,
    p: NoiseParameters,
    n: usize,
    trials: Option<u64>,
    seed: u64,
) -> Result<Report, CliError> {
    check_trials(trials)?;
    let rho = p.preparation();
    let closed = if p.eps() == 0.0 {
        state_trace_closed_form(&p, &rho, n)?
    } else {
        noisy_trace(&p, &rho, n)?
    };
    let exact = run_state_purification(&rho, &p, n)?;

    let mut columns = vec![
        col("n", Display::Auto),
        col("fidelity", Display::Fixed(6)),
        col("p_succ", Display::Fixed(6)),
        col("fidelity_exact", Display::Fixed(6)),
        col("p_succ_exact", Display::Fixed(6)),
    ];
    if trials.is_some() {
        columns.extend([
            col("mc_fidelity", Display::Fixed(6)),
            col("mc_fidelity_se", Display::Auto),
            col("mc_p_succ", Display::Fixed(6)),
            col("mc_p_succ_se", Display::Auto),
        ]);
    }
    let title = format!("state purification: f = {}, q = {}, eps = {}", p.f(), p.q(), p.eps());
    let mut report = Report::new(title, config.clone(), columns);
    for (c, e) in closed.rounds.iter().zip(&exact.rounds) {
        let mut row: Vec<Cell> = vec![
            c.n.into(),
            c.fidelity.into(),
            c.success_prob.into(),
            e.fidelity.into(),
            e.success_prob.into(),
        ];
        if let Some(t) = trials {
            let mc = mc_state_purification(&rho, &p, c.n, t, seed)?;
            row.extend([
                mc.fidelity.value.into(),
                mc.fidelity.std_error.into(),
                mc.p_succ.value.into(),
                mc.p_succ.std_error.into(),
            ]);
        }
        report.push_row(row);
    }
    report.limits = vec![
        ("fidelity_limit", fidelity_limit(&p)),
        ("noise_fraction_limit", noise_fraction_limit(&p)),
        ("critical_epsilon_balanced", critical_epsilon(p.f())?),
    ];
    report.condition = Some(purification_condition(&p));
    if trials.is_some() {
        report
            .notes
            .push("mc_fidelity uses a noiseless final readout available only in simulation".into());
    }
    Ok(report)
}

fn purify_measurement(
    config: &RunConfig,
    p: NoiseParameters,
    m_max: usize,
    k: usize,
    trials: Option<u64>,
    seed: u64,
) -> Result<Report, CliError> {
    check_trials(trials)?;
    let mut columns = vec![
        col("m", Display::Auto),
        col("q_m", Display::Auto),
        col("p_succ", Display::Fixed(6)),
        col("q_m_exact", Display::Auto),
        col("p_succ_exact", Display::Fixed(6)),
    ];
    if trials.is_some() {
        columns.extend([
            col("mc_q_m", Display::Auto),
            col("mc_q_m_se", Display::Auto),
            col("mc_p_succ", Display::Fixed(6)),
            col("mc_p_succ_se", Display::Auto),
        ]);
    }
    let title = format!(
        "measurement purification: outcome {k}, f = {}, q = {}, eps = {}",
        p.f(),
        p.q(),
        p.eps()
    );
    let mut report = Report::new(title, config.clone(), columns);
    // the wrong-outcome input state: its accepted reports of k are errors
    let sigma = QubitOperator::projector(1 - k);
    for m in 0..=m_max {
        let closed = if p.eps() == 0.0 {
            purified_povm_closed_form(&p, m)?
        } else {
            purified_povm_recurrence(&p, m)
        };
        let exact = run_measurement_purification(&p, m, k)?;
        let mut row: Vec<Cell> = vec![
            m.into(),
            closed.q_m.into(),
            closed.p_succ.into(),
            exact.q_m.into(),
            exact.p_succ.into(),
        ];
        if let Some(t) = trials {
            let mc = mc_measurement_purification(&sigma, &p, m, t, seed)?;
            row.extend([
                mc.q_hat.value.into(),
                mc.q_hat.std_error.into(),
                mc.accept_rate.value.into(),
                mc.accept_rate.std_error.into(),
            ]);
        }
        report.push_row(row);
    }
    report.limits = vec![("q_limit", noise_fraction_limit(&p))];
    report.condition = Some(purification_condition(&p));
    Ok(report)
}

fn table1(config: &RunConfig) -> Report {
    let mut report = Report::new(
        "critical CNOT error rates for balanced SPAM noise (1 - f = q)",
        config.clone(),
        vec![col("f", Display::Fixed(2)), col("eps_c", Display::Fixed(4))],
    );
    for f in CRITICAL_TABLE_FIDELITIES {
        let ec = critical_epsilon(f).expect("table fidelities are valid");
        report.push_row(vec![f.into(), ec.into()]);
    }
    report
}

fn cases(config: &RunConfig) -> Result<Report, CliError> {
    let mut columns = vec![
        col("case", Display::Auto),
        col("one_minus_f", Display::Fixed(2)),
        col("q", Display::Fixed(2)),
        col("eps", Display::Fixed(2)),
        col("p01", Display::Fixed(4)),
        col("p10", Display::Fixed(4)),
        col("p11", Display::Fixed(4)),
        col("est_one_minus_f", Display::Fixed(4)),
        col("est_q", Display::Fixed(4)),
        col("est_eps", Display::Fixed(4)),
    ];
    const ROUND_COLUMNS: [&str; CASE_ROUNDS] = ["f1", "f2", "f3"];
    columns.extend(ROUND_COLUMNS.map(|name| col(name, Display::Fixed(3))));
    columns.extend([col("f_inf", Display::Fixed(3)), col("condition", Display::Auto)]);

    let mut report = Report::new(
        "verification and purification of the demonstration cases",
        config.clone(),
        columns,
    );
    for case in DEMO_CASES {
        let p = NoiseParameters::from_error_rates(case.error_rates)?;
        let obs = forward_probabilities(&p);
        let fit = estimate_parameters(&obs, &SolverOptions::default())?;
        let prediction = predict_purification(&fit, CASE_ROUNDS).map_err(|_| CliError::NotConverged {
            residual: fit.residual,
        })?;
        let est = fit.error_rates();
        let mut row: Vec<Cell> = vec![case.label.into()];
        row.extend(case.error_rates.map(Cell::from));
        row.extend([obs.p01(), obs.p10(), obs.p11()].map(Cell::from));
        row.extend(est.map(Cell::from));
        row.extend(prediction.trace.rounds[1..].iter().map(|r| Cell::from(r.fidelity)));
        row.extend([prediction.fidelity_limit.into(), prediction.condition.into()]);
        report.push_row(row);
    }
    Ok(report)
}

fn verify(config: &RunConfig) -> Result<(Report, Option<CliError>), CliError> {
    let RunConfig::Verify {
        observation,
        renormalize,
        threshold,
        n_max,
        n_cap,
        max_iterations,
    } = config
    else {
        unreachable!("verify dispatched with another config")
    };
    check_threshold(*threshold)?;
    if *max_iterations == 0 {
        return Err(CliError::BadParameters("max-iterations must be at least 1".into()));
    }
    let obs = observation.statistics(*renormalize)?;
    let options = SolverOptions {
        max_iterations: *max_iterations,
        ..SolverOptions::default()
    };
    let fit = estimate_parameters(&obs, &options).map_err(|e| CliError::BadInput(e.to_string()))?;
    let rates = fit.error_rates();

    let mut estimate = Map::new();
    estimate.insert("one_minus_f".into(), json!(sig12(rates[0])));
    estimate.insert("q".into(), json!(sig12(rates[1])));
    estimate.insert("eps".into(), json!(sig12(rates[2])));
    estimate.insert("residual".into(), json!(sig12(fit.residual)));
    estimate.insert("converged".into(), json!(fit.converged));
    estimate.insert("iterations".into(), json!(fit.iterations));
    let alternates: Vec<Value> = fit
        .alternates
        .iter()
        .map(|c| {
            let r = c.params.error_rates();
            json!({
                "one_minus_f": sig12(r[0]),
                "q": sig12(r[1]),
                "eps": sig12(r[2]),
                "residual": sig12(c.residual),
            })
        })
        .collect();
    estimate.insert("alternates".into(), Value::Array(alternates));
    let se = obs.shots().and_then(|shots| parameter_standard_errors(&fit.params, shots));
    estimate.insert(
        "standard_errors".into(),
        se.map_or(Value::Null, |s| {
            json!({ "one_minus_f": sig12(s[0]), "q": sig12(s[1]), "eps": sig12(s[2]) })
        }),
    );

    let mut report = Report::new(
        format!(
            "verified error rates: 1 - f = {:.6}, q = {:.6}, eps = {:.6} (residual {:.2e})",
            rates[0], rates[1], rates[2], fit.residual
        ),
        config.clone(),
        vec![
            col("n", Display::Auto),
            col("fidelity", Display::Fixed(6)),
            col("p_succ", Display::Fixed(6)),
        ],
    );
    report.extra.insert("estimate".into(), Value::Object(estimate));
    if let Some(s) = se {
        report.notes.push(format!(
            "standard errors: 1 - f {:.2e}, q {:.2e}, eps {:.2e}",
            s[0], s[1], s[2]
        ));
    }
    for c in &fit.alternates {
        let r = c.params.error_rates();
        report.notes.push(format!(
            "alternate root: 1 - f = {:.6}, q = {:.6}, eps = {:.6} (residual {:.2e})",
            r[0], r[1], r[2], c.residual
        ));
    }

    if !fit.converged {
        report.extra.insert("recommended_targets".into(), Value::Null);
        report.notes.push("solver did not converge; no purification prediction".into());
        return Ok((report, Some(CliError::NotConverged { residual: fit.residual })));
    }

    let prediction = predict_purification(&fit, *n_max)?;
    for r in &prediction.trace.rounds {
        report.push_row(vec![r.n.into(), r.fidelity.into(), r.success_prob.into()]);
    }
    report.limits = vec![
        ("fidelity_limit", prediction.fidelity_limit),
        ("noise_fraction_limit", noise_fraction_limit(&fit.params)),
    ];
    report.condition = Some(prediction.condition);
    let f = fit.params.f();
    let targets = rounds_to_target(&fit.params, (f, 1.0 - f), *threshold, *n_cap);
    report.extra.insert("recommended_targets".into(), json!(targets));
    report.notes.push(match targets {
        Some(n) => format!("target qubits to reach fidelity {threshold}: {n}"),
        None => format!("fidelity {threshold} not reachable within {n_cap} target qubits"),
    });
    Ok((report, None))
}

fn sweep(config: &RunConfig, fs: &[f64], epss: &[f64], threshold: f64, n_cap: usize) -> Result<Report, CliError> {
    check_threshold(threshold)?;
    let mut report = Report::new(
        format!("target qubits to reach fidelity {threshold}, balanced SPAM noise (1 - f = q)"),
        config.clone(),
        vec![
            col("f_initial", Display::Fixed(4)),
            col("eps", Display::Fixed(4)),
            col("eps_c", Display::Fixed(4)),
            col("n_required", Display::Auto),
            col("fidelity_limit", Display::Fixed(6)),
            col("condition", Display::Auto),
        ],
    );
    for &f in fs {
        let eps_c = critical_epsilon(f)?;
        for &eps in epss {
            let p = NoiseParameters::balanced(f, eps)?;
            let n = rounds_to_target(&p, (f, 1.0 - f), threshold, n_cap);
            report.push_row(vec![
                f.into(),
                eps.into(),
                eps_c.into(),
                n.into(),
                fidelity_limit(&p).into(),
                purification_condition(&p).into(),
            ]);
        }
    }
    Ok(report)
}
