//! Invariant checks on a single configured parameter point.

use qd_emission::dynamics::{propagate, zero_mode_count};
use qd_emission::operators::{max_abs, sigma_x};
use qd_emission::pipeline::full_model_with;
use qd_emission::Complex64;

use crate::config::ExperimentConfig;
use crate::error::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, value: f64, limit: f64) -> Check {
    Check {
        name,
        passed: value.is_finite() && value <= limit,
        detail: format!("{value:.3e} (limit {limit:.0e})"),
    }
}

/// Runs the invariant suite on the full model at `config.params`.
pub fn run_checks(config: &ExperimentConfig) -> Result<Vec<Check>, CliError> {
    let m = full_model_with(&config.params, config.detuning, &config.model)?;
    let l = &m.liouvillian;
    let rho = *m.steady_state.matrix();
    let mut out = Vec::new();

    out.push(check("self-consistency residual", m.solution.residual, config.model.solver.tol));
    let f_out = m
        .solution
        .f_values
        .iter()
        .map(|f| (-f).max(f - 1.0).max(0.0))
        .fold(0.0, f64::max);
    out.push(check("displacement within [0, 1]", f_out, 1e-12));
    out.push(check("generator trace defect", l.trace_defect(), 1e-12));
    out.push(check("stationarity |L rho_ss|", max_abs(&l.apply(&rho)), 1e-10));
    out.push(check("steady-state positivity", (-m.steady_state.eigenvalues()[0]).max(0.0), 1e-10));

    let modes = m.modes()?;
    let (zeros, _) = zero_mode_count(&modes.eigenvalues);
    out.push(Check {
        name: "unique stationary mode",
        passed: zeros == 1,
        detail: format!("{zeros} zero eigenvalue(s)"),
    });
    let unstable = modes.eigenvalues.iter().map(|v| v.re).fold(f64::MIN, f64::max);
    out.push(check("eigenvalues in closed left half-plane", unstable.max(0.0), 1e-10));

    let g0 = modes.g1(0.0);
    out.push(check(
        "g1(0) equals excited population",
        (g0 - Complex64::new(m.steady_state.excited_population(), 0.0)).norm(),
        1e-10,
    ));

    let start = sigma_x() * Complex64::new(0.5, 0.0) + qd_emission::operators::identity() * Complex64::new(0.5, 0.0);
    let drift = [1.0, 100.0, 1e4]
        .iter()
        .map(|&t| (propagate(l, &start, t).trace() - Complex64::new(1.0, 0.0)).norm())
        .fold(0.0, f64::max);
    out.push(check("trace conserved by propagation", drift, 1e-12));

    let spec = m.spectrum(None)?;
    let neg = spec.s_values.iter().copied().fold(0.0, f64::min);
    out.push(check("spectrum non-negative", (0.0 - neg) / spec.max().max(f64::MIN_POSITIVE), 1e-8));
    Ok(out)
}

pub fn report(checks: &[Check]) -> String {
    let mut s = String::new();
    for c in checks {
        let mark = if c.passed { "PASS" } else { "FAIL" };
        s.push_str(&format!("{mark}  {}: {}\n", c.name, c.detail));
    }
    let passed = checks.iter().filter(|c| c.passed).count();
    s.push_str(&format!("{passed}/{} checks passed\n", checks.len()));
    s
}
