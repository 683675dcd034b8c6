//! Orchestration of the six experiment modes. Rows are computed
//! concurrently and collected in sweep order; a failing row is recorded
//! with status `failed` and the run continues.

use std::path::PathBuf;

use qd_emission::dynamics::tau_grid;
use qd_emission::oracles::{
    g1_coh_corrected, g1_coh_pd, g1_inc_pd, sideband_width_detuned, sideband_width_resonant,
};
use qd_emission::pipeline::{
    full_model_with, pure_dephasing_model_with, DetuningSpec, FullModel, PureDephasingModel,
};
use qd_emission::spectrum::{extract_observables, fit_triplet_with, spectrum_grid, TripletFit};
use qd_emission::{Complex64, PhysicalParams};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::config::{ExperimentConfig, Mode, SweepAxis};
use crate::error::CliError;
use crate::output::write_outputs;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    Warned,
    Failed,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::Warned => "warned",
            Status::Failed => "failed",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub values: Vec<f64>,
    pub status: Status,
    pub message: String,
}

/// Per-parameter-point diagnostics for the metadata file.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointRecord {
    pub value: Option<f64>,
    pub status: Status,
    pub message: String,
    pub solver_residual: Option<f64>,
    pub solver_iterations: Option<usize>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Row>,
    pub points: Vec<PointRecord>,
    pub extra: serde_json::Value,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub mode: Mode,
    pub csv: PathBuf,
    pub meta: PathBuf,
    pub rows: usize,
    pub ok: usize,
    pub warned: usize,
    pub failed: usize,
}

/// Accumulates warnings and errors while a row is assembled.
#[derive(Default)]
struct Notes {
    warnings: Vec<String>,
    errors: Vec<String>,
    residual: Option<f64>,
    iterations: Option<usize>,
}

impl Notes {
    fn take<T>(&mut self, what: &str, r: Result<T, qd_emission::Error>) -> Option<T> {
        match r {
            Ok(v) => Some(v),
            Err(e) => {
                self.errors.push(format!("{what}: {e}"));
                None
            }
        }
    }

    fn full(&mut self, m: &FullModel) {
        self.residual = Some(m.solution.residual);
        self.iterations = Some(m.solution.iterations);
        self.warnings.extend(m.warnings());
    }

    fn status(&self) -> Status {
        if !self.errors.is_empty() {
            Status::Failed
        } else if !self.warnings.is_empty() {
            Status::Warned
        } else {
            Status::Ok
        }
    }

    fn message(&self) -> String {
        self.errors
            .iter()
            .chain(&self.warnings)
            .cloned()
            .collect::<Vec<_>>()
            .join("; ")
    }

    fn row(&self, values: Vec<f64>) -> Row {
        Row {
            values,
            status: self.status(),
            message: self.message(),
        }
    }

    fn record(&self, value: Option<f64>) -> PointRecord {
        PointRecord {
            value,
            status: self.status(),
            message: self.message(),
            solver_residual: self.residual,
            solver_iterations: self.iterations,
            warnings: self.warnings.clone(),
        }
    }
}

const NAN: f64 = f64::NAN;

fn opt(v: Option<f64>) -> f64 {
    v.unwrap_or(NAN)
}

/// Computes the mode's table and writes `<out>/<mode>.csv` and
/// `<out>/<mode>.meta.json`.
pub fn run_experiment(config: &ExperimentConfig) -> Result<RunSummary, CliError> {
    let table = match config.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::config("threads", e.to_string()))?
            .install(|| compute_table(config)),
        None => compute_table(config),
    };
    write_outputs(config, &table)
}

pub fn compute_table(config: &ExperimentConfig) -> Table {
    match config.mode {
        Mode::G1 => g1_table(config),
        Mode::Spectrum => spectrum_table(config),
        Mode::CoherentSweep => sweep(config, COHERENT_COLUMNS, coherent_row),
        Mode::DetuningSweep => sweep(config, DETUNING_COLUMNS, detuning_row),
        Mode::ResonantSweep => sweep(config, RESONANT_COLUMNS, resonant_row),
        Mode::OracleCompare => sweep(config, ORACLE_COLUMNS, oracle_row),
    }
}

fn full(config: &ExperimentConfig, p: &PhysicalParams, d: DetuningSpec) -> Result<FullModel, qd_emission::Error> {
    full_model_with(p, d, &config.model)
}

fn pd(config: &ExperimentConfig, p: &PhysicalParams, d: DetuningSpec) -> Result<PureDephasingModel, qd_emission::Error> {
    pure_dephasing_model_with(p, d, &config.model)
}

fn sweep(
    config: &ExperimentConfig,
    columns: &[&'static str],
    f: fn(&ExperimentConfig, f64, &mut Notes) -> Vec<f64>,
) -> Table {
    let out: Vec<(Row, PointRecord)> = config
        .sweep
        .par_iter()
        .map(|&v| {
            let mut notes = Notes::default();
            let values = f(config, v, &mut notes);
            debug_assert_eq!(values.len(), columns.len());
            (notes.row(values), notes.record(Some(v)))
        })
        .collect();
    let (rows, points) = out.into_iter().unzip();
    Table {
        columns: columns.to_vec(),
        rows,
        points,
        extra: json!({}),
    }
}

const COHERENT_COLUMNS: &[&str] = &[
    "omega",
    "omega_r",
    "epsilon",
    "g1_coh_full",
    "g1_inc0_full",
    "g1_total0",
    "g1_coh_pd",
    "G1_coh_eq4",
    "coherent_fraction_full",
    "coherent_fraction_pd",
    "omega_r_polaron",
    "gamma_pd",
    "kappa",
];

fn coherent_row(config: &ExperimentConfig, omega: f64, notes: &mut Notes) -> Vec<f64> {
    let p = config.params.with_omega(omega);
    let f = notes.take("full model", full(config, &p, config.detuning));
    if let Some(m) = &f {
        notes.full(m);
    }
    let d = notes.take("pure-dephasing model", pd(config, &p, config.detuning));
    let (coh_pd, corrected, frac_pd, or_pol, gpd, kap) = match &d {
        Some(m) => {
            let or = m.solution.omega_r;
            let r = &m.rates;
            (
                g1_coh_pd(or, p.gamma1, r.gamma_pd),
                g1_coh_corrected(or, omega, p.gamma1, r.gamma_pd, r.kappa),
                m.coherent_fraction(),
                or,
                r.gamma_pd,
                r.kappa,
            )
        }
        None => (NAN, NAN, NAN, NAN, NAN, NAN),
    };
    let (or, eps, coh, total, frac) = match &f {
        Some(m) => (m.solution.omega_r, m.solution.epsilon, m.g1_coh(), m.g1_zero(), m.coherent_fraction()),
        None => (NAN, NAN, NAN, NAN, NAN),
    };
    vec![omega, or, eps, coh, total - coh, total, coh_pd, corrected, frac, frac_pd, or_pol, gpd, kap]
}

/// Spectrum of the full model on ±span·η and its triplet fit.
fn fitted(config: &ExperimentConfig, m: &FullModel, notes: &mut Notes) -> Option<TripletFit> {
    let grid = notes.take(
        "spectrum grid",
        spectrum_grid(m.eta() * config.grid.omega_span / 3.0, config.grid.omega_points),
    )?;
    let spec = notes.take("spectrum", m.spectrum(Some(&grid)))?;
    notes.warnings.extend(spec.warnings.iter().cloned());
    notes.take("fit", fit_triplet_with(&spec, None, &config.fit))
}

const DETUNING_COLUMNS: &[&str] = &[
    "epsilon",
    "splitting",
    "red_fwhm",
    "blue_fwhm",
    "central_fwhm",
    "width_prediction",
    "epsilon_over_omega",
    "omega_r",
    "splitting_law",
    "fit_residual",
    "gamma_pd",
];

fn detuning_row(config: &ExperimentConfig, v: f64, notes: &mut Notes) -> Vec<f64> {
    let p = config.params;
    let eps = match config.sweep_axis {
        Some(SweepAxis::Epsilon) => v,
        _ => v * p.omega,
    };
    let spec = DetuningSpec::Renormalized(eps);
    let f = notes.take("full model", full(config, &p, spec));
    let (or, law, fit) = match &f {
        Some(m) => {
            notes.full(m);
            let fit = fitted(config, m, notes);
            (m.solution.omega_r, 2.0 * m.solution.omega_r.hypot(eps), fit)
        }
        None => (NAN, NAN, None),
    };
    let d = notes.take("pure-dephasing model", pd(config, &p, spec));
    let (prediction, gpd) = match &d {
        Some(m) => (
            sideband_width_detuned(p.gamma1, m.rates.gamma_pd, eps, m.solution.omega_r),
            m.rates.gamma_pd,
        ),
        None => (NAN, NAN),
    };
    let obs = fit.as_ref().map(extract_observables);
    vec![
        eps,
        opt(obs.map(|o| o.splitting)),
        opt(obs.map(|o| o.red_width)),
        opt(obs.map(|o| o.blue_width)),
        opt(obs.map(|o| o.central_width)),
        prediction,
        if p.omega > 0.0 { eps / p.omega } else { NAN },
        or,
        law,
        opt(fit.map(|f| f.fit_residual)),
        gpd,
    ]
}

const RESONANT_COLUMNS: &[&str] = &[
    "omega",
    "omega_r",
    "splitting",
    "red_fwhm",
    "blue_fwhm",
    "central_fwhm",
    "width_prediction",
    "splitting_law",
    "fit_residual",
    "gamma_pd",
];

fn resonant_row(config: &ExperimentConfig, omega: f64, notes: &mut Notes) -> Vec<f64> {
    let p = config.params.with_omega(omega);
    let f = notes.take("full model", full(config, &p, DetuningSpec::Resonant));
    let (or, fit) = match &f {
        Some(m) => {
            notes.full(m);
            (m.solution.omega_r, fitted(config, m, notes))
        }
        None => (NAN, None),
    };
    let d = notes.take("pure-dephasing model", pd(config, &p, DetuningSpec::Resonant));
    let gpd = opt(d.as_ref().map(|m| m.rates.gamma_pd));
    let obs = fit.as_ref().map(extract_observables);
    vec![
        omega,
        or,
        opt(obs.map(|o| o.splitting)),
        opt(obs.map(|o| o.red_width)),
        opt(obs.map(|o| o.blue_width)),
        opt(obs.map(|o| o.central_width)),
        sideband_width_resonant(p.gamma1, gpd),
        2.0 * or,
        opt(fit.map(|f| f.fit_residual)),
        gpd,
    ]
}

const ORACLE_COLUMNS: &[&str] = &[
    "omega",
    "omega_r",
    "gamma_pd",
    "kappa",
    "kappa_over_gamma_pd",
    "tanh_half_beta_omega_r",
    "g1_coh_generator",
    "g1_coh_closed_form",
    "g1_max_rel_error",
    "g1_coh_thermalised",
    "g1_coh_corrected_at_omega_r",
];

fn oracle_row(config: &ExperimentConfig, omega: f64, notes: &mut Notes) -> Vec<f64> {
    let p = config.params.with_omega(omega);
    let Some(m) = notes.take("pure-dephasing model", pd(config, &p, DetuningSpec::Resonant)) else {
        let mut v = vec![NAN; ORACLE_COLUMNS.len()];
        v[0] = omega;
        return v;
    };
    let (or, g1, r) = (m.solution.omega_r, p.gamma1, m.rates);
    if !r.decayed {
        notes.warnings.push("polaron correlation not decayed within the window".into());
    }
    let taus = tau_grid(20.0 / g1, 512);
    let mut err = NAN;
    if let Some(series) = notes.take("correlation", m.correlation(Some(&taus))) {
        let coh = g1_coh_pd(or, g1, r.gamma_pd);
        let g0 = series.g1[0].re;
        let mut worst = 0.0f64;
        for (t, v) in taus.iter().zip(&series.g1) {
            match g1_inc_pd(*t, or, g1, r.gamma_pd) {
                Ok(a) => worst = worst.max((v - Complex64::new(a + coh, 0.0)).norm() / g0),
                Err(e) => {
                    notes.warnings.push(format!("analytic g1: {e}"));
                    worst = NAN;
                    break;
                }
            }
        }
        err = worst;
    }
    let thermal = notes.take("thermalised generator", m.thermalised()).map(|t| t.g1_coh());
    vec![
        omega,
        or,
        r.gamma_pd,
        r.kappa,
        r.kappa / r.gamma_pd,
        (0.5 * p.beta() * or).tanh(),
        m.g1_coh(),
        g1_coh_pd(or, g1, r.gamma_pd),
        err,
        opt(thermal),
        g1_coh_corrected(or, or, g1, r.gamma_pd, r.kappa),
    ]
}

const G1_COLUMNS: &[&str] = &[
    "tau",
    "g1_full_re",
    "g1_full_im",
    "g1_inc_full_re",
    "g1_inc_full_im",
    "g1_pd_re",
    "g1_pd_im",
    "g1_inc_pd_re",
    "g1_pd_analytic",
];

fn g1_table(config: &ExperimentConfig) -> Table {
    let p = config.params;
    let mut notes = Notes::default();
    let f = notes.take("full model", full(config, &p, config.detuning));
    if let Some(m) = &f {
        notes.full(m);
    }
    let d = notes.take("pure-dephasing model", pd(config, &p, config.detuning));
    let end = config.grid.tau_end.unwrap_or_else(|| {
        let slow = f
            .as_ref()
            .and_then(|m| m.modes().ok())
            .map(|m| m.slowest_rate())
            .filter(|r| r.is_finite() && *r > 0.0);
        let base = 20.0 / p.gamma1;
        slow.map_or(base, |r| base.max(30.0 / r))
    });
    let taus = tau_grid(end, config.grid.tau_points);
    let fs = f.as_ref().and_then(|m| notes.take("full correlation", m.correlation(Some(&taus))));
    let ds = d.as_ref().and_then(|m| notes.take("pure-dephasing correlation", m.correlation(Some(&taus))));
    for s in fs.iter().chain(ds.iter()) {
        notes.warnings.extend(s.warnings.iter().cloned());
    }
    let analytic = d.as_ref().filter(|m| m.solution.epsilon == 0.0).map(|m| {
        let (or, g) = (m.solution.omega_r, m.rates.gamma_pd);
        (or, g, g1_coh_pd(or, p.gamma1, g))
    });
    let rows = taus
        .iter()
        .enumerate()
        .map(|(k, &t)| {
            let a = analytic
                .and_then(|(or, g, coh)| g1_inc_pd(t, or, p.gamma1, g).ok().map(|v| v + coh))
                .unwrap_or(NAN);
            let fv = fs.as_ref().map(|s| (s.g1[k], s.g1_inc[k]));
            let dv = ds.as_ref().map(|s| (s.g1[k], s.g1_inc[k]));
            notes.row(vec![
                t,
                opt(fv.map(|v| v.0.re)),
                opt(fv.map(|v| v.0.im)),
                opt(fv.map(|v| v.1.re)),
                opt(fv.map(|v| v.1.im)),
                opt(dv.map(|v| v.0.re)),
                opt(dv.map(|v| v.0.im)),
                opt(dv.map(|v| v.1.re)),
                a,
            ])
        })
        .collect();
    let extra = json!({
        "g1_coh_full": fs.as_ref().map(|s| s.g1_coh),
        "g1_coh_pd": ds.as_ref().map(|s| s.g1_coh),
        "omega_r": f.as_ref().map(|m| m.solution.omega_r),
        "omega_r_polaron": d.as_ref().map(|m| m.solution.omega_r),
        "epsilon": f.as_ref().map(|m| m.solution.epsilon),
        "nu": f.as_ref().map(|m| m.solution.nu),
        "gamma_pd": d.as_ref().map(|m| m.rates.gamma_pd),
        "kappa": d.as_ref().map(|m| m.rates.kappa),
        "method": fs.as_ref().map(|s| s.method),
    });
    Table {
        columns: G1_COLUMNS.to_vec(),
        rows,
        points: vec![notes.record(Some(p.omega))],
        extra,
    }
}

const SPECTRUM_COLUMNS: &[&str] = &["omega", "s_full", "s_full_fit", "s_pd"];

fn spectrum_table(config: &ExperimentConfig) -> Table {
    let p = config.params;
    let mut notes = Notes::default();
    let f = notes.take("full model", full(config, &p, config.detuning));
    if let Some(m) = &f {
        notes.full(m);
    }
    let d = notes.take("pure-dephasing model", pd(config, &p, config.detuning));
    let eta = f.as_ref().map(|m| m.eta()).or_else(|| d.as_ref().map(|m| m.eta()));
    let grid = eta.and_then(|e| {
        notes.take(
            "spectrum grid",
            spectrum_grid(e * config.grid.omega_span / 3.0, config.grid.omega_points),
        )
    });
    let grid = grid.unwrap_or_default();
    let fs = f.as_ref().and_then(|m| notes.take("full spectrum", m.spectrum(Some(&grid))));
    let ds = d.as_ref().and_then(|m| notes.take("pure-dephasing spectrum", m.spectrum(Some(&grid))));
    for s in fs.iter().chain(ds.iter()) {
        notes.warnings.extend(s.warnings.iter().cloned());
    }
    let fit = fs.as_ref().and_then(|s| notes.take("fit", fit_triplet_with(s, None, &config.fit)));
    let rows = grid
        .iter()
        .enumerate()
        .map(|(k, &w)| {
            notes.row(vec![
                w,
                opt(fs.as_ref().map(|s| s.s_values[k])),
                opt(fit.map(|ft| ft.model(w))),
                opt(ds.as_ref().map(|s| s.s_values[k])),
            ])
        })
        .collect();
    let extra = json!({
        "fit": fit,
        "observables": fit.as_ref().map(extract_observables),
        "g1_coh_full": f.as_ref().map(|m| m.g1_coh()),
        "g1_coh_pd": d.as_ref().map(|m| m.g1_coh()),
        "eta": eta,
        "omega_r": f.as_ref().map(|m| m.solution.omega_r),
        "epsilon": f.as_ref().map(|m| m.solution.epsilon),
    });
    Table {
        columns: SPECTRUM_COLUMNS.to_vec(),
        rows,
        points: vec![notes.record(Some(p.omega))],
        extra,
    }
}
