//! Experiment configuration: a TOML file, optionally starting from a named
//! preset, with command-line overrides applied on top.
//!
//! ```toml
//! preset = "fig1"            # fig1 | fig2
//! mode = "coherent_sweep"    # g1 | coherent_sweep | spectrum | detuning_sweep | resonant_sweep | oracle_compare
//! output = "out"
//! detuning = "resonant"      # resonant | bare | { renormalized = 0.01 }
//!
//! [params]                   # ps⁻¹, ps², K, ps
//! omega = 0.5
//! temperature = 4.0
//!
//! [sweep]
//! log = { start = 0.01, stop = 4.0, count = 40 }
//! ```

use std::path::{Path, PathBuf};

use qd_emission::pipeline::{DetuningSpec, ModelOptions};
use qd_emission::spectrum::FitOptions;
use qd_emission::PhysicalParams;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    G1,
    CoherentSweep,
    Spectrum,
    DetuningSweep,
    ResonantSweep,
    OracleCompare,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::G1 => "g1",
            Mode::CoherentSweep => "coherent_sweep",
            Mode::Spectrum => "spectrum",
            Mode::DetuningSweep => "detuning_sweep",
            Mode::ResonantSweep => "resonant_sweep",
            Mode::OracleCompare => "oracle_compare",
        }
    }

    pub fn parse(s: &str) -> Result<Self, CliError> {
        let all = [
            Mode::G1,
            Mode::CoherentSweep,
            Mode::Spectrum,
            Mode::DetuningSweep,
            Mode::ResonantSweep,
            Mode::OracleCompare,
        ];
        all.into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| CliError::config("mode", format!("unknown mode '{s}'")))
    }

    pub fn is_sweep(self) -> bool {
        !matches!(self, Mode::G1 | Mode::Spectrum)
    }
}

/// What the sweep values mean.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    /// Bare Rabi frequency Ω (ps⁻¹).
    Omega,
    /// Renormalised detuning ε (ps⁻¹).
    Epsilon,
    /// ε in units of Ω.
    EpsilonOverOmega,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Range {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawParams {
    pub nu: Option<f64>,
    pub omega: Option<f64>,
    pub alpha: Option<f64>,
    pub omega_c: Option<f64>,
    pub temperature: Option<f64>,
    /// Radiative lifetime T₁ (ps); alternative to `gamma1`.
    pub t1: Option<f64>,
    pub gamma1: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawSweep {
    pub axis: Option<SweepAxis>,
    pub values: Option<Vec<f64>>,
    pub linear: Option<Range>,
    pub log: Option<Range>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawGrid {
    pub tau_end: Option<f64>,
    pub tau_points: Option<usize>,
    pub omega_points: Option<usize>,
    /// Half-width of the spectrum window in units of η.
    pub omega_span: Option<f64>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawNumerics {
    pub solver_tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub nodes: Option<usize>,
    pub correlation_tol: Option<f64>,
    pub max_fft_log2: Option<u32>,
    pub fit_max_iter: Option<usize>,
    pub fit_tol: Option<f64>,
    pub max_fit_residual: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum RawDetuningTable {
    Renormalized(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RawDetuning {
    Named(String),
    Table(RawDetuningTable),
}

/// The file as written, before defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub preset: Option<String>,
    pub mode: Option<String>,
    pub output: Option<PathBuf>,
    pub threads: Option<usize>,
    pub detuning: Option<RawDetuning>,
    #[serde(default)]
    pub params: RawParams,
    pub sweep: Option<RawSweep>,
    #[serde(default)]
    pub grid: RawGrid,
    #[serde(default)]
    pub numerics: RawNumerics,
}

impl RawConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Parse(e.to_string()))
    }

    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml(&text).map_err(|e| match e {
            CliError::Parse(m) => CliError::Parse(format!("{}: {m}", path.display())),
            other => other,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSettings {
    /// None → the model's default τ grid.
    pub tau_end: Option<f64>,
    pub tau_points: usize,
    pub omega_points: usize,
    pub omega_span: f64,
}

/// Fully resolved configuration, recorded verbatim in the metadata file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub preset: Option<String>,
    pub mode: Mode,
    pub params: PhysicalParams,
    pub detuning: DetuningSpec,
    pub sweep_axis: Option<SweepAxis>,
    pub sweep: Vec<f64>,
    pub grid: GridSettings,
    pub model: ModelOptions,
    pub fit: FitOptions,
    pub output: PathBuf,
    pub threads: Option<usize>,
}

pub fn parse_config(path: &Path) -> Result<ExperimentConfig, CliError> {
    resolve(RawConfig::from_file(path)?)
}

fn positive(key: &str, v: Option<f64>) -> Result<Option<f64>, CliError> {
    match v {
        Some(x) if !(x.is_finite() && x > 0.0) => Err(CliError::config(key, format!("must be finite and > 0, got {x}"))),
        other => Ok(other),
    }
}

fn range_values(key: &str, r: &Range, log: bool) -> Result<Vec<f64>, CliError> {
    if r.count == 0 {
        return Err(CliError::config(key, "count must be >= 1"));
    }
    if !(r.start.is_finite() && r.stop.is_finite()) {
        return Err(CliError::config(key, "start and stop must be finite"));
    }
    if log && !(r.start > 0.0 && r.stop > 0.0) {
        return Err(CliError::config(key, "log range needs start, stop > 0"));
    }
    if r.count == 1 {
        return Ok(vec![r.start]);
    }
    let n = (r.count - 1) as f64;
    Ok((0..r.count)
        .map(|k| {
            let s = k as f64 / n;
            if log {
                r.start * (r.stop / r.start).powf(s)
            } else {
                r.start + (r.stop - r.start) * s
            }
        })
        .collect())
}

/// Applies defaults and validates.
pub fn resolve(raw: RawConfig) -> Result<ExperimentConfig, CliError> {
    let mode = match &raw.mode {
        Some(m) => Mode::parse(m)?,
        None => return Err(CliError::config("mode", "required")),
    };

    let base = match raw.preset.as_deref() {
        Some(name) => Some(
            PhysicalParams::preset(name, 0.0).map_err(|e| CliError::config("preset", e.to_string()))?,
        ),
        None => None,
    };
    let rp = &raw.params;
    let pick = |key: &str, v: Option<f64>, from_base: Option<f64>| -> Result<f64, CliError> {
        v.or(from_base)
            .ok_or_else(|| CliError::config(&format!("params.{key}"), "required (no preset given)"))
    };
    if rp.t1.is_some() && rp.gamma1.is_some() {
        return Err(CliError::config("params", "give either t1 or gamma1, not both"));
    }
    positive("params.t1", rp.t1)?;
    let gamma1 = match (rp.t1, rp.gamma1) {
        (Some(t1), _) => 1.0 / t1,
        (None, Some(g)) => g,
        (None, None) => pick("t1", None, base.map(|b| b.gamma1))?,
    };
    let omega = match rp.omega {
        Some(o) => o,
        None if mode.is_sweep() => 0.0,
        None => pick("omega", None, None)?,
    };
    let params = PhysicalParams {
        nu: rp.nu.or(base.map(|b| b.nu)).unwrap_or(0.0),
        omega,
        alpha: pick("alpha", rp.alpha, base.map(|b| b.alpha))?,
        omega_c: pick("omega_c", rp.omega_c, base.map(|b| b.omega_c))?,
        temperature: pick("temperature", rp.temperature, base.map(|b| b.temperature))?,
        gamma1,
    };
    params.validate().map_err(|e| {
        let msg = e.to_string();
        let key = ["nu", "omega_c", "omega", "alpha", "temperature", "gamma1"]
            .into_iter()
            .find(|k| msg.contains(&format!("domain error: {k} ")))
            .unwrap_or("");
        CliError::config(&format!("params.{key}"), msg)
    })?;

    let detuning = match raw.detuning {
        None => DetuningSpec::Resonant,
        Some(RawDetuning::Named(s)) => match s.as_str() {
            "resonant" => DetuningSpec::Resonant,
            "bare" => DetuningSpec::Bare,
            other => return Err(CliError::config("detuning", format!("unknown detuning '{other}'"))),
        },
        Some(RawDetuning::Table(RawDetuningTable::Renormalized(e))) => {
            if !e.is_finite() {
                return Err(CliError::config("detuning.renormalized", "must be finite"));
            }
            DetuningSpec::Renormalized(e)
        }
    };

    let (sweep_axis, sweep) = resolve_sweep(mode, raw.sweep.as_ref())?;
    if mode == Mode::DetuningSweep && !(params.omega > 0.0) {
        return Err(CliError::config("params.omega", "detuning_sweep needs omega > 0"));
    }

    let g = raw.grid;
    positive("grid.tau_end", g.tau_end)?;
    positive("grid.omega_span", g.omega_span)?;
    let grid = GridSettings {
        tau_end: g.tau_end,
        tau_points: g.tau_points.unwrap_or(2048),
        omega_points: g.omega_points.unwrap_or(qd_emission::spectrum::DEFAULT_SPECTRUM_POINTS),
        omega_span: g.omega_span.unwrap_or(3.0),
    };
    if grid.tau_points < 2 {
        return Err(CliError::config("grid.tau_points", "must be >= 2"));
    }
    if grid.omega_points < 12 {
        return Err(CliError::config("grid.omega_points", "must be >= 12"));
    }

    let n = raw.numerics;
    positive("numerics.solver_tol", n.solver_tol)?;
    positive("numerics.correlation_tol", n.correlation_tol)?;
    positive("numerics.fit_tol", n.fit_tol)?;
    positive("numerics.max_fit_residual", n.max_fit_residual)?;
    let mut model = ModelOptions::default();
    if let Some(v) = n.solver_tol {
        model.solver.tol = v;
    }
    if let Some(v) = n.max_iter {
        model.solver.max_iter = v;
    }
    if let Some(v) = n.nodes {
        if v < 8 {
            return Err(CliError::config("numerics.nodes", "must be >= 8"));
        }
        model.nodes = v;
    }
    if let Some(v) = n.correlation_tol {
        model.correlation.tol = v;
    }
    if let Some(v) = n.max_fft_log2 {
        if !(model.correlation.min_log2..=26).contains(&v) {
            return Err(CliError::config(
                "numerics.max_fft_log2",
                format!("must be in [{}, 26]", model.correlation.min_log2),
            ));
        }
        model.correlation.max_log2 = v;
    }
    model.spectrum_points = grid.omega_points;
    let mut fit = FitOptions::default();
    if let Some(v) = n.fit_max_iter {
        fit.max_iter = v;
    }
    if let Some(v) = n.fit_tol {
        fit.tol = v;
    }
    if let Some(v) = n.max_fit_residual {
        fit.max_residual = v;
    }

    if raw.threads == Some(0) {
        return Err(CliError::config("threads", "must be >= 1"));
    }

    Ok(ExperimentConfig {
        preset: raw.preset,
        mode,
        params,
        detuning,
        sweep_axis,
        sweep,
        grid,
        model,
        fit,
        output: raw.output.unwrap_or_else(|| PathBuf::from("out")),
        threads: raw.threads,
    })
}

fn resolve_sweep(mode: Mode, raw: Option<&RawSweep>) -> Result<(Option<SweepAxis>, Vec<f64>), CliError> {
    if !mode.is_sweep() {
        if raw.is_some() {
            return Err(CliError::config("sweep", format!("not used by mode {}", mode.name())));
        }
        return Ok((None, Vec::new()));
    }
    let raw = raw.ok_or_else(|| CliError::config("sweep", format!("required by mode {}", mode.name())))?;
    let axis = match (mode, raw.axis) {
        (Mode::DetuningSweep, None) => SweepAxis::EpsilonOverOmega,
        (Mode::DetuningSweep, Some(SweepAxis::Omega)) => {
            return Err(CliError::config("sweep.axis", "detuning_sweep sweeps epsilon or epsilon_over_omega"))
        }
        (Mode::DetuningSweep, Some(a)) => a,
        (_, None | Some(SweepAxis::Omega)) => SweepAxis::Omega,
        (_, Some(_)) => {
            return Err(CliError::config("sweep.axis", format!("mode {} sweeps omega", mode.name())))
        }
    };
    let given = [raw.values.is_some(), raw.linear.is_some(), raw.log.is_some()]
        .iter()
        .filter(|b| **b)
        .count();
    if given != 1 {
        return Err(CliError::config("sweep", "give exactly one of values, linear, log"));
    }
    let values = if let Some(v) = &raw.values {
        v.clone()
    } else if let Some(r) = &raw.linear {
        range_values("sweep.linear", r, false)?
    } else {
        range_values("sweep.log", raw.log.as_ref().unwrap(), true)?
    };
    if values.is_empty() {
        return Err(CliError::config("sweep.values", "empty sweep list"));
    }
    if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
        return Err(CliError::config("sweep.values", format!("non-finite value {bad}")));
    }
    if values.windows(2).any(|w| w[1] <= w[0]) {
        return Err(CliError::config("sweep.values", "must be strictly increasing"));
    }
    if axis == SweepAxis::Omega && values[0] < 0.0 {
        return Err(CliError::config("sweep.values", "omega values must be >= 0"));
    }
    Ok((Some(axis), values))
}
