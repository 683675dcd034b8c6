//! One-call assembly of the full variational model and of the
//! polaron-limit pure-dephasing model at a parameter point.

use serde::{Deserialize, Serialize};

use crate::dissipator::{phonon_dissipator, CorrelationOptions, PhononDissipator};
use crate::dynamics::{build_liouvillian, default_tau_grid, g1_correlation, steady_state, CorrelationSeries, RegressionModes};
use crate::error::{Error, Result};
use crate::operators::{DensityMatrix, Superoperator};
use crate::oracles::{pure_dephasing_liouvillian, OracleOptions, PolaronPropagator, PureDephasingRates};
use crate::quadrature::FrequencyGrid;
use crate::spectrum::{incoherent_spectrum, spectrum_grid, SpectrumSeries, DEFAULT_SPECTRUM_POINTS};
use crate::units::PhysicalParams;
use crate::variational::{solve_at_detuning, solve_self_consistent_with, SolverOptions, VariationalSolution};

/// Which detuning is held fixed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum DetuningSpec {
    /// Bare laser detuning `params.nu`.
    Bare,
    /// Renormalised detuning ε = 0.
    Resonant,
    /// Renormalised detuning ε fixed at the given value.
    Renormalized(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelOptions {
    pub nodes: usize,
    pub solver: SolverOptions,
    pub correlation: CorrelationOptions,
    pub oracle: OracleOptions,
    pub spectrum_points: usize,
}

impl Default for ModelOptions {
    fn default() -> Self {
        Self {
            nodes: 400,
            solver: SolverOptions::default(),
            correlation: CorrelationOptions::default(),
            oracle: OracleOptions::default(),
            spectrum_points: DEFAULT_SPECTRUM_POINTS,
        }
    }
}

impl ModelOptions {
    fn grid(&self, params: &PhysicalParams) -> Result<FrequencyGrid> {
        FrequencyGrid::gauss_legendre(self.nodes, 0.0, 12.0 * params.omega_c)
    }
}

/// Generator, steady state and everything else shared by both models.
#[derive(Debug, Clone)]
pub struct ModelPoint {
    pub params: PhysicalParams,
    pub solution: VariationalSolution,
    pub liouvillian: Superoperator,
    pub steady_state: DensityMatrix,
    pub spectrum_points: usize,
}

impl ModelPoint {
    fn new(params: PhysicalParams, solution: VariationalSolution, liouvillian: Superoperator, points: usize) -> Result<Self> {
        let steady_state = steady_state(&liouvillian)?;
        Ok(Self {
            params,
            solution,
            liouvillian,
            steady_state,
            spectrum_points: points,
        })
    }

    /// g⁽¹⁾_coh = |ρ₀X|².
    pub fn g1_coh(&self) -> f64 {
        self.steady_state.coherence().norm_sqr()
    }

    /// g⁽¹⁾(0) = ρ_XX.
    pub fn g1_zero(&self) -> f64 {
        self.steady_state.excited_population()
    }

    /// Coherently scattered share of the emission, g⁽¹⁾_coh / g⁽¹⁾(0).
    pub fn coherent_fraction(&self) -> f64 {
        self.g1_coh() / self.g1_zero()
    }

    pub fn eta(&self) -> f64 {
        self.solution.eta()
    }

    pub fn modes(&self) -> Result<RegressionModes> {
        RegressionModes::new(&self.liouvillian, &self.steady_state)
    }

    /// g⁽¹⁾(τ) on `tau`, or on the default grid for this point.
    pub fn correlation(&self, tau: Option<&[f64]>) -> Result<CorrelationSeries> {
        match tau {
            Some(t) => g1_correlation(&self.liouvillian, &self.steady_state, t),
            None => {
                let slow = self.modes().ok().map(|m| m.slowest_rate());
                let grid = default_tau_grid(self.params.gamma1, slow);
                g1_correlation(&self.liouvillian, &self.steady_state, &grid)
            }
        }
    }

    /// Incoherent spectrum on `omega`, or on [−3η, 3η].
    pub fn spectrum(&self, omega: Option<&[f64]>) -> Result<SpectrumSeries> {
        match omega {
            Some(w) => incoherent_spectrum(&self.liouvillian, &self.steady_state, w),
            None => {
                let w = spectrum_grid(self.eta(), self.spectrum_points)?;
                incoherent_spectrum(&self.liouvillian, &self.steady_state, &w)
            }
        }
    }
}

/// Full variational model with its phonon dissipator.
#[derive(Debug, Clone)]
pub struct FullModel {
    pub point: ModelPoint,
    pub dissipator: PhononDissipator,
}

impl std::ops::Deref for FullModel {
    type Target = ModelPoint;
    fn deref(&self) -> &ModelPoint {
        &self.point
    }
}

impl FullModel {
    /// Correlation functions were cut at a window where they had not yet
    /// fallen below tolerance.
    pub fn warnings(&self) -> Vec<String> {
        let mut w = Vec::new();
        if !self.dissipator.table.decayed {
            w.push("bath correlations not decayed within the largest window".to_string());
        }
        if self.solution.residual > self.params_tol() {
            w.push(format!("self-consistency residual {:e}", self.solution.residual));
        }
        w
    }

    fn params_tol(&self) -> f64 {
        SolverOptions::default().tol
    }
}

pub fn full_model(params: &PhysicalParams, detuning: DetuningSpec) -> Result<FullModel> {
    full_model_with(params, detuning, &ModelOptions::default())
}

pub fn full_model_with(params: &PhysicalParams, detuning: DetuningSpec, opts: &ModelOptions) -> Result<FullModel> {
    let grid = opts.grid(params)?;
    let solution = solve_for(params, detuning, &grid, &opts.solver)?;
    let dissipator = phonon_dissipator(&solution, params, &opts.correlation)?;
    let liouvillian = build_liouvillian(&solution, &dissipator.kph, params.gamma1)?;
    let point = ModelPoint::new(*params, solution, liouvillian, opts.spectrum_points)?;
    Ok(FullModel { point, dissipator })
}

/// Variational solution for the requested detuning.
pub fn solve_for(
    params: &PhysicalParams,
    detuning: DetuningSpec,
    grid: &FrequencyGrid,
    opts: &SolverOptions,
) -> Result<VariationalSolution> {
    match detuning {
        DetuningSpec::Bare => solve_self_consistent_with(params, grid, opts),
        DetuningSpec::Resonant => solve_at_detuning(params, 0.0, grid, opts),
        DetuningSpec::Renormalized(e) => solve_at_detuning(params, e, grid, opts),
    }
}

/// Polaron-limit model: F ≡ 1 and the simple pure-dephasing generator with
/// rate γ_PD evaluated at Ω_r.
#[derive(Debug, Clone)]
pub struct PureDephasingModel {
    pub point: ModelPoint,
    pub rates: PureDephasingRates,
}

impl std::ops::Deref for PureDephasingModel {
    type Target = ModelPoint;
    fn deref(&self) -> &ModelPoint {
        &self.point
    }
}

impl PureDephasingModel {
    /// The same generator with the (iκ/4)[σ_y, {σ_z, ·}] thermalisation term.
    pub fn thermalised(&self) -> Result<ModelPoint> {
        let s = &self.point.solution;
        let l = pure_dephasing_liouvillian(s.epsilon, s.omega_r, self.params.gamma1, self.rates.gamma_pd, self.rates.kappa);
        ModelPoint::new(self.params, s.clone(), l, self.spectrum_points)
    }
}

pub fn pure_dephasing_model(params: &PhysicalParams, detuning: DetuningSpec) -> Result<PureDephasingModel> {
    pure_dephasing_model_with(params, detuning, &ModelOptions::default())
}

pub fn pure_dephasing_model_with(
    params: &PhysicalParams,
    detuning: DetuningSpec,
    opts: &ModelOptions,
) -> Result<PureDephasingModel> {
    let grid = opts.grid(params)?;
    let mut solution = VariationalSolution::polaron(params, &grid)?;
    match detuning {
        DetuningSpec::Bare => {}
        DetuningSpec::Resonant | DetuningSpec::Renormalized(_) => {
            let e = match detuning {
                DetuningSpec::Renormalized(e) => e,
                _ => 0.0,
            };
            if !e.is_finite() {
                return Err(Error::Domain("epsilon must be finite".into()));
            }
            solution.epsilon = e;
            solution.nu = e - solution.r_shift;
        }
    }
    let prop = PolaronPropagator::for_solution(&solution, params)?;
    let rates = PureDephasingRates::compute_with(&prop, solution.omega_r, params.gamma1, &opts.oracle)?;
    let l = pure_dephasing_liouvillian(solution.epsilon, solution.omega_r, params.gamma1, rates.gamma_pd, 0.0);
    let point = ModelPoint::new(*params, solution, l, opts.spectrum_points)?;
    Ok(PureDephasingModel { point, rates })
}
