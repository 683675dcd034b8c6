//! Self-consistent variational displacement F(ω), renormalised Rabi
//! frequency Ω_r and shifted detuning ε.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{integrate_frequency, FrequencyGrid};
use crate::units::{coth_over_w, spectral_density_unchecked, PhysicalParams};

/// How F(ω) is defined away from the grid nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Displacement {
    /// Closed-form variational F at the converged (ε, Ω_r).
    Variational,
    /// Full polaron displacement, F ≡ 1.
    Polaron,
    /// No displacement, F ≡ 0 (weak-coupling frame).
    Identity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariationalSolution {
    /// F(ωᵢ) on the grid nodes.
    pub f_values: Vec<f64>,
    pub omega_r: f64,
    pub epsilon: f64,
    /// B = Ω_r / Ω (1 when Ω = 0).
    pub b_factor: f64,
    /// R = ∫ J ω⁻¹ F(F − 2) dω.
    pub r_shift: f64,
    pub residual: f64,
    /// Bare detuning ν = ε − R.
    pub nu: f64,
    /// Bare Rabi frequency.
    pub omega: f64,
    pub beta: f64,
    pub displacement: Displacement,
    pub iterations: usize,
    /// Residual after each iteration.
    pub history: Vec<f64>,
}

impl VariationalSolution {
    /// F at an arbitrary frequency; even in ω.
    pub fn f_at(&self, w: f64) -> f64 {
        match self.displacement {
            Displacement::Polaron => 1.0,
            Displacement::Identity => 0.0,
            Displacement::Variational => {
                f_closed_form(w.abs(), self.epsilon, self.omega_r, self.omega, self.beta)
            }
        }
    }

    /// Polaron-limit solution (F ≡ 1) at the bare detuning `params.nu`.
    pub fn polaron(params: &PhysicalParams, grid: &FrequencyGrid) -> Result<Self> {
        params.validate()?;
        let beta = params.beta();
        let ones = vec![1.0; grid.len()];
        let omega_r = renormalized_rabi(&ones, params.omega, beta, grid, params)?;
        let epsilon = shifted_detuning(&ones, params.nu, grid, params)?;
        Ok(Self {
            f_values: ones,
            omega_r,
            epsilon,
            b_factor: b_of(omega_r, params.omega),
            r_shift: epsilon - params.nu,
            residual: 0.0,
            nu: params.nu,
            omega: params.omega,
            beta,
            displacement: Displacement::Polaron,
            iterations: 0,
            history: Vec::new(),
        })
    }

    /// Largest |F(ωᵢ) − 1| over the grid.
    pub fn max_polaron_deviation(&self) -> f64 {
        self.f_values
            .iter()
            .map(|f| (f - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// Dressed splitting η = √(ε² + Ω_r²).
    pub fn eta(&self) -> f64 {
        self.epsilon.hypot(self.omega_r)
    }
}

fn b_of(omega_r: f64, omega: f64) -> f64 {
    if omega > 0.0 {
        omega_r / omega
    } else {
        1.0
    }
}

/// Solver controls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 500,
        }
    }
}

/// The variational displacement
/// F(ω) = [1 − (ε/ξ)t] / [1 − (ε/ξ)t + (t/ξ)(Ω_r²/2ω)coth(βω/2)],
/// t = tanh(βξ/2), ξ = √(ε² + Ω²).
///
/// Written with t/ξ kept together, the expression has no 0/0 at ε = 0.
pub fn f_of_omega(w: f64, epsilon: f64, omega_r: f64, omega: f64, beta: f64) -> Result<f64> {
    if !(w > 0.0) {
        return Err(Error::Domain(format!("F(w) needs w > 0, got {w}")));
    }
    if !(beta > 0.0) || !(omega >= 0.0) {
        return Err(Error::Domain("F(w) needs beta > 0 and omega >= 0".into()));
    }
    Ok(f_closed_form(w, epsilon, omega_r, omega, beta))
}

#[inline]
fn f_closed_form(w: f64, epsilon: f64, omega_r: f64, omega: f64, beta: f64) -> f64 {
    if omega_r == 0.0 {
        return 1.0;
    }
    if w == 0.0 {
        return 0.0;
    }
    let xi = epsilon.hypot(omega);
    let t_over_xi = if xi * beta < 1e-6 {
        // tanh(x)/ξ with x = βξ/2, small x
        let x = 0.5 * beta * xi;
        0.5 * beta * (1.0 - x * x / 3.0)
    } else {
        (0.5 * beta * xi).tanh() / xi
    };
    let num = 1.0 - epsilon * t_over_xi;
    let drive = t_over_xi * 0.5 * omega_r * omega_r * coth_over_w(w, beta);
    if drive.is_infinite() {
        return 0.0;
    }
    num / (num + drive)
}

/// Ω_r = Ω exp[−½ ∫ J ω⁻² F² coth(βω/2) dω].
pub fn renormalized_rabi(
    f_values: &[f64],
    omega: f64,
    beta: f64,
    grid: &FrequencyGrid,
    params: &PhysicalParams,
) -> Result<f64> {
    check_len(f_values, grid)?;
    let exponent = weighted_sum(grid, f_values, |w, f| {
        spectral_density_unchecked(w, params.alpha, params.omega_c) * f * f * coth_over_w(w, beta)
            / w
    })?;
    let b = (-0.5 * exponent).exp();
    if !b.is_finite() {
        return Err(Error::Numerical(format!("renormalisation exponent {exponent}")));
    }
    Ok(omega * b)
}

/// ε = ν + ∫ J ω⁻¹ F(F − 2) dω.
pub fn shifted_detuning(
    f_values: &[f64],
    nu: f64,
    grid: &FrequencyGrid,
    params: &PhysicalParams,
) -> Result<f64> {
    check_len(f_values, grid)?;
    let r = weighted_sum(grid, f_values, |w, f| {
        spectral_density_unchecked(w, params.alpha, params.omega_c) * f * (f - 2.0) / w
    })?;
    Ok(nu + r)
}

/// ∫ J ω⁻¹ dω, the full polaron shift. Driving at ν equal to this value is
/// resonant with the polaron-shifted transition.
pub fn resonant_nu(params: &PhysicalParams, grid: &FrequencyGrid) -> Result<f64> {
    integrate_frequency(
        |w| spectral_density_unchecked(w, params.alpha, params.omega_c) / w,
        grid,
    )
}

/// B = exp[−½ ∫ J ω⁻² coth(βω/2) dω] (F ≡ 1).
pub fn polaron_b_factor(params: &PhysicalParams, grid: &FrequencyGrid) -> Result<f64> {
    let ones = vec![1.0; grid.len()];
    renormalized_rabi(&ones, 1.0, params.beta(), grid, params)
}

fn check_len(f_values: &[f64], grid: &FrequencyGrid) -> Result<()> {
    if f_values.len() != grid.len() {
        return Err(Error::Contract(format!(
            "{} F values for a {}-node grid",
            f_values.len(),
            grid.len()
        )));
    }
    Ok(())
}

fn weighted_sum<G>(grid: &FrequencyGrid, f_values: &[f64], g: G) -> Result<f64>
where
    G: Fn(f64, f64) -> f64,
{
    let mut sum = 0.0;
    for ((&w, &wt), &f) in grid.nodes.iter().zip(&grid.weights).zip(f_values) {
        let v = g(w, f);
        if !v.is_finite() {
            return Err(Error::NonFinite { node: w, value: v });
        }
        sum += wt * v;
    }
    Ok(sum)
}

#[derive(Debug, Clone, Copy)]
enum Target {
    /// Bare detuning ν fixed, ε iterated.
    Bare(f64),
    /// Renormalised detuning ε fixed, only Ω_r iterated.
    Renormalized(f64),
}

/// Solves the self-consistency problem at the bare detuning `params.nu`.
pub fn solve_self_consistent(
    params: &PhysicalParams,
    grid: &FrequencyGrid,
) -> Result<VariationalSolution> {
    solve(params, grid, Target::Bare(params.nu), &SolverOptions::default())
}

pub fn solve_self_consistent_with(
    params: &PhysicalParams,
    grid: &FrequencyGrid,
    opts: &SolverOptions,
) -> Result<VariationalSolution> {
    solve(params, grid, Target::Bare(params.nu), opts)
}

/// Solves with the renormalised detuning ε held fixed; the returned `nu`
/// is the bare detuning ε − R that produces it. `params.nu` is ignored.
pub fn solve_at_detuning(
    params: &PhysicalParams,
    epsilon: f64,
    grid: &FrequencyGrid,
    opts: &SolverOptions,
) -> Result<VariationalSolution> {
    if !epsilon.is_finite() {
        return Err(Error::Domain("epsilon must be finite".into()));
    }
    solve(params, grid, Target::Renormalized(epsilon), opts)
}

fn solve(
    params: &PhysicalParams,
    grid: &FrequencyGrid,
    target: Target,
    opts: &SolverOptions,
) -> Result<VariationalSolution> {
    params.validate()?;
    let beta = params.beta();
    let omega = params.omega;

    if params.alpha == 0.0 {
        let (nu, epsilon) = match target {
            Target::Bare(nu) => (nu, nu),
            Target::Renormalized(e) => (e, e),
        };
        return Ok(VariationalSolution {
            f_values: vec![0.0; grid.len()],
            omega_r: omega,
            epsilon,
            b_factor: 1.0,
            r_shift: 0.0,
            residual: 0.0,
            nu,
            omega,
            beta,
            displacement: Displacement::Identity,
            iterations: 1,
            history: vec![0.0],
        });
    }

    let f_on_grid = |eps: f64, or: f64| -> Vec<f64> {
        grid.nodes
            .iter()
            .map(|&w| f_closed_form(w, eps, or, omega, beta))
            .collect()
    };
    let map = |eps: f64, or: f64| -> Result<(Vec<f64>, f64, f64, f64)> {
        let f = f_on_grid(eps, or);
        let or_new = renormalized_rabi(&f, omega, beta, grid, params)?;
        let (eps_new, r) = match target {
            Target::Bare(nu) => {
                let e = shifted_detuning(&f, nu, grid, params)?;
                (e, e - nu)
            }
            Target::Renormalized(e) => (e, shifted_detuning(&f, 0.0, grid, params)?),
        };
        Ok((f, or_new, eps_new, r))
    };

    // Polaron starting point.
    let polaron = VariationalSolution::polaron(params, grid)?;
    let mut or = polaron.omega_r;
    let mut eps = match target {
        Target::Bare(_) => polaron.epsilon,
        Target::Renormalized(e) => e,
    };

    let scale_or = if omega > 0.0 { 1.0 / omega } else { 0.0 };
    let mut relax = 1.0f64;
    let mut history = Vec::new();
    let mut f_prev = f_on_grid(eps, or);
    let mut best = f64::INFINITY;

    for it in 1..=opts.max_iter {
        let (f, or_new, eps_new, r) = map(eps, or)?;
        let df = f
            .iter()
            .zip(&f_prev)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        let residual = ((or_new - or).abs() * scale_or)
            .max((eps_new - eps).abs() * beta)
            .max(if it == 1 { 0.0 } else { df });
        history.push(residual);
        if residual < opts.tol {
            let f_final = f_on_grid(eps, or);
            return Ok(VariationalSolution {
                f_values: f_final,
                omega_r: or,
                epsilon: eps,
                b_factor: b_of(or, omega),
                r_shift: r,
                residual,
                nu: eps - r,
                omega,
                beta,
                displacement: Displacement::Variational,
                iterations: it,
                history,
            });
        }
        if residual >= best {
            relax = (relax * 0.5).max(1.0 / 1024.0);
        }
        best = best.min(residual);
        or += relax * (or_new - or);
        eps += relax * (eps_new - eps);
        f_prev = f;
    }
    Err(Error::Convergence {
        iterations: opts.max_iter,
        residual: history.last().copied().unwrap_or(f64::INFINITY),
    })
}
