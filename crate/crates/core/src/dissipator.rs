//! Phonon dissipator K_ph built from the bath correlation functions Λ_ij(τ),
//! their half-line transforms K_ij(ω) and the dressed-state decomposition of
//! the system operators.
//!
//! The correlation functions are computed from their spectral
//! representation on the full frequency line,
//! C(τ) = ∫ ρ(ω) e^{−iωτ} dω with ρ(ω) = s(ω)(n(ω) + 1),
//! where s is odd (φ, Λ₃₃) or even (Λ₃₂) in ω. On a uniform frequency grid
//! the trapezoid rule is exact up to aliasing, so one FFT gives C on a
//! uniform τ grid, and the period is doubled until every function has
//! decayed before the wrap-around point.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::{
    commutator, excited_projector, identity, max_abs, re, sigma_x, sigma_y, sigma_z, Mat2, Superoperator,
};
use crate::quadrature::{half_line_fourier_samples, FrequencyGrid};
use crate::units::{bose_weight, coth_over_w, spectral_density_unchecked, PhysicalParams};
use crate::variational::{Displacement, VariationalSolution};

/// Eigen-decomposition of H_S = (ε/2)σ_z + (Ω_r/2)σ_x and the frequency
/// components A_i(ω), ω ∈ {0, +η, −η}, of A₁ = σ_x, A₂ = σ_y,
/// A₃ = (I + σ_z)/2.
#[derive(Debug, Clone, PartialEq)]
pub struct DressedDecomposition {
    pub eta: f64,
    /// ½ atan2(Ω_r, ε).
    pub theta: f64,
    /// Projector on |+⟩ (eigenvalue +η/2).
    pub p_plus: Mat2,
    /// Projector on |−⟩ (eigenvalue −η/2).
    pub p_minus: Mat2,
    /// `a_ops[i][s]`: component of A_{i+1} at frequency slot s.
    pub a_ops: [[Mat2; 3]; 3],
}

/// Frequency slot in the response table and decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Slot {
    Zero = 0,
    Plus = 1,
    Minus = 2,
}

impl Slot {
    pub const ALL: [Slot; 3] = [Slot::Zero, Slot::Plus, Slot::Minus];

    pub fn frequency(self, eta: f64) -> f64 {
        match self {
            Slot::Zero => 0.0,
            Slot::Plus => eta,
            Slot::Minus => -eta,
        }
    }
}

impl DressedDecomposition {
    pub fn new(epsilon: f64, omega_r: f64) -> Self {
        let eta = epsilon.hypot(omega_r);
        let theta = 0.5 * omega_r.atan2(epsilon);
        let half = Complex64::new(0.5, 0.0);
        let (p_plus, p_minus) = if eta > 0.0 {
            let n = (sigma_z() * re(epsilon) + sigma_x() * re(omega_r)) / Complex64::new(eta, 0.0);
            ((identity() + n) * half, (identity() - n) * half)
        } else {
            (identity(), Mat2::zeros())
        };
        let base = [sigma_x(), sigma_y(), excited_projector()];
        let a_ops = base.map(|a| {
            if eta > 0.0 {
                [
                    p_plus * a * p_plus + p_minus * a * p_minus,
                    p_minus * a * p_plus,
                    p_plus * a * p_minus,
                ]
            } else {
                [a, Mat2::zeros(), Mat2::zeros()]
            }
        });
        Self {
            eta,
            theta,
            p_plus,
            p_minus,
            a_ops,
        }
    }

    pub fn from_solution(sol: &VariationalSolution) -> Self {
        Self::new(sol.epsilon, sol.omega_r)
    }

    /// The dressed-frame system Hamiltonian H_S.
    pub fn hamiltonian(epsilon: f64, omega_r: f64) -> Mat2 {
        (sigma_z() * re(epsilon) + sigma_x() * re(omega_r)) * Complex64::new(0.5, 0.0)
    }
}

/// Pointwise φ(τ) = ∫ J ω⁻² F² [cos(ωτ)coth(βω/2) − i sin(ωτ)] dω on the
/// solution grid.
pub fn phonon_propagator(
    tau: f64,
    sol: &VariationalSolution,
    params: &PhysicalParams,
    grid: &FrequencyGrid,
) -> Result<Complex64> {
    let f = grid_f(sol, grid)?;
    let beta = sol.beta;
    let mut sum = Complex64::new(0.0, 0.0);
    for ((&w, &wt), &fw) in grid.nodes.iter().zip(&grid.weights).zip(&f) {
        let c = spectral_density_unchecked(w, params.alpha, params.omega_c) / w * fw * fw;
        let v = Complex64::new(c * (w * tau).cos() * coth_over_w(w, beta), -c / w * (w * tau).sin());
        if !(v.re.is_finite() && v.im.is_finite()) {
            return Err(Error::NonFinite { node: w, value: v.norm() });
        }
        sum += v * wt;
    }
    Ok(sum)
}

/// Same propagator written as ∫ J ω⁻² F² G₊(τ) dω with
/// G₊ = (n + 1)e^{−iωτ} + n e^{iωτ}.
pub fn phonon_propagator_g_plus(
    tau: f64,
    sol: &VariationalSolution,
    params: &PhysicalParams,
    grid: &FrequencyGrid,
) -> Result<Complex64> {
    let f = grid_f(sol, grid)?;
    let beta = sol.beta;
    let mut sum = Complex64::new(0.0, 0.0);
    for ((&w, &wt), &fw) in grid.nodes.iter().zip(&grid.weights).zip(&f) {
        let j = spectral_density_unchecked(w, params.alpha, params.omega_c);
        let n = 1.0 / (beta * w).exp_m1();
        let gp = Complex64::from_polar(n + 1.0, -w * tau) + Complex64::from_polar(n, w * tau);
        sum += gp * (wt * j / (w * w) * fw * fw);
    }
    Ok(sum)
}

fn grid_f(sol: &VariationalSolution, grid: &FrequencyGrid) -> Result<Vec<f64>> {
    if sol.f_values.len() == grid.len() {
        Ok(sol.f_values.clone())
    } else if sol.displacement != Displacement::Variational {
        Ok(grid.nodes.iter().map(|&w| sol.f_at(w)).collect())
    } else {
        Err(Error::Contract("solution and grid sizes differ".into()))
    }
}

/// Pair label (i, j) of a nonzero bath correlation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Pair {
    P11 = 0,
    P22 = 1,
    P33 = 2,
    P32 = 3,
    P23 = 4,
}

impl Pair {
    pub const ALL: [Pair; 5] = [Pair::P11, Pair::P22, Pair::P33, Pair::P32, Pair::P23];

    /// Zero-based operator indices (i, j).
    pub fn indices(self) -> (usize, usize) {
        match self {
            Pair::P11 => (0, 0),
            Pair::P22 => (1, 1),
            Pair::P33 => (2, 2),
            Pair::P32 => (2, 1),
            Pair::P23 => (1, 2),
        }
    }
}

/// Numerical settings for [`correlation_functions`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationOptions {
    /// Decay threshold for |Λ_ij| near the end of the τ window.
    pub tol: f64,
    pub min_log2: u32,
    pub max_log2: u32,
}

impl Default for CorrelationOptions {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            min_log2: 15,
            max_log2: 22,
        }
    }
}

/// Λ_ij(τ) sampled on τ_k = k·dt, k = 0..len.
#[derive(Debug, Clone)]
pub struct BathCorrelations {
    pub dt: f64,
    pub eta: f64,
    pub phi: Arc<Vec<Complex64>>,
    pub lambda11: Arc<Vec<Complex64>>,
    pub lambda22: Arc<Vec<Complex64>>,
    pub lambda33: Arc<Vec<Complex64>>,
    pub lambda32: Arc<Vec<Complex64>>,
    /// Largest |Λ| over the last tenth of the window, per pair 11, 22, 33, 32.
    pub tails: [f64; 4],
    pub decayed: bool,
    pub fft_len: usize,
}

impl BathCorrelations {
    pub fn len(&self) -> usize {
        self.phi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phi.is_empty()
    }

    pub fn tau_end(&self) -> f64 {
        self.dt * self.len().saturating_sub(1) as f64
    }

    /// Samples of Λ for a pair; Λ₂₃ = −Λ₃₂ is returned negated.
    pub fn samples(&self, pair: Pair) -> (&[Complex64], f64) {
        match pair {
            Pair::P11 => (&self.lambda11, 1.0),
            Pair::P22 => (&self.lambda22, 1.0),
            Pair::P33 => (&self.lambda33, 1.0),
            Pair::P32 => (&self.lambda32, 1.0),
            Pair::P23 => (&self.lambda32, -1.0),
        }
    }

    /// Linear interpolation of Λ_pair at τ ≥ 0 (zero beyond the window).
    pub fn lambda_at(&self, pair: Pair, tau: f64) -> Complex64 {
        let (s, sign) = self.samples(pair);
        interp(s, self.dt, tau) * sign
    }

    pub fn phi_at(&self, tau: f64) -> Complex64 {
        interp(&self.phi, self.dt, tau)
    }
}

fn interp(s: &[Complex64], dt: f64, tau: f64) -> Complex64 {
    if tau < 0.0 {
        return interp(s, dt, -tau).conj();
    }
    let x = tau / dt;
    let k = x.floor() as usize;
    if k + 1 >= s.len() {
        return Complex64::new(0.0, 0.0);
    }
    let t = x - k as f64;
    s[k] * (1.0 - t) + s[k + 1] * t
}

/// Time step rule min(0.05/η, 0.02β, 0.05).
pub fn correlation_step(eta: f64, beta: f64) -> f64 {
    let mut dt = (0.02 * beta).min(0.05);
    if eta > 0.0 {
        dt = dt.min(0.05 / eta);
    }
    dt
}

/// Computes Λ₁₁, Λ₂₂, Λ₃₃, Λ₃₂ and φ for a converged solution.
pub fn correlation_functions(
    sol: &VariationalSolution,
    params: &PhysicalParams,
    opts: &CorrelationOptions,
) -> Result<BathCorrelations> {
    if opts.min_log2 < 4 || opts.max_log2 < opts.min_log2 || opts.max_log2 > 26 {
        return Err(Error::Domain("bad FFT size bounds".into()));
    }
    let eta = sol.eta();
    let beta = sol.beta;
    let dt = correlation_step(eta, beta);
    let mut planner = FftPlanner::<f64>::new();
    let mut log2 = opts.min_log2;
    loop {
        let c = correlations_once(sol, params, dt, 1usize << log2, &mut planner)?;
        let ok = c.tails.iter().all(|&t| t < opts.tol);
        if ok || log2 >= opts.max_log2 {
            return Ok(BathCorrelations { decayed: ok, ..c });
        }
        log2 += 1;
    }
}

fn correlations_once(
    sol: &VariationalSolution,
    params: &PhysicalParams,
    dt: f64,
    n: usize,
    planner: &mut FftPlanner<f64>,
) -> Result<BathCorrelations> {
    let beta = sol.beta;
    let dw = 2.0 * std::f64::consts::PI / (n as f64 * dt);
    let (alpha, wc) = (params.alpha, params.omega_c);
    let omega_r = sol.omega_r;

    let mut r_phi = vec![Complex64::new(0.0, 0.0); n];
    let mut r33 = r_phi.clone();
    let mut r32 = r_phi.clone();
    for (j, ((a, b), c)) in r_phi.iter_mut().zip(&mut r33).zip(&mut r32).enumerate() {
        let jj = if j < n / 2 { j as f64 } else { j as f64 - n as f64 };
        let w = jj * dw;
        let x = w / wc;
        let gauss = (-x * x).exp();
        if gauss == 0.0 {
            continue;
        }
        let f = sol.f_at(w);
        let g = 1.0 - f;
        let bw = bose_weight(w, beta) * alpha * gauss * dw;
        *a = Complex64::new(bw * f * f, 0.0);
        *b = Complex64::new(bw * w * w * g * g, 0.0);
        *c = Complex64::new(bw * w * f * g, 0.0);
    }
    let fft = planner.plan_fft_forward(n);
    for buf in [&mut r_phi, &mut r33, &mut r32] {
        fft.process(buf);
    }

    let half = n / 2;
    let q = Complex64::new(0.25 * omega_r * omega_r, 0.0);
    let mut phi = Vec::with_capacity(half);
    let mut l11 = Vec::with_capacity(half);
    let mut l22 = Vec::with_capacity(half);
    let mut l33 = Vec::with_capacity(half);
    let mut l32 = Vec::with_capacity(half);
    let i_half_or = Complex64::new(0.0, 0.5 * omega_r);
    for k in 0..half {
        let p = r_phi[k];
        let sh = (p * 0.5).sinh();
        phi.push(p);
        l11.push(q * sh * sh * 2.0);
        l22.push(q * p.sinh());
        l33.push(r33[k]);
        l32.push(i_half_or * r32[k]);
    }
    for v in [&phi, &l11, &l22, &l33, &l32] {
        if v.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::Numerical("non-finite bath correlation".into()));
        }
    }
    let start = half - half / 10;
    let tail = |v: &[Complex64]| v[start..].iter().map(|z| z.norm()).fold(0.0, f64::max);
    let tails = [tail(&l11), tail(&l22), tail(&l33), tail(&l32)];
    Ok(BathCorrelations {
        dt,
        eta: sol.eta(),
        phi: Arc::new(phi),
        lambda11: Arc::new(l11),
        lambda22: Arc::new(l22),
        lambda33: Arc::new(l33),
        lambda32: Arc::new(l32),
        tails,
        decayed: false,
        fft_len: n,
    })
}

/// K_ij(ω) = ∫₀^∞ Λ_ij(τ) e^{iωτ} dτ at ω ∈ {0, +η, −η}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResponseTable {
    pub eta: f64,
    /// `k[pair][slot]`.
    pub k: [[Complex64; 3]; 5],
    pub decayed: bool,
}

impl ResponseTable {
    pub fn zero(eta: f64) -> Self {
        Self {
            eta,
            k: [[Complex64::new(0.0, 0.0); 3]; 5],
            decayed: true,
        }
    }

    pub fn get(&self, pair: Pair, slot: Slot) -> Complex64 {
        self.k[pair as usize][slot as usize]
    }

    /// γ_ij(ω) = 2 Re K_ij(ω).
    pub fn gamma(&self, pair: Pair, slot: Slot) -> f64 {
        2.0 * self.get(pair, slot).re
    }

    /// S_ij(ω) = Im K_ij(ω).
    pub fn shift(&self, pair: Pair, slot: Slot) -> f64 {
        self.get(pair, slot).im
    }
}

pub fn response_table(corr: &BathCorrelations, eta: f64) -> Result<ResponseTable> {
    if (corr.eta - eta).abs() > 1e-12 * eta.max(1.0) {
        return Err(Error::Contract(format!(
            "correlations built for eta = {}, table requested at {eta}",
            corr.eta
        )));
    }
    let mut k = [[Complex64::new(0.0, 0.0); 3]; 5];
    for pair in [Pair::P11, Pair::P22, Pair::P33, Pair::P32] {
        let (s, _) = corr.samples(pair);
        for slot in Slot::ALL {
            k[pair as usize][slot as usize] = half_line_fourier_samples(s, corr.dt, slot.frequency(eta));
        }
    }
    k[Pair::P23 as usize] = k[Pair::P32 as usize].map(|z| -z);
    Ok(ResponseTable {
        eta,
        k,
        decayed: corr.decayed,
    })
}

/// K_ph(ρ) = −Σ_ij Σ_ω { K_ij(ω)[A_i, A_j(ω)ρ] − K_ij(ω)*[A_i, ρA_j(ω)†] }.
///
/// Equivalent to the γ/S form with γ = 2 Re K and S = Im K.
pub fn build_kph(table: &ResponseTable, decomp: &DressedDecomposition) -> Result<Superoperator> {
    if (table.eta - decomp.eta).abs() > 1e-12 * decomp.eta.max(1.0) {
        return Err(Error::Contract(format!(
            "response table at eta = {} but decomposition at {}",
            table.eta, decomp.eta
        )));
    }
    let base = [sigma_x(), sigma_y(), excited_projector()];
    let terms: Vec<(Mat2, Mat2, Complex64)> = Pair::ALL
        .iter()
        .flat_map(|&pair| {
            let (i, j) = pair.indices();
            Slot::ALL
                .iter()
                .map(move |&slot| (i, j, pair, slot))
                .collect::<Vec<_>>()
        })
        .map(|(i, j, pair, slot)| (base[i], decomp.a_ops[j][slot as usize], table.get(pair, slot)))
        .filter(|(_, aw, k)| k.norm() > 0.0 && max_abs(aw) > 0.0)
        .collect();
    Ok(Superoperator::from_map(|r| {
        let mut out = Mat2::zeros();
        for (ai, aw, k) in &terms {
            let x = aw * r;
            let y = r * aw.adjoint();
            out -= commutator(ai, &x) * *k - commutator(ai, &y) * k.conj();
        }
        out
    }))
}

/// Correlations, response table and K_ph for one solution.
#[derive(Debug, Clone)]
pub struct PhononDissipator {
    pub decomposition: DressedDecomposition,
    pub table: ResponseTable,
    pub kph: Superoperator,
    pub correlations: Option<BathCorrelations>,
}

pub fn phonon_dissipator(
    sol: &VariationalSolution,
    params: &PhysicalParams,
    opts: &CorrelationOptions,
) -> Result<PhononDissipator> {
    let decomposition = DressedDecomposition::from_solution(sol);
    if params.alpha == 0.0 {
        return Ok(PhononDissipator {
            table: ResponseTable::zero(decomposition.eta),
            kph: Superoperator::zero(),
            decomposition,
            correlations: None,
        });
    }
    let corr = correlation_functions(sol, params, opts)?;
    let table = response_table(&corr, decomposition.eta)?;
    let kph = build_kph(&table, &decomposition)?;
    Ok(PhononDissipator {
        decomposition,
        table,
        kph,
        correlations: Some(corr),
    })
}
