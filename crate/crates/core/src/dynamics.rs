//! Liouvillian assembly, steady state, propagation and the first-order field
//! correlation g⁽¹⁾(τ) = Tr[σ₋ e^{Lτ}(ρ_ss σ₊)] by the regression theorem.

use nalgebra::Schur;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dissipator::DressedDecomposition;
use crate::error::{Error, Result};
use crate::operators::{
    identity, max_abs, sigma_minus, sigma_plus, sigma_x, sigma_y, sigma_z, unvectorize, vectorize, Mat2, Mat4, Vec4,
};
pub use crate::operators::{DensityMatrix, Superoperator};
use crate::variational::VariationalSolution;

/// L = −i[H_S, ·] + K_ph + Γ₁ D[σ₋], H_S = (ε/2)σ_z + (Ω_r/2)σ_x.
pub fn build_liouvillian(
    sol: &VariationalSolution,
    kph: &Superoperator,
    gamma1: f64,
) -> Result<Superoperator> {
    if !(gamma1 >= 0.0) {
        return Err(Error::Domain(format!("gamma1 must be >= 0, got {gamma1}")));
    }
    Ok(liouvillian_from_parts(sol.epsilon, sol.omega_r, kph, gamma1))
}

pub fn liouvillian_from_parts(
    epsilon: f64,
    omega_r: f64,
    kph: &Superoperator,
    gamma1: f64,
) -> Superoperator {
    let h = DressedDecomposition::hamiltonian(epsilon, omega_r);
    Superoperator::hamiltonian(&h) + kph.clone() + Superoperator::lindblad(&sigma_minus(), gamma1)
}

/// Eigenvalues and right/left eigenvectors of a superoperator.
#[derive(Debug, Clone)]
pub struct Eigensystem {
    pub values: [Complex64; 4],
    /// Columns are right eigenvectors.
    pub right: Mat4,
    /// Rows are left eigenvectors, normalised so that left·right = I.
    pub left: Mat4,
    /// ‖V‖‖V⁻¹‖ in the max-abs norm.
    pub condition: f64,
}

impl Eigensystem {
    /// Index of the eigenvalue closest to zero.
    pub fn zero_index(&self) -> usize {
        (0..4)
            .min_by(|&a, &b| self.values[a].norm().total_cmp(&self.values[b].norm()))
            .unwrap_or(0)
    }
}

/// Eigen-decomposition through the complex Schur form and back
/// substitution. Fails when eigenvalues coincide too closely for a
/// well-conditioned basis.
pub fn eigensystem(l: &Superoperator) -> Result<Eigensystem> {
    let schur = Schur::try_new(l.matrix, 1e-15, 10_000)
        .ok_or_else(|| Error::Numerical("Schur decomposition did not converge".into()))?;
    let (q, t) = schur.unpack();
    let values = [t[(0, 0)], t[(1, 1)], t[(2, 2)], t[(3, 3)]];
    let scale = max_abs(&l.matrix).max(1e-300);
    let mut y = Mat4::zeros();
    for k in 0..4 {
        y[(k, k)] = Complex64::new(1.0, 0.0);
        for i in (0..k).rev() {
            let mut s = Complex64::new(0.0, 0.0);
            for j in (i + 1)..=k {
                s += t[(i, j)] * y[(j, k)];
            }
            let d = t[(i, i)] - values[k];
            if d.norm() < 1e-13 * scale {
                return Err(Error::Numerical("defective or degenerate Liouvillian".into()));
            }
            y[(i, k)] = -s / d;
        }
    }
    let mut right = q * y;
    for k in 0..4 {
        let n = right.column(k).norm();
        right.column_mut(k).unscale_mut(n);
    }
    let left = right
        .try_inverse()
        .ok_or_else(|| Error::Numerical("singular eigenvector matrix".into()))?;
    let condition = max_abs(&right) * max_abs(&left) * 4.0;
    Ok(Eigensystem {
        values,
        right,
        left,
        condition,
    })
}

/// Number of eigenvalues with |λ| below `1e-9·max|L|`.
pub fn zero_mode_count(values: &[Complex64]) -> (usize, f64) {
    let scale = values.iter().map(|v| v.norm()).fold(0.0, f64::max).max(1e-300);
    (values.iter().filter(|v| v.norm() < 1e-9 * scale).count(), scale)
}

/// Steady state: the trace-one solution of L·vec ρ = 0.
pub fn steady_state(l: &Superoperator) -> Result<DensityMatrix> {
    let schur = Schur::try_new(l.matrix, 1e-15, 10_000)
        .ok_or_else(|| Error::Numerical("Schur decomposition did not converge".into()))?;
    let ev = schur.eigenvalues().ok_or_else(|| Error::Numerical("no eigenvalues".into()))?;
    let (zero_modes, _) = zero_mode_count(ev.as_slice());
    if zero_modes != 1 {
        return Err(Error::Degenerate { zero_modes });
    }
    // Replace one row by the trace functional: Tr ρ = ρ₀₀ + ρ_XX = 1.
    let mut a = l.matrix;
    let mut row = 0;
    let mut best = f64::INFINITY;
    for r in [0usize, 3] {
        let mut trial = l.matrix;
        trial.set_row(r, &trace_row());
        let c = trial.lu().solve(&unit(r)).map(|x| (l.matrix * x).norm());
        if let Some(res) = c {
            if res < best {
                best = res;
                row = r;
                a = trial;
            }
        }
    }
    let x = a
        .lu()
        .solve(&unit(row))
        .ok_or_else(|| Error::Numerical("steady-state system is singular".into()))?;
    let m = unvectorize(&x);
    let m = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    let m = m / m.trace();
    let residual = (l.matrix * vectorize(&m)).norm();
    if residual > 1e-12 * max_abs(&l.matrix).max(1.0) {
        return Err(Error::Numerical(format!("steady-state residual {residual:e}")));
    }
    DensityMatrix::new(m)
}

fn trace_row() -> nalgebra::RowVector4<Complex64> {
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    nalgebra::RowVector4::new(one, zero, zero, one)
}

fn unit(k: usize) -> Vec4 {
    let mut v = Vec4::zeros();
    v[k] = Complex64::new(1.0, 0.0);
    v
}

/// e^{A} (nalgebra's Padé scaling-and-squaring).
pub fn expm(a: &Mat4) -> Mat4 {
    a.exp()
}

/// e^{Lt}ρ, computed in the Pauli basis (I, σ_x, σ_y, σ_z). There the
/// trace row of a trace-preserving generator is exactly zero, and scaling
/// and squaring keep it zero, so the trace does not drift with t.
pub fn propagate(l: &Superoperator, rho: &Mat2, t: f64) -> Mat2 {
    let basis = [identity(), sigma_x(), sigma_y(), sigma_z()];
    let mut g = Mat4::zeros();
    for j in 0..4 {
        let image = l.apply(&basis[j]);
        for i in 0..4 {
            g[(i, j)] = (basis[i] * image).trace() * 0.5;
        }
    }
    let mut x = Vec4::zeros();
    for i in 0..4 {
        x[i] = (basis[i] * rho).trace() * 0.5;
    }
    let y = expm(&(g * Complex64::new(t, 0.0))) * x;
    basis.iter().zip(y.iter()).fold(Mat2::zeros(), |acc, (b, c)| acc + b * *c)
}

/// e^{Lt}ρ with the exponential taken directly on the vectorised generator.
pub fn propagate_expm(l: &Superoperator, rho: &Mat2, t: f64) -> Mat2 {
    let u = expm(&(l.matrix * Complex64::new(t, 0.0)));
    unvectorize(&(u * vectorize(rho)))
}

/// g⁽¹⁾(τ) = Σ_k c_k e^{λ_k τ}.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionModes {
    pub eigenvalues: Vec<Complex64>,
    pub coefficients: Vec<Complex64>,
    /// Index of the λ = 0 mode.
    pub zero_index: usize,
    pub condition: f64,
}

impl RegressionModes {
    pub fn new(l: &Superoperator, rho_ss: &DensityMatrix) -> Result<Self> {
        let es = eigensystem(l)?;
        let x0 = vectorize(&(rho_ss.matrix() * sigma_plus()));
        let weights = es.left * x0;
        // Tr[σ₋ X] = X[1, 0], vector index 1.
        let coefficients = (0..4).map(|k| es.right[(1, k)] * weights[k]).collect();
        Ok(Self {
            eigenvalues: es.values.to_vec(),
            coefficients,
            zero_index: es.zero_index(),
            condition: es.condition,
        })
    }

    pub fn g1(&self, tau: f64) -> Complex64 {
        self.eigenvalues
            .iter()
            .zip(&self.coefficients)
            .map(|(l, c)| c * (l * tau).exp())
            .sum()
    }

    pub fn g1_incoherent(&self, tau: f64) -> Complex64 {
        self.eigenvalues
            .iter()
            .zip(&self.coefficients)
            .enumerate()
            .filter(|(k, _)| *k != self.zero_index)
            .map(|(_, (l, c))| c * (l * tau).exp())
            .sum()
    }

    pub fn coherent(&self) -> Complex64 {
        self.coefficients[self.zero_index]
    }

    /// Slowest nonzero decay rate |Re λ|.
    pub fn slowest_rate(&self) -> f64 {
        self.eigenvalues
            .iter()
            .enumerate()
            .filter(|(k, _)| *k != self.zero_index)
            .map(|(_, l)| -l.re)
            .fold(f64::INFINITY, f64::min)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CorrelationMethod {
    Eigenexpansion,
    Propagation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationSeries {
    pub tau: Vec<f64>,
    pub g1: Vec<Complex64>,
    /// |ρ₀X|² of the steady state.
    pub g1_coh: f64,
    pub g1_inc: Vec<Complex64>,
    /// Zero-eigenvalue amplitude, which equals `g1_coh` for a consistent
    /// expansion.
    pub g1_coh_modes: Option<f64>,
    pub method: CorrelationMethod,
    pub warnings: Vec<String>,
}

/// Regression-theorem correlation on `tau_grid`. Falls back to direct
/// propagation when the eigenbasis is ill-conditioned.
pub fn g1_correlation(
    l: &Superoperator,
    rho_ss: &DensityMatrix,
    tau_grid: &[f64],
) -> Result<CorrelationSeries> {
    if tau_grid.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
        return Err(Error::Domain("tau grid must be finite and >= 0".into()));
    }
    let g1_coh = rho_ss.coherence().norm_sqr();
    let mut warnings = Vec::new();
    let modes = match RegressionModes::new(l, rho_ss) {
        Ok(m) if m.condition < 1e8 => Some(m),
        Ok(m) => {
            warnings.push(format!("eigenbasis condition {:e}; using propagation", m.condition));
            None
        }
        Err(e) => {
            warnings.push(format!("{e}; using propagation"));
            None
        }
    };
    let (g1, method, g1_coh_modes) = match &modes {
        Some(m) => (
            tau_grid.iter().map(|&t| m.g1(t)).collect::<Vec<_>>(),
            CorrelationMethod::Eigenexpansion,
            Some(m.coherent().re),
        ),
        None => {
            let x0 = rho_ss.matrix() * sigma_plus();
            let g = tau_grid
                .iter()
                .map(|&t| propagate(l, &x0, t)[(1, 0)])
                .collect();
            (g, CorrelationMethod::Propagation, None)
        }
    };
    let g1_inc = g1.iter().map(|g| g - g1_coh).collect();
    Ok(CorrelationSeries {
        tau: tau_grid.to_vec(),
        g1,
        g1_coh,
        g1_inc,
        g1_coh_modes,
        method,
        warnings,
    })
}

/// Default τ grid: 2048 points, 1024 logarithmic from 10⁻³ ps to 1% of the
/// end then 1023 linear, with τ₀ = 0. The end is
/// max(20/Γ₁, 30/slowest rate) so that g1_inc has decayed.
pub fn default_tau_grid(gamma1: f64, slowest_rate: Option<f64>) -> Vec<f64> {
    let mut end = 20.0 / gamma1;
    if let Some(r) = slowest_rate {
        if r > 0.0 && r.is_finite() {
            end = end.max(30.0 / r);
        }
    }
    tau_grid(end, 2048)
}

/// `n`-point log-then-linear grid on [0, end].
pub fn tau_grid(end: f64, n: usize) -> Vec<f64> {
    let n = n.max(8);
    let split = end * 1e-2;
    let start = 1e-3f64.min(split * 0.5);
    let n_log = n / 2;
    let n_lin = n - 1 - n_log;
    let mut out = Vec::with_capacity(n);
    out.push(0.0);
    let ratio = (split / start).ln();
    for k in 0..n_log {
        out.push(start * (ratio * k as f64 / (n_log - 1) as f64).exp());
    }
    for k in 1..=n_lin {
        out.push(split + (end - split) * k as f64 / n_lin as f64);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{re, sigma_x, sigma_z};

    fn bloch(omega: f64, eps: f64, gamma1: f64) -> Superoperator {
        liouvillian_from_parts(eps, omega, &Superoperator::zero(), gamma1)
    }

    #[test]
    fn bare_decay_spectrum() {
        let g1 = 0.01;
        let l = bloch(0.0, 0.3, g1);
        let es = eigensystem(&l).unwrap();
        let mut re: Vec<f64> = es.values.iter().map(|v| v.re).collect();
        re.sort_by(f64::total_cmp);
        assert!((re[0] + g1).abs() < 1e-14);
        assert!((re[1] + g1 / 2.0).abs() < 1e-14 && (re[2] + g1 / 2.0).abs() < 1e-14);
        assert!(re[3].abs() < 1e-14);
        let mut im: Vec<f64> = es.values.iter().map(|v| v.im.abs()).collect();
        im.sort_by(f64::total_cmp);
        assert!((im[3] - 0.3).abs() < 1e-13);
        let rho = steady_state(&l).unwrap();
        assert!((rho.ground_population() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn resonant_bloch_inversion() {
        let (om, g) = (0.2, 0.05);
        let rho = steady_state(&bloch(om, 0.0, g)).unwrap();
        let sz = rho.bloch()[2];
        assert!((sz + g * g / (g * g + 2.0 * om * om)).abs() < 1e-12, "{sz}");
        // strong driving: populations → 1/2, coherence → Γ₁/(2Ω)
        let rho = steady_state(&bloch(5.0, 0.0, 0.001)).unwrap();
        assert!((rho.excited_population() - 0.5).abs() < 1e-6);
        assert!((rho.coherence().norm() - 0.001 / 10.0).abs() < 1e-8);
    }

    #[test]
    fn trace_conserved_under_propagation() {
        let l = bloch(0.7, 0.2, 0.003);
        for k in 0..5 {
            let x = 0.2 * k as f64;
            let r0 = (Mat2::identity() + sigma_x() * re(x) + sigma_z() * re(0.5 - x)) * Complex64::new(0.5, 0.0);
            let r = propagate(&l, &r0, 10.0 / 0.003);
            assert!((r.trace() - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn expm_matches_eigen_route() {
        let l = bloch(0.4, 0.1, 0.05);
        let es = eigensystem(&l).unwrap();
        let t = 7.3;
        let d = Mat4::from_diagonal(&nalgebra::Vector4::from_iterator(es.values.iter().map(|v| (v * t).exp())));
        let via_eigen = es.right * d * es.left;
        assert!(max_abs(&(via_eigen - expm(&(l.matrix * Complex64::new(t, 0.0))))) < 1e-12);
        let r0 = DensityMatrix::ground();
        for t in [0.5, 7.3, 900.0] {
            let a = propagate(&l, r0.matrix(), t);
            let b = propagate_expm(&l, r0.matrix(), t);
            assert!(max_abs(&(a - b)) < 1e-11);
        }
    }

    #[test]
    fn correlation_basics() {
        let l = bloch(0.3, 0.0, 0.01);
        let rho = steady_state(&l).unwrap();
        let modes = RegressionModes::new(&l, &rho).unwrap();
        let grid = default_tau_grid(0.01, Some(modes.slowest_rate()));
        assert_eq!(grid.len(), 2048);
        let c = g1_correlation(&l, &rho, &grid).unwrap();
        assert!((c.g1[0].re - rho.excited_population()).abs() < 1e-12);
        assert!((c.g1_coh - c.g1_coh_modes.unwrap()).abs() < 1e-10);
        assert!(c.g1_inc.last().unwrap().norm() < 1e-6 * c.g1[0].norm());
        let direct = propagate_expm(&l, &(rho.matrix() * sigma_plus()), 37.0)[(1, 0)];
        assert!((modes.g1(37.0) - direct).norm() < 1e-12);
    }

    #[test]
    fn weak_driving_is_coherent() {
        let l = bloch(1e-4, 0.0, 0.01);
        let rho = steady_state(&l).unwrap();
        let c = g1_correlation(&l, &rho, &[0.0]).unwrap();
        assert!(c.g1_coh / c.g1[0].re > 0.999);
    }

    #[test]
    fn defective_generator_falls_back() {
        // Γ₁ = 0 and Ω = 0 give a doubly degenerate kernel.
        let l = bloch(0.0, 0.0, 0.0);
        assert!(matches!(steady_state(&l), Err(Error::Degenerate { zero_modes: 4 })));
    }

    #[test]
    fn grid_is_increasing() {
        let g = tau_grid(1000.0, 2048);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(g[0], 0.0);
        assert!((g.last().unwrap() - 1000.0).abs() < 1e-9);
    }
}
