//! Incoherent emission spectrum and three-Lorentzian triplet fitting.
//!
//! S(Δ) = (1/π) Re ∫₀^∞ e^{iΔτ} g⁽¹⁾_inc(τ) dτ with Δ = ω − ω_l. The
//! coherent δ-peak is never included; it is reported as `g1_coh`.

use nalgebra::{SMatrix, SVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dynamics::{CorrelationMethod, RegressionModes};
use crate::error::{Error, Result};
use crate::operators::{sigma_minus, sigma_plus, vectorize, DensityMatrix, Mat4, Superoperator};

pub const DEFAULT_SPECTRUM_POINTS: usize = 4001;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSeries {
    /// Δ = ω − ω_l (ps⁻¹).
    pub omega_grid: Vec<f64>,
    pub s_values: Vec<f64>,
    pub method: CorrelationMethod,
    pub warnings: Vec<String>,
}

impl SpectrumSeries {
    pub fn max(&self) -> f64 {
        self.s_values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Trapezoid integral over the grid.
    pub fn integral(&self) -> f64 {
        self.omega_grid
            .windows(2)
            .zip(self.s_values.windows(2))
            .map(|(w, s)| 0.5 * (w[1] - w[0]) * (s[0] + s[1]))
            .sum()
    }
}

/// `n` evenly spaced points on [−3η, 3η].
pub fn spectrum_grid(eta: f64, n: usize) -> Result<Vec<f64>> {
    if !(eta > 0.0 && eta.is_finite()) || n < 2 {
        return Err(Error::Domain(format!("spectrum grid needs eta > 0 and n >= 2 (eta = {eta}, n = {n})")));
    }
    let h = 6.0 * eta / (n - 1) as f64;
    Ok((0..n).map(|k| -3.0 * eta + h * k as f64).collect())
}

/// S(Δ) = (1/π) Σ_{k≠0} Re[c_k / (−λ_k − iΔ)] from the eigenexpansion. An
/// ill-conditioned eigenbasis switches to the resolvent
/// Tr[σ₋ (−L − iΔ + P)⁻¹ x_inc], which is exact without diagonalising.
pub fn incoherent_spectrum(
    l: &Superoperator,
    rho_ss: &DensityMatrix,
    omega_grid: &[f64],
) -> Result<SpectrumSeries> {
    if omega_grid.iter().any(|w| !w.is_finite()) {
        return Err(Error::Domain("omega grid must be finite".into()));
    }
    let mut warnings = Vec::new();
    let modes = match RegressionModes::new(l, rho_ss) {
        Ok(m) if m.condition < 1e8 => Some(m),
        Ok(m) => {
            warnings.push(format!("eigenbasis condition {:e}; using resolvent", m.condition));
            None
        }
        Err(e) => {
            warnings.push(format!("{e}; using resolvent"));
            None
        }
    };
    let (s_values, method) = match modes {
        Some(m) => (
            omega_grid.iter().map(|&w| eigen_point(&m, w)).collect(),
            CorrelationMethod::Eigenexpansion,
        ),
        None => (
            resolvent_spectrum(l, rho_ss, omega_grid)?,
            CorrelationMethod::Propagation,
        ),
    };
    Ok(SpectrumSeries {
        omega_grid: omega_grid.to_vec(),
        s_values,
        method,
        warnings,
    })
}

fn eigen_point(m: &RegressionModes, w: f64) -> f64 {
    let mut s = 0.0;
    for (k, (lam, c)) in m.eigenvalues.iter().zip(&m.coefficients).enumerate() {
        if k == m.zero_index {
            continue;
        }
        s += (c / (-lam - Complex64::new(0.0, w))).re;
    }
    s / std::f64::consts::PI
}

/// Spectrum through the regularised resolvent of L.
pub fn resolvent_spectrum(l: &Superoperator, rho_ss: &DensityMatrix, omega_grid: &[f64]) -> Result<Vec<f64>> {
    let x0 = vectorize(&(rho_ss.matrix() * sigma_plus()));
    let ss = vectorize(rho_ss.matrix());
    let tr = x0[0] + x0[3];
    let x_inc = x0 - ss * tr;
    // P = |ρ_ss⟩⟨I| lifts the zero mode without touching trace-free vectors.
    let mut p = Mat4::zeros();
    for r in 0..4 {
        p[(r, 0)] = ss[r];
        p[(r, 3)] = ss[r];
    }
    let sm = vectorize(&sigma_minus().transpose());
    let mut out = Vec::with_capacity(omega_grid.len());
    for &w in omega_grid {
        let a = -l.matrix - Mat4::identity() * Complex64::new(0.0, w) + p;
        let y = a
            .lu()
            .solve(&x_inc)
            .ok_or_else(|| Error::Numerical(format!("singular resolvent at {w}")))?;
        // Tr[σ₋ Y] = Σ (σ₋ᵀ)_{rc} Y_{rc}
        let v: Complex64 = sm.iter().zip(y.iter()).map(|(a, b)| a * b).sum();
        out.push(v.re / std::f64::consts::PI);
    }
    Ok(out)
}

/// 0.5Γ / ((ω − ω_p)² + (0.5Γ)²); unit area over ω.
pub fn lorentzian(w: f64, position: f64, fwhm: f64) -> f64 {
    let h = 0.5 * fwhm;
    h / ((w - position) * (w - position) + h * h)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    pub position: f64,
    pub fwhm: f64,
    /// Area multiplier of the unit-area Lorentzian; the height is 2a/Γ.
    pub amplitude: f64,
}

impl Peak {
    pub fn value(&self, w: f64) -> f64 {
        self.amplitude * lorentzian(w, self.position, self.fwhm)
    }

    pub fn height(&self) -> f64 {
        2.0 * self.amplitude / self.fwhm
    }
}

/// Peaks ordered red, central, blue.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TripletFit {
    pub peaks: [Peak; 3],
    pub splitting: f64,
    /// ‖model − data‖ / ‖data‖.
    pub fit_residual: f64,
    pub iterations: usize,
}

impl TripletFit {
    pub fn red(&self) -> &Peak {
        &self.peaks[0]
    }
    pub fn central(&self) -> &Peak {
        &self.peaks[1]
    }
    pub fn blue(&self) -> &Peak {
        &self.peaks[2]
    }

    pub fn model(&self, w: f64) -> f64 {
        self.peaks.iter().map(|p| p.value(w)).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    pub max_iter: usize,
    /// Largest relative parameter change at convergence.
    pub tol: f64,
    pub max_residual: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            max_iter: 200,
            tol: 1e-8,
            max_residual: 0.05,
        }
    }
}

pub fn fit_triplet(spec: &SpectrumSeries, init: Option<[Peak; 3]>) -> Result<TripletFit> {
    fit_triplet_with(spec, init, &FitOptions::default())
}

/// Levenberg–Marquardt fit of Σ₃ aᵢ L(ω; ω_pᵢ, Γᵢ).
pub fn fit_triplet_with(spec: &SpectrumSeries, init: Option<[Peak; 3]>, opts: &FitOptions) -> Result<TripletFit> {
    let (w, y) = (&spec.omega_grid, &spec.s_values);
    if w.len() != y.len() || w.len() < 12 {
        return Err(Error::Fit(format!("need matching grids of at least 12 points, got {} and {}", w.len(), y.len())));
    }
    let start = match init {
        Some(p) => p,
        None => initial_guess(w, y)?,
    };
    let ynorm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
    if !(ynorm > 0.0) {
        return Err(Error::Fit("spectrum is identically zero".into()));
    }

    let mut x = to_params(&start);
    let mut cost = cost_of(&x, w, y);
    let mut lambda = 1e-3;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < opts.max_iter {
        iterations += 1;
        let (jtj, jtr) = normal_equations(&x, w, y);
        let mut stepped = false;
        for _ in 0..40 {
            let mut a = jtj;
            for i in 0..9 {
                a[(i, i)] += lambda * jtj[(i, i)].max(1e-300);
            }
            let Some(dx) = a.cholesky().map(|c| c.solve(&(-jtr))) else {
                lambda *= 10.0;
                continue;
            };
            let trial = x + dx;
            if (0..3).any(|k| trial[3 * k + 1] <= 0.0) {
                lambda *= 10.0;
                continue;
            }
            let c = cost_of(&trial, w, y);
            if c <= cost {
                // Positions are measured against the peak width, since the
                // central one sits near zero.
                let rel = (0..9)
                    .map(|i| {
                        let scale = if i % 3 == 0 { x[i].abs().max(x[i + 1]) } else { x[i].abs() };
                        dx[i].abs() / scale.max(1e-300)
                    })
                    .fold(0.0, f64::max);
                x = trial;
                cost = c;
                lambda = (lambda * 0.3).max(1e-12);
                stepped = true;
                if rel < opts.tol {
                    converged = true;
                }
                break;
            }
            lambda *= 10.0;
        }
        if converged || !stepped {
            // No downhill step at any damping: a stationary point.
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Fit(format!(
            "no convergence in {iterations} iterations (relative residual {:e})",
            (2.0 * cost).sqrt() / ynorm
        )));
    }
    let mut peaks = from_params(&x);
    peaks.sort_by(|a, b| a.position.total_cmp(&b.position));
    let fit_residual = (2.0 * cost).sqrt() / ynorm;
    if !(fit_residual < opts.max_residual) {
        return Err(Error::Fit(format!(
            "relative residual {fit_residual:.3e} exceeds {}; peaks {:?}",
            opts.max_residual, peaks
        )));
    }
    if peaks.iter().any(|p| !(p.fwhm > 0.0)) || peaks[0].position == peaks[1].position || peaks[1].position == peaks[2].position {
        return Err(Error::Fit(format!("degenerate peaks {peaks:?}")));
    }
    Ok(TripletFit {
        peaks,
        splitting: (peaks[2].position - peaks[0].position).abs(),
        fit_residual,
        iterations,
    })
}

type P9 = SVector<f64, 9>;

fn to_params(p: &[Peak; 3]) -> P9 {
    let mut x = P9::zeros();
    for (k, pk) in p.iter().enumerate() {
        x[3 * k] = pk.position;
        x[3 * k + 1] = pk.fwhm;
        x[3 * k + 2] = pk.amplitude;
    }
    x
}

fn from_params(x: &P9) -> [Peak; 3] {
    std::array::from_fn(|k| Peak {
        position: x[3 * k],
        fwhm: x[3 * k + 1],
        amplitude: x[3 * k + 2],
    })
}

fn model_at(x: &P9, w: f64) -> f64 {
    (0..3).map(|k| x[3 * k + 2] * lorentzian(w, x[3 * k], x[3 * k + 1])).sum()
}

fn cost_of(x: &P9, w: &[f64], y: &[f64]) -> f64 {
    0.5 * w.iter().zip(y).map(|(&wi, &yi)| (model_at(x, wi) - yi).powi(2)).sum::<f64>()
}

fn normal_equations(x: &P9, w: &[f64], y: &[f64]) -> (SMatrix<f64, 9, 9>, P9) {
    let mut jtj = SMatrix::<f64, 9, 9>::zeros();
    let mut jtr = P9::zeros();
    for (&wi, &yi) in w.iter().zip(y) {
        let mut row = P9::zeros();
        let mut m = 0.0;
        for k in 0..3 {
            let (p, g, a) = (x[3 * k], x[3 * k + 1], x[3 * k + 2]);
            let d = wi - p;
            let h = 0.5 * g;
            let den = d * d + h * h;
            let l = h / den;
            m += a * l;
            row[3 * k] = a * 2.0 * h * d / (den * den);
            row[3 * k + 1] = a * 0.5 * (d * d - h * h) / (den * den);
            row[3 * k + 2] = l;
        }
        let r = m - yi;
        jtj += row * row.transpose();
        jtr += row * r;
    }
    (jtj, jtr)
}

/// Three largest local maxima, half-maximum widths and a = height·Γ/2.
pub fn initial_guess(w: &[f64], y: &[f64]) -> Result<[Peak; 3]> {
    let n = y.len();
    let top = y.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let floor = y.iter().copied().fold(f64::INFINITY, f64::min).abs().max(1e-12 * top.abs());
    let mut maxima: Vec<usize> = (1..n - 1).filter(|&i| y[i] > y[i - 1] && y[i] >= y[i + 1]).collect();
    maxima.sort_by(|&a, &b| y[b].total_cmp(&y[a]));
    maxima.truncate(3);
    if maxima.len() < 3 {
        return Err(Error::Fit(format!("only {} resolvable peaks", maxima.len())));
    }
    maxima.sort_unstable();
    // Prominence over the deepest point between neighbouring maxima.
    let bounds = [0, maxima[0], maxima[1], maxima[2], n - 1];
    for (j, &i) in maxima.iter().enumerate() {
        let left = y[bounds[j]..=i].iter().copied().fold(f64::INFINITY, f64::min);
        let right = y[i..=bounds[j + 2]].iter().copied().fold(f64::INFINITY, f64::min);
        let prominence = y[i] - left.max(right);
        if prominence < 3.0 * floor {
            return Err(Error::Fit(format!(
                "peak at {} has prominence {prominence:e} below 3x noise floor {floor:e}",
                w[i]
            )));
        }
    }
    Ok(std::array::from_fn(|j| {
        let i = maxima[j];
        let half = 0.5 * y[i];
        let lo = bounds[j];
        let hi = bounds[j + 2];
        let left = crossing(w, y, i, lo, half);
        let right = crossing(w, y, i, hi, half);
        let fwhm = match (left, right) {
            (Some(a), Some(b)) => b - a,
            (Some(a), None) => 2.0 * (w[i] - a),
            (None, Some(b)) => 2.0 * (b - w[i]),
            (None, None) => 0.1 * (w[hi] - w[lo]),
        };
        let fwhm = fwhm.max(w[1] - w[0]);
        Peak {
            position: w[i],
            fwhm,
            amplitude: y[i] * fwhm * 0.5,
        }
    }))
}

/// Interpolated half-maximum crossing walking from `from` towards `to`,
/// stopping at the first local minimum.
fn crossing(w: &[f64], y: &[f64], from: usize, to: usize, half: f64) -> Option<f64> {
    let step: isize = if to >= from { 1 } else { -1 };
    let mut i = from as isize;
    while i != to as isize {
        let j = i + step;
        let (a, b) = (y[i as usize], y[j as usize]);
        if b < half {
            let t = (a - half) / (a - b);
            return Some(w[i as usize] + t * (w[j as usize] - w[i as usize]));
        }
        if b > a {
            return None;
        }
        i = j;
    }
    None
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TripletObservables {
    pub splitting: f64,
    pub red_width: f64,
    pub blue_width: f64,
    pub central_width: f64,
}

/// Red and blue are the peaks with negative and positive ω_p.
pub fn extract_observables(fit: &TripletFit) -> TripletObservables {
    TripletObservables {
        splitting: fit.splitting,
        red_width: fit.red().fwhm,
        blue_width: fit.blue().fwhm,
        central_width: fit.central().fwhm,
    }
}
