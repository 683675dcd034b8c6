//! Frequency-domain Gauss–Legendre quadrature and time-domain half-line
//! Fourier integrals.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of nodes in the reference grid.
pub const REFERENCE_NODES: usize = 400;
/// Upper end of the reference grid in units of ω_c.
pub const REFERENCE_SPAN: f64 = 12.0;

/// Quadrature rule for ∫_{ω_min}^{ω_max} dω.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyGrid {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl FrequencyGrid {
    /// Gauss–Legendre rule with `n` nodes mapped to [a, b].
    pub fn gauss_legendre(n: usize, a: f64, b: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("grid needs at least one node".into()));
        }
        if !(a.is_finite() && b.is_finite() && b > a && a >= 0.0) {
            return Err(Error::Domain(format!("bad grid interval [{a}, {b}]")));
        }
        let (x, w) = legendre_nodes(n);
        let half = 0.5 * (b - a);
        let mid = 0.5 * (b + a);
        Ok(Self {
            nodes: x.iter().map(|&xi| mid + half * xi).collect(),
            weights: w.iter().map(|&wi| half * wi).collect(),
        })
    }

    /// The default grid: 400 nodes on [0, 12 ω_c]. Gauss nodes are interior,
    /// so ω = 0 is never evaluated.
    pub fn reference(omega_c: f64) -> Result<Self> {
        Self::gauss_legendre(REFERENCE_NODES, 0.0, REFERENCE_SPAN * omega_c)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn upper(&self) -> f64 {
        self.nodes.last().copied().unwrap_or(0.0)
    }
}

/// Nodes and weights of the n-point Gauss–Legendre rule on [−1, 1], in
/// increasing order.
fn legendre_nodes(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    let nf = n as f64;
    for i in 0..m {
        // Tricomi initial guess, then Newton on P_n.
        let theta = std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5);
        let mut z = (1.0 - (nf - 1.0) / (8.0 * nf * nf * nf)) * theta.cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_eval(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_eval(n, z);
        if d != 0.0 {
            dp = d;
        }
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// P_n(z) and P_n'(z) by the three-term recurrence.
fn legendre_eval(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// Σ wᵢ f(ωᵢ) for a real integrand.
pub fn integrate_frequency<F>(f: F, grid: &FrequencyGrid) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let mut sum = 0.0;
    for (&w, &wt) in grid.nodes.iter().zip(&grid.weights) {
        let v = f(w);
        if !v.is_finite() {
            return Err(Error::NonFinite { node: w, value: v });
        }
        sum += wt * v;
    }
    Ok(sum)
}

/// Σ wᵢ f(ωᵢ) for a complex integrand.
pub fn integrate_frequency_complex<F>(f: F, grid: &FrequencyGrid) -> Result<Complex64>
where
    F: Fn(f64) -> Complex64,
{
    let mut sum = Complex64::new(0.0, 0.0);
    for (&w, &wt) in grid.nodes.iter().zip(&grid.weights) {
        let v = f(w);
        if !(v.re.is_finite() && v.im.is_finite()) {
            let bad = if v.re.is_finite() { v.im } else { v.re };
            return Err(Error::NonFinite { node: w, value: bad });
        }
        sum += v * wt;
    }
    Ok(sum)
}

/// Result of a half-line Fourier integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FourierIntegral {
    pub value: Complex64,
    /// Where integration stopped (ps).
    pub tau_end: f64,
    /// False when |g| never fell below the tolerance before `tau_max`.
    pub decayed: bool,
}

/// Time-integration settings for [`half_line_fourier`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FourierOptions {
    pub tau_max: f64,
    pub tol: f64,
    /// Step cap before the oscillation constraint 0.05/|w| is applied.
    pub max_step: f64,
}

impl Default for FourierOptions {
    fn default() -> Self {
        Self {
            tau_max: 50.0,
            tol: 1e-12,
            max_step: 0.05,
        }
    }
}

impl FourierOptions {
    /// Default options with the thermal step cap 0.02 β.
    pub fn for_beta(beta: f64) -> Self {
        let d = Self::default();
        Self {
            max_step: d.max_step.min(0.02 * beta),
            ..d
        }
    }

    pub fn step(&self, w: f64) -> f64 {
        let mut h = self.max_step;
        if w != 0.0 {
            h = h.min(0.05 / w.abs());
        }
        h
    }
}

/// ∫₀^{τ*} g(τ) e^{iwτ} dτ by composite Simpson, where τ* is the first
/// point after which |g| stays below `tol` for a one-picosecond window (or
/// `tau_max`).
pub fn half_line_fourier<G>(g: G, w: f64, opts: &FourierOptions) -> Result<FourierIntegral>
where
    G: Fn(f64) -> Complex64,
{
    if !(opts.tau_max > 0.0 && opts.tol > 0.0 && opts.max_step > 0.0) {
        return Err(Error::Domain("fourier options must be positive".into()));
    }
    let h = opts.step(w);
    let window = ((1.0 / h).ceil() as usize).max(8);
    let pairs_max = ((opts.tau_max / h) / 2.0).ceil() as usize;

    let sample = |k: usize| -> Result<Complex64> {
        let t = k as f64 * h;
        let v = g(t);
        if !(v.re.is_finite() && v.im.is_finite()) {
            return Err(Error::NonFinite {
                node: t,
                value: v.norm(),
            });
        }
        Ok(v * Complex64::from_polar(1.0, w * t))
    };

    let mut acc = Complex64::new(0.0, 0.0);
    let mut f0 = sample(0)?;
    let mut quiet = usize::from(f0.norm() < opts.tol);
    let mut k = 0;
    let mut decayed = false;
    for _ in 0..pairs_max {
        let f1 = sample(k + 1)?;
        let f2 = sample(k + 2)?;
        acc += (f0 + f1 * 4.0 + f2) * (h / 3.0);
        for f in [f1, f2] {
            if f.norm() < opts.tol {
                quiet += 1;
            } else {
                quiet = 0;
            }
        }
        k += 2;
        f0 = f2;
        if quiet >= window {
            decayed = true;
            break;
        }
    }
    Ok(FourierIntegral {
        value: acc,
        tau_end: k as f64 * h,
        decayed,
    })
}

/// ∫₀^{τ_end} g(τ) e^{iwτ} dτ from uniform samples g(k·dt), composite
/// Simpson (with a trapezoid closing interval for an even sample count).
pub fn half_line_fourier_samples(samples: &[Complex64], dt: f64, w: f64) -> Complex64 {
    let n = samples.len();
    if n < 2 {
        return Complex64::new(0.0, 0.0);
    }
    let rot = Complex64::from_polar(1.0, w * dt);
    let mut phase = Complex64::new(1.0, 0.0);
    let simpson_end = if n % 2 == 1 { n - 1 } else { n - 2 };
    let mut acc = Complex64::new(0.0, 0.0);
    let mut prev = Complex64::new(0.0, 0.0);
    for (k, &g) in samples.iter().enumerate() {
        // Re-anchor the phase periodically to stop rounding drift.
        if k % 1024 == 0 {
            phase = Complex64::from_polar(1.0, w * dt * k as f64);
        }
        let f = g * phase;
        if k <= simpson_end {
            let c = if k == 0 || k == simpson_end {
                1.0
            } else if k % 2 == 1 {
                4.0
            } else {
                2.0
            };
            acc += f * (c * dt / 3.0);
        } else {
            acc += (prev + f) * (0.5 * dt);
        }
        prev = f;
        phase *= rot;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_rule_is_exact_for_polynomials() {
        let g = FrequencyGrid::gauss_legendre(7, 0.0, 2.0).unwrap();
        // exact to degree 13
        let v = integrate_frequency(|x| x.powi(13), &g).unwrap();
        assert!((v - 2f64.powi(14) / 14.0).abs() < 1e-10);
        let total: f64 = g.weights.iter().sum();
        assert!((total - 2.0).abs() < 1e-14);
    }

    #[test]
    fn reference_grid_shape() {
        let g = FrequencyGrid::reference(2.2).unwrap();
        assert_eq!(g.len(), 400);
        assert!(g.nodes.windows(2).all(|p| p[1] > p[0]));
        assert!(g.nodes[0] > 0.0);
        assert!(g.weights.iter().all(|&w| w > 0.0));
        assert!(g.upper() >= 10.0 * 2.2);
    }

    #[test]
    fn gaussian_moments() {
        let g = FrequencyGrid::reference(1.0).unwrap();
        let a = integrate_frequency(|w| w.powi(3) * (-w * w).exp(), &g).unwrap();
        assert!((a - 0.5).abs() < 1e-10 * 0.5);
        let b = integrate_frequency(|w| w * (-w * w).exp(), &g).unwrap();
        assert!((b - 0.5).abs() < 1e-10 * 0.5);
        assert_eq!(integrate_frequency(|_| 0.0, &g).unwrap(), 0.0);
    }

    #[test]
    fn non_finite_reports_node() {
        let g = FrequencyGrid::reference(1.0).unwrap();
        let first = g.nodes[0];
        let err = integrate_frequency(|w| if w == first { f64::NAN } else { 1.0 }, &g).unwrap_err();
        match err {
            Error::NonFinite { node, .. } => assert_eq!(node, first),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn upper_limit_insensitive() {
        let wc = 2.2;
        let j = |w: f64| 0.027 * w.powi(3) * (-(w / wc) * (w / wc)).exp();
        let g8 = FrequencyGrid::gauss_legendre(400, 0.0, 8.0 * wc).unwrap();
        let g12 = FrequencyGrid::reference(wc).unwrap();
        let a = integrate_frequency(j, &g8).unwrap();
        let b = integrate_frequency(j, &g12).unwrap();
        assert!(((a - b) / b).abs() < 1e-12);
        // closed form α ω_c⁴ / 2
        assert!(((b - 0.027 * wc.powi(4) / 2.0) / b).abs() < 1e-12);
    }

    #[test]
    fn doubling_nodes_is_stable() {
        let wc = 2.2;
        let f = |w: f64| 0.027 * w * (-(w / wc) * (w / wc)).exp() / (0.5 * 1.9 * w).tanh();
        let a = integrate_frequency(f, &FrequencyGrid::reference(wc).unwrap()).unwrap();
        let b = integrate_frequency(f, &FrequencyGrid::gauss_legendre(800, 0.0, 12.0 * wc).unwrap())
            .unwrap();
        assert!(((a - b) / b).abs() < 1e-9);
    }

    #[test]
    fn laplace_of_exponential() {
        let gamma = 0.7;
        let opts = FourierOptions {
            tau_max: 100.0,
            ..FourierOptions::default()
        };
        let r = half_line_fourier(|t| Complex64::new((-gamma * t).exp(), 0.0), 0.0, &opts).unwrap();
        assert!(r.decayed);
        // Simpson at h = 0.05: relative error ≈ (hγ)⁴/180
        assert!((r.value - 1.0 / gamma).norm() < 1e-7);
        let w = 1.3;
        let r = half_line_fourier(|t| Complex64::new((-gamma * t).exp(), 0.0), w, &opts).unwrap();
        let exact = Complex64::new(1.0, 0.0) / Complex64::new(gamma, -w);
        assert!((r.value - exact).norm() < 1e-7, "{} vs {exact}", r.value);
    }

    #[test]
    fn zero_integrand() {
        let r = half_line_fourier(|_| Complex64::new(0.0, 0.0), 2.0, &FourierOptions::default())
            .unwrap();
        assert_eq!(r.value, Complex64::new(0.0, 0.0));
        assert!(r.decayed);
    }

    #[test]
    fn undecayed_is_flagged() {
        let opts = FourierOptions {
            tau_max: 5.0,
            ..FourierOptions::default()
        };
        let r = half_line_fourier(|t| Complex64::new((-0.01 * t).exp(), 0.0), 0.0, &opts).unwrap();
        assert!(!r.decayed);
        assert!(r.tau_end >= 5.0);
    }

    #[test]
    fn conjugate_symmetry_for_real_g() {
        let opts = FourierOptions {
            tau_max: 80.0,
            ..FourierOptions::default()
        };
        let g = |t: f64| Complex64::new((-0.5 * t).exp() * (1.0 + t), 0.0);
        let p = half_line_fourier(g, 0.9, &opts).unwrap().value;
        let m = half_line_fourier(g, -0.9, &opts).unwrap().value;
        assert!((p - m.conj()).norm() < 1e-10);
    }

    #[test]
    fn samples_match_closure() {
        let gamma = 0.4;
        let dt = 0.01;
        let s: Vec<Complex64> = (0..8000)
            .map(|k| Complex64::new((-gamma * k as f64 * dt).exp(), 0.0))
            .collect();
        let v = half_line_fourier_samples(&s, dt, 0.3);
        let exact = Complex64::new(1.0, 0.0) / Complex64::new(gamma, -0.3);
        assert!((v - exact).norm() < 1e-9);
        let v_odd = half_line_fourier_samples(&s[..7999], dt, 0.3);
        assert!((v_odd - exact).norm() < 1e-9);
    }
}
