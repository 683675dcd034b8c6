//! Closed-form pure-dephasing results in the polaron limit (F ≡ 1): the
//! rates γ_PD, κ, Γ_y, Γ_z, λ, the analytic g⁽¹⁾ and its coherent part,
//! the thermalisation-corrected coherent part, the Bloch generator and the
//! Mollow sideband widths.
//!
//! The propagator here is evaluated pointwise by a dense Gauss–Legendre sum,
//! independently of the FFT route used by [`crate::dissipator`].

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::{anticommutator, commutator, re, sigma_minus, sigma_x, sigma_y, sigma_z, Mat2, Superoperator};
use crate::quadrature::{half_line_fourier_samples, FourierOptions, FrequencyGrid};
use crate::units::{coth_over_w, spectral_density_unchecked, PhysicalParams};
use crate::variational::VariationalSolution;

/// Oracle inputs must be this close to the polaron displacement.
pub const POLARON_TOLERANCE: f64 = 1e-3;

const ORACLE_NODES: usize = 2400;

/// φ(s) = ∫ J ω⁻² [cos(ωs)coth(βω/2) − i sin(ωs)] dω for F ≡ 1.
#[derive(Debug, Clone)]
pub struct PolaronPropagator {
    nodes: Vec<f64>,
    cos_weight: Vec<f64>,
    sin_weight: Vec<f64>,
    pub beta: f64,
}

impl PolaronPropagator {
    pub fn new(params: &PhysicalParams) -> Result<Self> {
        Self::with_nodes(params, ORACLE_NODES)
    }

    pub fn with_nodes(params: &PhysicalParams, n: usize) -> Result<Self> {
        params.validate()?;
        let beta = params.beta();
        let grid = FrequencyGrid::gauss_legendre(n, 0.0, 12.0 * params.omega_c)?;
        let mut cos_weight = Vec::with_capacity(n);
        let mut sin_weight = Vec::with_capacity(n);
        for (&w, &wt) in grid.nodes.iter().zip(&grid.weights) {
            let j = spectral_density_unchecked(w, params.alpha, params.omega_c) / (w * w);
            cos_weight.push(wt * j * w * coth_over_w(w, beta));
            sin_weight.push(wt * j);
        }
        Ok(Self {
            nodes: grid.nodes,
            cos_weight,
            sin_weight,
            beta,
        })
    }

    /// Guarded constructor: refuses solutions that are not in the polaron
    /// limit.
    pub fn for_solution(sol: &VariationalSolution, params: &PhysicalParams) -> Result<Self> {
        let dev = sol.max_polaron_deviation();
        if dev > POLARON_TOLERANCE {
            return Err(Error::Contract(format!(
                "oracle needs the polaron limit, max|F - 1| = {dev:e}"
            )));
        }
        Self::new(params)
    }

    pub fn at(&self, s: f64) -> Complex64 {
        let mut c = 0.0;
        let mut si = 0.0;
        for ((&w, &a), &b) in self.nodes.iter().zip(&self.cos_weight).zip(&self.sin_weight) {
            let (sn, cs) = (w * s).sin_cos();
            c += a * cs;
            si += b * sn;
        }
        Complex64::new(c, -si)
    }

    /// φ(k·dt) for k = 0..n, using phasor recurrences with periodic
    /// re-anchoring.
    pub fn samples(&self, dt: f64, n: usize) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        const BLOCK: usize = 256;
        let mut start = 0;
        while start < n {
            let end = (start + BLOCK).min(n);
            for ((&w, &a), &b) in self.nodes.iter().zip(&self.cos_weight).zip(&self.sin_weight) {
                let step = Complex64::from_polar(1.0, w * dt);
                let mut z = Complex64::from_polar(1.0, w * dt * start as f64);
                for v in &mut out[start..end] {
                    *v += Complex64::new(a * z.re, -b * z.im);
                    z *= step;
                }
            }
            start = end;
        }
        out
    }
}

/// Rates of the polaron-limit pure-dephasing model at one Ω_r.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PureDephasingRates {
    pub omega_r: f64,
    pub gamma1: f64,
    pub beta: f64,
    pub gamma_pd: f64,
    pub kappa: f64,
    pub lambda_shift: f64,
    pub gamma_y: f64,
    pub gamma_z: f64,
    /// Γ₂ = Γ₁/2 + γ_PD.
    pub gamma2: f64,
    /// ζ = √(Ω_r² − ¼(Γ₁ − Γ₂)²); NaN in the overdamped regime.
    pub zeta: f64,
    /// False when the correlation had not decayed within the window.
    pub decayed: bool,
}

impl PureDephasingRates {
    pub fn compute(prop: &PolaronPropagator, omega_r: f64, gamma1: f64) -> Result<Self> {
        Self::compute_with(prop, omega_r, gamma1, &OracleOptions::default())
    }

    pub fn compute_with(
        prop: &PolaronPropagator,
        omega_r: f64,
        gamma1: f64,
        opts: &OracleOptions,
    ) -> Result<Self> {
        if !(omega_r >= 0.0 && gamma1 >= 0.0) {
            return Err(Error::Domain("omega_r and gamma1 must be >= 0".into()));
        }
        let ints = RateIntegrals::new(prop, omega_r, opts)?;
        let gamma_pd = ints.gamma_pd();
        let gamma2 = 0.5 * gamma1 + gamma_pd;
        Ok(Self {
            omega_r,
            gamma1,
            beta: prop.beta,
            gamma_pd,
            kappa: ints.kappa(),
            lambda_shift: ints.lambda(),
            gamma_y: ints.gamma_y(),
            gamma_z: gamma_pd,
            gamma2,
            zeta: zeta(omega_r, gamma1, gamma2).unwrap_or(f64::NAN),
            decayed: ints.decayed,
        })
    }
}

/// Time-integration settings for the oracle rates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleOptions {
    pub fourier: FourierOptions,
    /// Fraction of the default step actually used.
    pub refine: f64,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self {
            fourier: FourierOptions::default(),
            refine: 0.1,
        }
    }
}

/// K-type integrals of C(s) = (Ω_r/2)²(e^φ − e^{−φ}) and
/// D(s) = (Ω_r/2)²(e^φ + e^{−φ} − 2) at ±Ω_r and 0.
struct RateIntegrals {
    c_plus: Complex64,
    c_minus: Complex64,
    d_zero: Complex64,
    decayed: bool,
}

impl RateIntegrals {
    fn new(prop: &PolaronPropagator, omega_r: f64, opts: &OracleOptions) -> Result<Self> {
        let base = FourierOptions {
            max_step: opts.fourier.max_step.min(0.02 * prop.beta),
            ..opts.fourier
        };
        let dt = base.step(omega_r) * opts.refine;
        let n = (base.tau_max / dt).ceil() as usize + 1;
        let phi = prop.samples(dt, n);
        let q = 0.25 * omega_r * omega_r;
        let c: Vec<Complex64> = phi.iter().map(|p| (p.exp() - (-p).exp()) * q).collect();
        let d: Vec<Complex64> = phi
            .iter()
            .map(|p| {
                let sh = (p * 0.5).sinh();
                sh * sh * 4.0 * q
            })
            .collect();
        // Truncate once both have stayed below tol for one picosecond.
        let window = ((1.0 / dt).ceil() as usize).max(8);
        let mut quiet = 0;
        let mut end = n;
        let mut decayed = false;
        for k in 0..n {
            if c[k].norm() < base.tol && d[k].norm() < base.tol {
                quiet += 1;
                if quiet >= window {
                    end = k + 1;
                    decayed = true;
                    break;
                }
            } else {
                quiet = 0;
            }
        }
        Ok(Self {
            c_plus: half_line_fourier_samples(&c[..end], dt, omega_r),
            c_minus: half_line_fourier_samples(&c[..end], dt, -omega_r),
            d_zero: half_line_fourier_samples(&d[..end], dt, 0.0),
            decayed,
        })
    }

    /// (Ω_r/2)² ∫_{−∞}^{∞} cos(Ω_r s)(e^φ − e^{−φ}) ds.
    fn gamma_pd(&self) -> f64 {
        (self.c_plus + self.c_minus).re
    }

    /// −2 (Ω_r/2)² ∫₀^∞ sin(Ω_r s) Im(e^φ − e^{−φ}) ds.
    fn kappa(&self) -> f64 {
        (self.c_plus - self.c_minus).re
    }

    /// 2γ₁₁(0) = 4 Re ∫₀^∞ Λ₁₁, Λ₁₁ = D/2.
    fn gamma_y(&self) -> f64 {
        2.0 * self.d_zero.re
    }

    /// 2[S₂₂(Ω_r) − S₂₂(−Ω_r)], Λ₂₂ = C/2.
    fn lambda(&self) -> f64 {
        (self.c_plus - self.c_minus).im
    }
}

/// γ_PD for the polaron propagator at Ω_r.
pub fn gamma_pd(omega_r: f64, prop: &PolaronPropagator) -> Result<f64> {
    Ok(RateIntegrals::new(prop, omega_r, &OracleOptions::default())?.gamma_pd())
}

/// κ for the polaron propagator at Ω_r; κ ≥ 0.
pub fn kappa(omega_r: f64, prop: &PolaronPropagator) -> Result<f64> {
    Ok(RateIntegrals::new(prop, omega_r, &OracleOptions::default())?.kappa())
}

fn zeta(omega_r: f64, gamma1: f64, gamma2: f64) -> Option<f64> {
    let z2 = omega_r * omega_r - 0.25 * (gamma1 - gamma2) * (gamma1 - gamma2);
    (z2 > 0.0).then(|| z2.sqrt())
}

/// Coefficients (prefactor, N, M, ζ, Γ₂) of the analytic incoherent g⁽¹⁾.
pub fn pd_coefficients(omega_r: f64, gamma1: f64, gamma_pd: f64) -> Result<(f64, f64, f64, f64, f64)> {
    let g1 = gamma1;
    let g2 = 0.5 * gamma1 + gamma_pd;
    let or2 = omega_r * omega_r;
    let z = zeta(omega_r, g1, g2).ok_or_else(|| {
        Error::Unsupported(format!(
            "overdamped regime: Omega_r = {omega_r} <= |Gamma1 - Gamma2|/2"
        ))
    })?;
    let pref = or2 / (2.0 * or2 + 2.0 * g1 * g2);
    let n = (or2 - g1 * (g1 - g2)) / (2.0 * or2 + 2.0 * g1 * g2);
    let inv = 1.0 / g1 - 1.0 / g2;
    let m = (or2 * (g2 - 3.0 * g1) + g1.powi(3) * g2 * g2 * inv * inv) / (4.0 * z * (or2 + g1 * g2));
    Ok((pref, n, m, z, g2))
}

/// Incoherent pure-dephasing correlation
/// [Ω_r²/(2Ω_r² + 2Γ₁Γ₂)]·[½e^{−Γ₂τ} + e^{−(Γ₁+Γ₂)τ/2}(N cos ζτ − M sin ζτ)].
pub fn g1_inc_pd(tau: f64, omega_r: f64, gamma1: f64, gamma_pd: f64) -> Result<f64> {
    let (pref, n, m, z, g2) = pd_coefficients(omega_r, gamma1, gamma_pd)?;
    let osc = (-0.5 * (gamma1 + g2) * tau).exp() * (n * (z * tau).cos() - m * (z * tau).sin());
    Ok(pref * (0.5 * (-g2 * tau).exp() + osc))
}

/// Coherent pure-dephasing fraction (Γ₁Ω_r/(2Γ₁Γ₂ + 2Ω_r²))².
pub fn g1_coh_pd(omega_r: f64, gamma1: f64, gamma_pd: f64) -> f64 {
    let g2 = 0.5 * gamma1 + gamma_pd;
    let x = gamma1 * omega_r / (2.0 * gamma1 * g2 + 2.0 * omega_r * omega_r);
    x * x
}

/// Coherent part with the dressed-state thermalisation correction,
/// g1_coh_pd + (Ω_r κ / Ω / (Γ₁ + 2γ_PD))².
pub fn g1_coh_corrected(omega_r: f64, omega: f64, gamma1: f64, gamma_pd: f64, kappa: f64) -> f64 {
    let x = omega_r * kappa / omega / (gamma1 + 2.0 * gamma_pd);
    g1_coh_pd(omega_r, gamma1, gamma_pd) + x * x
}

/// Strong-driving approximation (Ω_r tanh(βΩ_r/2) / 2Ω)².
pub fn g1_coh_large_rabi(omega_r: f64, omega: f64, beta: f64) -> f64 {
    let x = omega_r * (0.5 * beta * omega_r).tanh() / (2.0 * omega);
    x * x
}

/// Sideband FWHM on resonance, (3/2)Γ₁ + γ_PD.
pub fn sideband_width_resonant(gamma1: f64, gamma_pd: f64) -> f64 {
    1.5 * gamma1 + gamma_pd
}

/// Sideband FWHM to second order in ε/Ω_r,
/// (3/2)Γ₁ + γ_PD − (ε/√2Ω_r)²(Γ₁ − 2γ_PD).
pub fn sideband_width_detuned(gamma1: f64, gamma_pd: f64, epsilon: f64, omega_r: f64) -> f64 {
    let x = epsilon / (std::f64::consts::SQRT_2 * omega_r);
    sideband_width_resonant(gamma1, gamma_pd) - x * x * (gamma1 - 2.0 * gamma_pd)
}

/// Pure-dephasing master equation generator:
/// −i[H_S, ·] + (γ_PD/2)(σ_zρσ_z − ρ) + Γ₁D[σ₋] + (iκ/4)[σ_y, {σ_z, ρ}].
pub fn pure_dephasing_liouvillian(
    epsilon: f64,
    omega_r: f64,
    gamma1: f64,
    gamma_pd: f64,
    kappa: f64,
) -> Superoperator {
    let h = (sigma_z() * re(epsilon) + sigma_x() * re(omega_r)) * re(0.5);
    let (sz, sy) = (sigma_z(), sigma_y());
    let dephase = Superoperator::from_map(move |r: &Mat2| (sz * r * sz - r) * re(0.5 * gamma_pd));
    let thermal = Superoperator::from_map(move |r: &Mat2| {
        commutator(&sy, &anticommutator(&sz, r)) * Complex64::new(0.0, 0.25 * kappa)
    });
    Superoperator::hamiltonian(&h)
        + dephase
        + Superoperator::lindblad(&sigma_minus(), gamma1)
        + thermal
}

/// dα/dt = Mα + b for α = (⟨σ_x⟩, ⟨σ_y⟩, ⟨σ_z⟩).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochGenerator {
    pub m: Matrix3<f64>,
    pub b: Vector3<f64>,
}

impl BlochGenerator {
    pub fn steady_state(&self) -> Result<Vector3<f64>> {
        self.m
            .lu()
            .solve(&(-self.b))
            .ok_or_else(|| Error::Numerical("singular Bloch matrix".into()))
    }

    /// α(t) = e^{Mt}(α₀ − α_∞) + α_∞.
    pub fn evolve(&self, alpha0: Vector3<f64>, t: f64) -> Result<Vector3<f64>> {
        let ss = self.steady_state()?;
        Ok((self.m * t).exp() * (alpha0 - ss) + ss)
    }
}

/// Polaron-limit resonant Bloch generator with diagonal
/// (−Γ_z, −Γ_y, −(Γ_z + Γ_y)), couplings −Ω_r and Ω_r + λ, and drive
/// b = (−κ, 0, 0).
pub fn bloch_generator(rates: &PureDephasingRates, omega_r: f64) -> BlochGenerator {
    let (gz, gy) = (rates.gamma_z, rates.gamma_y);
    let m = Matrix3::new(
        -gz, 0.0, 0.0, //
        0.0, -gy, -omega_r, //
        0.0, omega_r + rates.lambda_shift, -(gz + gy),
    );
    BlochGenerator {
        m,
        b: Vector3::new(-rates.kappa, 0.0, 0.0),
    }
}

/// Bloch-vector form of a trace-preserving superoperator:
/// M_ij = ½Tr[σ_i L(σ_j)], b_i = ½Tr[σ_i L(I)].
pub fn bloch_representation(l: &Superoperator) -> BlochGenerator {
    let s = [sigma_x(), sigma_y(), sigma_z()];
    let mut m = Matrix3::zeros();
    let mut b = Vector3::zeros();
    for i in 0..3 {
        for j in 0..3 {
            m[(i, j)] = 0.5 * (s[i] * l.apply(&s[j])).trace().re;
        }
        b[i] = 0.5 * (s[i] * l.apply(&Mat2::identity())).trace().re;
    }
    BlochGenerator { m, b }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{g1_correlation, steady_state};

    fn fig1() -> PhysicalParams {
        PhysicalParams::new(0.0, 0.1, 0.027, 2.2, 4.0, 1.0 / 700.0).unwrap()
    }

    #[test]
    fn propagator_sampling_matches_pointwise() {
        let prop = PolaronPropagator::new(&fig1()).unwrap();
        let s = prop.samples(0.01, 2000);
        for k in [0usize, 7, 300, 1999] {
            assert!((s[k] - prop.at(0.01 * k as f64)).norm() < 1e-12);
        }
        let grid = FrequencyGrid::reference(2.2).unwrap();
        let b = crate::variational::polaron_b_factor(&fig1(), &grid).unwrap();
        assert!((s[0].re + 2.0 * b.ln()).abs() < 1e-10);
    }

    #[test]
    fn rates_vanish_without_coupling() {
        let prop = PolaronPropagator::new(&fig1().with_alpha(0.0)).unwrap();
        let r = PureDephasingRates::compute(&prop, 0.3, 1e-3).unwrap();
        assert_eq!(r.gamma_pd, 0.0);
        assert_eq!(r.kappa, 0.0);
    }

    #[test]
    fn thermalisation_ratio() {
        for t in [2.0, 10.0] {
            let p = fig1().with_temperature(t);
            let prop = PolaronPropagator::new(&p).unwrap();
            for or in [0.05, 1.0] {
                let r = PureDephasingRates::compute(&prop, or, 1e-3).unwrap();
                let th = (0.5 * p.beta() * or).tanh();
                assert!((r.kappa / r.gamma_pd - th).abs() < 1e-6, "{t} {or}");
                assert!(r.kappa.abs() <= r.gamma_pd);
            }
        }
        // near T → 0 the ratio approaches one
        let cold = fig1().with_temperature(1.0);
        let prop = PolaronPropagator::new(&cold).unwrap();
        let r = PureDephasingRates::compute(&prop, 1.0, 1e-3).unwrap();
        assert!(r.decayed);
        assert!((r.kappa / r.gamma_pd - 1.0).abs() < 1e-3);
        assert!((r.kappa / r.gamma_pd - (0.5 * cold.beta()).tanh()).abs() < 1e-6);
    }

    #[test]
    fn gamma_pd_quadratic_at_weak_driving() {
        let prop = PolaronPropagator::new(&fig1()).unwrap();
        let a = gamma_pd(0.002, &prop).unwrap();
        let b = gamma_pd(0.02, &prop).unwrap();
        let slope = (b / a).log10();
        assert!((slope - 2.0).abs() < 0.05, "{slope}");
    }

    #[test]
    fn coherent_fraction_closed_forms() {
        let g = 1e-3;
        assert!((g1_coh_pd(g, g, 0.0) - 1.0 / 9.0).abs() < 1e-15);
        assert!(g1_coh_pd(1e-9, g, 0.01) < 1e-10);
        assert!(g1_coh_pd(1e6, g, 0.01) < 1e-10);
        assert_eq!(g1_coh_corrected(0.3, 0.4, g, 0.01, 0.0), g1_coh_pd(0.3, g, 0.01));
        // βΩ_r ≫ 1, Γ₁ ≪ γ_PD, κ = γ_PD
        let v = g1_coh_corrected(2.0, 2.5, 1e-6, 0.1, 0.1);
        assert!((v - (2.0f64 / 5.0).powi(2)).abs() < 1e-4);
        assert!((g1_coh_large_rabi(2.0, 2.5, 100.0) - 0.16).abs() < 1e-12);
    }

    #[test]
    fn analytic_g1_matches_regression() {
        for (or, g1, gpd) in [(0.3, 1.0 / 700.0, 0.01), (0.05, 1.0 / 700.0, 1e-4), (0.02, 0.01, 0.002)] {
            let l = pure_dephasing_liouvillian(0.0, or, g1, gpd, 0.0);
            let rho = steady_state(&l).unwrap();
            let taus: Vec<f64> = (0..50).map(|k| k as f64 * 20.0 / g1 / 49.0).collect();
            let c = g1_correlation(&l, &rho, &taus).unwrap();
            let coh = g1_coh_pd(or, g1, gpd);
            assert!((c.g1_coh - coh).abs() < 1e-14);
            for (t, v) in taus.iter().zip(&c.g1) {
                let a = g1_inc_pd(*t, or, g1, gpd).unwrap() + coh;
                assert!((v.re - a).abs() < 1e-8 * c.g1[0].re);
                assert!(v.im.abs() < 1e-12);
            }
            // printed coefficients are consistent at τ = 0
            let pop = g1_inc_pd(0.0, or, g1, gpd).unwrap() + coh;
            assert!((pop - rho.excited_population()).abs() < 1e-13);
        }
    }

    #[test]
    fn overdamped_is_rejected() {
        assert!(matches!(g1_inc_pd(0.0, 1e-5, 1e-2, 0.1), Err(Error::Unsupported(_))));
    }

    #[test]
    fn thermal_term_matches_corrected_coherence() {
        let (or, g1, gpd, kap) = (0.3, 1.0 / 700.0, 0.01, 0.006);
        let l = pure_dephasing_liouvillian(0.0, or, g1, gpd, kap);
        let rho = steady_state(&l).unwrap();
        // with bare σ± the correction carries Ω_r/Ω_r
        let expected = g1_coh_corrected(or, or, g1, gpd, kap);
        assert!((rho.coherence().norm_sqr() - expected).abs() < 1e-8 * expected);
    }

    #[test]
    fn bloch_generator_limits() {
        let rates = PureDephasingRates {
            omega_r: 0.4,
            gamma1: 0.0,
            beta: 1.0,
            gamma_pd: 0.02,
            kappa: 0.0,
            lambda_shift: 0.0,
            gamma_y: 0.0,
            gamma_z: 0.02,
            gamma2: 0.02,
            zeta: 0.4,
            decayed: true,
        };
        let bg = bloch_generator(&rates, 0.4);
        let t = 13.0;
        let a = (bg.m * t).exp() * Vector3::new(0.0, 0.0, -1.0);
        let zp = (0.4f64 * 0.4 - 0.02 * 0.02 / 4.0).sqrt();
        let expected = -(-0.02 * t / 2.0).exp() * (zp * t).cos();
        // exact solution also carries a small sine term of relative size Γ_z/ζ'
        assert!((a[2] - expected).abs() < 0.02 * 0.5 / zp);

        let with_kappa = PureDephasingRates { kappa: 0.015, ..rates };
        let ss = bloch_generator(&with_kappa, 0.4).steady_state().unwrap();
        assert!((ss[0] + 0.015 / 0.02).abs() < 1e-14);
        // ⟨σ_x⟩_t relaxes as (e^{−Γ_z t}/Γ_z)[⟨σ_x⟩₀Γ_z + κ] − κ/Γ_z
        let bg = bloch_generator(&with_kappa, 0.4);
        let x = bg.evolve(Vector3::new(0.2, 0.0, -1.0), 30.0).unwrap()[0];
        let e = (-0.02f64 * 30.0).exp() / 0.02 * (0.2 * 0.02 + 0.015) - 0.015 / 0.02;
        assert!((x - e).abs() < 1e-12);
    }

    #[test]
    fn bloch_representation_of_free_drive() {
        let l = pure_dephasing_liouvillian(0.0, 0.4, 0.0, 0.0, 0.0);
        let bg = bloch_representation(&l);
        let rates = PureDephasingRates {
            omega_r: 0.4,
            gamma1: 0.0,
            beta: 1.0,
            gamma_pd: 0.0,
            kappa: 0.0,
            lambda_shift: 0.0,
            gamma_y: 0.0,
            gamma_z: 0.0,
            gamma2: 0.0,
            zeta: 0.4,
            decayed: true,
        };
        let oracle = bloch_generator(&rates, 0.4);
        assert!((bg.m - oracle.m).abs().max() < 1e-15);
        assert!(bg.b.norm() < 1e-15);
    }

    #[test]
    fn width_formulas() {
        assert_eq!(sideband_width_detuned(1e-3, 2e-4, 0.0, 0.1), sideband_width_resonant(1e-3, 2e-4));
        assert!(sideband_width_detuned(1e-3, 2e-4, 0.05, 0.1) < sideband_width_resonant(1e-3, 2e-4));
        assert!(sideband_width_detuned(1e-3, 8e-4, 0.05, 0.1) > sideband_width_resonant(1e-3, 8e-4));
    }

    #[test]
    fn guard_rejects_variational_solutions() {
        let p0 = fig1().with_omega(2.0);
        let grid = FrequencyGrid::reference(p0.omega_c).unwrap();
        let s = crate::variational::solve_self_consistent(&p0, &grid).unwrap();
        assert!(PolaronPropagator::for_solution(&s, &p0).is_err());
        let pol = VariationalSolution::polaron(&p0, &grid).unwrap();
        assert!(PolaronPropagator::for_solution(&pol, &p0).is_ok());
    }
}
