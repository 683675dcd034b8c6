//! Physical parameters, unit conventions and the acoustic-phonon spectral
//! density.
//!
//! Units throughout the crate: ħ = 1, energies and frequencies are angular
//! frequencies in ps⁻¹, times in ps, the phonon coupling α in ps², and
//! temperatures in kelvin.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Boltzmann constant over ħ in ps⁻¹ K⁻¹ (CODATA 2018:
/// 1.380649e-23 J/K ÷ 1.054571817e-34 J s = 1.309203e11 s⁻¹ K⁻¹).
pub const K_RATIO: f64 = 0.130920;

/// Experiment inputs for a single parameter point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    /// Bare laser detuning ν = ω₀ − ω_l (ps⁻¹).
    pub nu: f64,
    /// Bare Rabi frequency Ω (ps⁻¹).
    pub omega: f64,
    /// Phonon coupling strength α (ps²).
    pub alpha: f64,
    /// Phonon cutoff frequency ω_c (ps⁻¹).
    pub omega_c: f64,
    /// Bath temperature (K).
    pub temperature: f64,
    /// Spontaneous emission rate Γ₁ = 1/T₁ (ps⁻¹).
    pub gamma1: f64,
}

impl PhysicalParams {
    pub fn new(
        nu: f64,
        omega: f64,
        alpha: f64,
        omega_c: f64,
        temperature: f64,
        gamma1: f64,
    ) -> Result<Self> {
        let params = Self {
            nu,
            omega,
            alpha,
            omega_c,
            temperature,
            gamma1,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        let checks = [
            ("nu", self.nu.is_finite(), "must be finite"),
            ("omega", self.omega.is_finite() && self.omega >= 0.0, "must be >= 0"),
            ("alpha", self.alpha.is_finite() && self.alpha >= 0.0, "must be >= 0"),
            ("omega_c", self.omega_c.is_finite() && self.omega_c > 0.0, "must be > 0"),
            (
                "temperature",
                self.temperature.is_finite() && self.temperature > 0.0,
                "must be > 0",
            ),
            ("gamma1", self.gamma1.is_finite() && self.gamma1 > 0.0, "must be > 0"),
        ];
        for (name, ok, what) in checks {
            if !ok {
                return Err(Error::Domain(format!("{name} {what}")));
            }
        }
        Ok(())
    }

    /// Inverse temperature β (ps).
    pub fn beta(&self) -> f64 {
        1.0 / (K_RATIO * self.temperature)
    }

    pub fn with_omega(mut self, omega: f64) -> Self {
        self.omega = omega;
        self
    }

    pub fn with_nu(mut self, nu: f64) -> Self {
        self.nu = nu;
        self
    }

    pub fn with_temperature(mut self, temperature: f64) -> Self {
        self.temperature = temperature;
        self
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    /// Named bath and emitter preset at zero bare detuning: `fig1`
    /// (T₁ = 700 ps, T = 4 K) or `fig2` (T₁ = 400 ps, T = 10 K), both with
    /// α = 0.027 ps² and ω_c = 2.2 ps⁻¹.
    pub fn preset(name: &str, omega: f64) -> Result<Self> {
        let (t1, temperature) = match name {
            "fig1" => (700.0, 4.0),
            "fig2" => (400.0, 10.0),
            other => return Err(Error::Domain(format!("unknown preset '{other}'"))),
        };
        Self::new(0.0, omega, 0.027, 2.2, temperature, 1.0 / t1)
    }
}

/// β = 1/(K_RATIO·T).
pub fn inverse_temperature(params: &PhysicalParams) -> Result<f64> {
    if !(params.temperature > 0.0) {
        return Err(Error::Domain(format!(
            "temperature must be > 0, got {}",
            params.temperature
        )));
    }
    Ok(params.beta())
}

/// J(ω) = α ω³ exp[−(ω/ω_c)²].
pub fn spectral_density(w: f64, params: &PhysicalParams) -> Result<f64> {
    if !(w >= 0.0) {
        return Err(Error::Domain(format!(
            "spectral density needs w >= 0, got {w}"
        )));
    }
    Ok(spectral_density_unchecked(w, params.alpha, params.omega_c))
}

#[inline]
pub(crate) fn spectral_density_unchecked(w: f64, alpha: f64, omega_c: f64) -> f64 {
    let x = w / omega_c;
    alpha * w * w * w * (-x * x).exp()
}

/// coth(βω/2)/ω, even in ω. Diverges at ω = 0 (returns +∞ there).
#[inline]
pub(crate) fn coth_over_w(w: f64, beta: f64) -> f64 {
    let x = 0.5 * beta * w.abs();
    if x == 0.0 {
        return f64::INFINITY;
    }
    if x < 1e-4 {
        // coth x = 1/x + x/3 − x³/45
        let c = 1.0 / x + x / 3.0 - x * x * x / 45.0;
        return c / w.abs();
    }
    1.0 / (x.tanh() * w.abs())
}

/// ω(n(ω)+1) = ω/(1 − e^{−βω}); equals 1/β at ω = 0.
#[inline]
pub(crate) fn bose_weight(w: f64, beta: f64) -> f64 {
    let x = beta * w;
    if x.abs() < 1e-8 {
        return (1.0 + 0.5 * x) / beta;
    }
    w / (-(-x).exp_m1())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig1() -> PhysicalParams {
        PhysicalParams::new(0.0, 0.1, 0.027, 2.2, 4.0, 1.0 / 700.0).unwrap()
    }

    #[test]
    fn density_vanishes_at_zero() {
        assert_eq!(spectral_density(0.0, &fig1()).unwrap(), 0.0);
    }

    #[test]
    fn density_at_cutoff() {
        let j = spectral_density(2.2, &fig1()).unwrap();
        let expected = 0.027 * 2.2f64.powi(3) * (-1.0f64).exp();
        assert!((j - expected).abs() < 1e-15 * expected);
        // 30-digit evaluation of 0.027·2.2³/e
        assert!((j - 0.105_763_867_819_024_98).abs() < 1e-15);
    }

    #[test]
    fn zero_coupling_is_flat() {
        let p = fig1().with_alpha(0.0);
        for w in [0.0, 0.3, 2.0, 10.0] {
            assert_eq!(spectral_density(w, &p).unwrap(), 0.0);
        }
    }

    #[test]
    fn negative_frequency_rejected() {
        assert!(matches!(spectral_density(-1.0, &fig1()), Err(Error::Domain(_))));
    }

    #[test]
    fn beta_values() {
        let b4 = inverse_temperature(&fig1()).unwrap();
        assert!((b4 - 1.9096).abs() < 1e-4, "{b4}");
        let b10 = inverse_temperature(&fig1().with_temperature(10.0)).unwrap();
        assert!((b10 - 0.76382).abs() < 1e-5, "{b10}");
        let hot = inverse_temperature(&fig1().with_temperature(1e12)).unwrap();
        assert!(hot < 1e-10);
    }

    #[test]
    fn invalid_params_rejected() {
        assert!(PhysicalParams::new(0.0, 0.1, 0.027, 2.2, -1.0, 1e-3).is_err());
        assert!(PhysicalParams::new(0.0, 0.1, -0.1, 2.2, 4.0, 1e-3).is_err());
        assert!(PhysicalParams::new(0.0, 0.1, 0.027, 0.0, 4.0, 1e-3).is_err());
        assert!(PhysicalParams::new(0.0, 0.1, 0.027, 2.2, 4.0, 0.0).is_err());
        assert!(PhysicalParams::new(0.0, -0.1, 0.027, 2.2, 4.0, 1e-3).is_err());
    }

    #[test]
    fn thermal_helpers_small_argument() {
        let beta = 1.9;
        for w in [1e-12, 1e-9, 1e-6, 1e-3] {
            let coth = coth_over_w(w, beta);
            let direct = 1.0 / ((0.5 * beta * w).tanh() * w);
            assert!((coth - direct).abs() < 1e-9 * direct);
        }
        assert!((bose_weight(0.0, beta) - 1.0 / beta).abs() < 1e-15);
        let w = 0.7;
        let n = 1.0 / ((beta * w).exp() - 1.0);
        assert!((bose_weight(w, beta) - w * (n + 1.0)).abs() < 1e-14);
        assert!((bose_weight(-w, beta) - (-w) * (1.0 / ((-beta * w).exp() - 1.0) + 1.0)).abs() < 1e-14);
    }
}
