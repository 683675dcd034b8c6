//! Emission characteristics of a laser-driven quantum-dot exciton coupled to
//! acoustic phonons.
//!
//! The model is a variational polaron master equation for a two-level
//! system. The crate computes the self-consistent variational displacement
//! F(ω), the phonon dissipator built from it, the steady state, the
//! first-order field correlation g⁽¹⁾(τ) through the quantum regression
//! theorem, its coherent / incoherent split, the incoherent (Mollow)
//! spectrum and a three-Lorentzian fit of that spectrum. Closed-form
//! pure-dephasing results live in [`oracles`] and serve as references for the
//! numerical engine.
//!
//! Conventions: ħ = 1, frequencies in ps⁻¹, times in ps, temperatures in K.
//! Density matrices are written in the basis (|0⟩, |X⟩) and vectorised by
//! stacking columns, so `vec(ρ)[r + 2c] = ρ[r, c]`.
//!
//! ```
//! use qd_emission::{pipeline, PhysicalParams};
//!
//! let params = PhysicalParams::new(0.0, 0.63, 0.027, 2.2, 4.0, 1.0 / 700.0).unwrap();
//! let point = pipeline::full_model(&params, pipeline::DetuningSpec::Resonant).unwrap();
//! let fraction = point.coherent_fraction();
//! assert!(fraction > 0.05 && fraction < 0.3);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dissipator;
pub mod dynamics;
pub mod error;
pub mod operators;
pub mod oracles;
pub mod pipeline;
pub mod quadrature;
pub mod spectrum;
pub mod units;
pub mod variational;

pub use dissipator::{BathCorrelations, CorrelationOptions, DressedDecomposition, ResponseTable};
pub use dynamics::CorrelationSeries;
pub use operators::{DensityMatrix, Superoperator};
pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use oracles::PureDephasingRates;
pub use quadrature::{FourierIntegral, FrequencyGrid};
pub use spectrum::{Peak, SpectrumSeries, TripletFit, TripletObservables};
pub use units::{PhysicalParams, K_RATIO};
pub use variational::{solve_self_consistent, SolverOptions, VariationalSolution};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
