//! Two-level operators, column-stacking vectorisation and superoperators.
//!
//! Basis order is (|0⟩, |X⟩). With σ_z = diag(−1, 1) the excited state has
//! σ_z = +1, σ₊ = |X⟩⟨0| and σ₋ = |0⟩⟨X|. A 2×2 matrix ρ maps to the
//! 4-vector `vec(ρ)[r + 2c] = ρ[r, c]`.

use nalgebra::{Matrix2, Matrix4, Vector4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Mat2 = Matrix2<Complex64>;
pub type Mat4 = Matrix4<Complex64>;
pub type Vec4 = Vector4<Complex64>;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

pub fn identity() -> Mat2 {
    Mat2::identity()
}

pub fn sigma_x() -> Mat2 {
    Mat2::new(ZERO, ONE, ONE, ZERO)
}

pub fn sigma_y() -> Mat2 {
    Mat2::new(ZERO, I, -I, ZERO)
}

pub fn sigma_z() -> Mat2 {
    Mat2::new(-ONE, ZERO, ZERO, ONE)
}

/// σ₊ = |X⟩⟨0|.
pub fn sigma_plus() -> Mat2 {
    Mat2::new(ZERO, ZERO, ONE, ZERO)
}

/// σ₋ = |0⟩⟨X|.
pub fn sigma_minus() -> Mat2 {
    Mat2::new(ZERO, ONE, ZERO, ZERO)
}

/// |X⟩⟨X| = (I + σ_z)/2.
pub fn excited_projector() -> Mat2 {
    Mat2::new(ZERO, ZERO, ZERO, ONE)
}

/// Real scalar as a complex number.
#[inline]
pub fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Largest |m_ij|.
pub fn max_abs<R, C, S>(m: &nalgebra::Matrix<Complex64, R, C, S>) -> f64
where
    R: nalgebra::Dim,
    C: nalgebra::Dim,
    S: nalgebra::RawStorage<Complex64, R, C>,
{
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn vectorize(m: &Mat2) -> Vec4 {
    Vec4::from_column_slice(m.as_slice())
}

pub fn unvectorize(v: &Vec4) -> Mat2 {
    Mat2::from_column_slice(v.as_slice())
}

pub fn commutator(a: &Mat2, b: &Mat2) -> Mat2 {
    a * b - b * a
}

pub fn anticommutator(a: &Mat2, b: &Mat2) -> Mat2 {
    a * b + b * a
}

/// Matrix of a linear map on 2×2 matrices, built column by column from the
/// images of the basis matrices.
pub fn superoperator_from_map<F>(f: F) -> Mat4
where
    F: Fn(&Mat2) -> Mat2,
{
    let mut out = Mat4::zeros();
    for k in 0..4 {
        let mut e = Vec4::zeros();
        e[k] = ONE;
        let image = vectorize(&f(&unvectorize(&e)));
        out.set_column(k, &image);
    }
    out
}

/// Linear generator on vectorised density matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct Superoperator {
    pub matrix: Mat4,
}

impl Superoperator {
    pub fn zero() -> Self {
        Self {
            matrix: Mat4::zeros(),
        }
    }

    pub fn from_map<F>(f: F) -> Self
    where
        F: Fn(&Mat2) -> Mat2,
    {
        Self {
            matrix: superoperator_from_map(f),
        }
    }

    /// ρ ↦ −i[H, ρ].
    pub fn hamiltonian(h: &Mat2) -> Self {
        let h = *h;
        Self::from_map(move |r| -(commutator(&h, r)) * I)
    }

    /// ρ ↦ rate·(cρc† − ½{c†c, ρ}).
    pub fn lindblad(c: &Mat2, rate: f64) -> Self {
        let c = *c;
        let cd = c.adjoint();
        let cdc = cd * c;
        Self::from_map(move |r| (c * r * cd - (cdc * r + r * cdc) * re(0.5)) * re(rate))
    }

    pub fn apply(&self, rho: &Mat2) -> Mat2 {
        unvectorize(&(self.matrix * vectorize(rho)))
    }

    /// Largest |Tr L(E_k)| over the four basis matrices.
    pub fn trace_defect(&self) -> f64 {
        (0..4)
            .map(|k| (self.matrix[(0, k)] + self.matrix[(3, k)]).norm())
            .fold(0.0, f64::max)
    }
}

impl std::ops::Add for Superoperator {
    type Output = Superoperator;
    fn add(self, rhs: Self) -> Self {
        Self {
            matrix: self.matrix + rhs.matrix,
        }
    }
}

/// A validated two-level density matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix {
    matrix: Mat2,
}

/// Serialisable view of a density matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityRecord {
    pub rho_00: f64,
    pub rho_xx: f64,
    pub rho_0x_re: f64,
    pub rho_0x_im: f64,
}

impl DensityMatrix {
    /// Checks Hermiticity and unit trace to 1e-12 and eigenvalues ≥ −1e-10.
    pub fn new(matrix: Mat2) -> Result<Self> {
        let herm = max_abs(&(matrix - matrix.adjoint()));
        if herm > 1e-12 {
            return Err(Error::Contract(format!("density matrix not Hermitian ({herm:e})")));
        }
        let tr = matrix.trace();
        if (tr - ONE).norm() > 1e-12 {
            return Err(Error::Contract(format!("density matrix trace {tr}")));
        }
        let rho = Self { matrix };
        let lo = rho.eigenvalues()[0];
        if lo < -1e-10 {
            return Err(Error::Contract(format!("negative eigenvalue {lo:e}")));
        }
        Ok(rho)
    }

    pub fn ground() -> Self {
        Self {
            matrix: Mat2::new(ONE, ZERO, ZERO, ZERO),
        }
    }

    pub fn matrix(&self) -> &Mat2 {
        &self.matrix
    }

    pub fn excited_population(&self) -> f64 {
        self.matrix[(1, 1)].re
    }

    pub fn ground_population(&self) -> f64 {
        self.matrix[(0, 0)].re
    }

    /// ρ₀X = ⟨0|ρ|X⟩.
    pub fn coherence(&self) -> Complex64 {
        self.matrix[(0, 1)]
    }

    /// Bloch vector (⟨σ_x⟩, ⟨σ_y⟩, ⟨σ_z⟩).
    pub fn bloch(&self) -> [f64; 3] {
        [
            (sigma_x() * self.matrix).trace().re,
            (sigma_y() * self.matrix).trace().re,
            (sigma_z() * self.matrix).trace().re,
        ]
    }

    /// Eigenvalues in increasing order.
    pub fn eigenvalues(&self) -> [f64; 2] {
        let a = self.matrix[(0, 0)].re;
        let d = self.matrix[(1, 1)].re;
        let b = self.matrix[(0, 1)].norm();
        let mean = 0.5 * (a + d);
        let r = (0.25 * (a - d) * (a - d) + b * b).sqrt();
        [mean - r, mean + r]
    }

    pub fn record(&self) -> DensityRecord {
        DensityRecord {
            rho_00: self.ground_population(),
            rho_xx: self.excited_population(),
            rho_0x_re: self.coherence().re,
            rho_0x_im: self.coherence().im,
        }
    }
}
