//! Zero-mean Gaussian states in the covariance-matrix picture.
//!
//! Conventions used throughout the crate:
//! - quadratures are ordered `(x1, p1, x2, p2, ...)`;
//! - variances are in shot-noise units, so the vacuum is the identity;
//! - the symplectic form is `Ω = ⊕ [[0, 1], [-1, 0]]`.

mod entropy;
mod measure;
mod state;
mod transform;

pub use entropy::{entropy_function, SymplecticSpectrum};
pub use measure::Quadrature;
pub use state::CovarianceMatrix;
pub use transform::SymplecticTransform;

use nalgebra::{DMatrix, Matrix2};

/// Entry-wise tolerance for the symplectic condition `SΩSᵀ = Ω`.
pub const SYMPLECTIC_TOL: f64 = 1e-10;
/// Symplectic eigenvalues within this distance below 1 are clamped to 1.
pub const PHYSICALITY_TOL: f64 = 1e-9;
/// Symplectic eigenvalues further than this below 1 are rejected outright.
pub const PHYSICALITY_HARD_TOL: f64 = 1e-6;

pub(crate) fn sigma_z() -> Matrix2<f64> {
    Matrix2::new(1.0, 0.0, 0.0, -1.0)
}

/// The symplectic form on `modes` modes.
pub fn symplectic_form(modes: usize) -> DMatrix<f64> {
    let mut omega = DMatrix::zeros(2 * modes, 2 * modes);
    for k in 0..modes {
        omega[(2 * k, 2 * k + 1)] = 1.0;
        omega[(2 * k + 1, 2 * k)] = -1.0;
    }
    omega
}

pub(crate) fn set_block(m: &mut DMatrix<f64>, i: usize, j: usize, block: &Matrix2<f64>) {
    for r in 0..2 {
        for c in 0..2 {
            m[(2 * i + r, 2 * j + c)] = block[(r, c)];
        }
    }
}

pub(crate) fn get_block(m: &DMatrix<f64>, i: usize, j: usize) -> Matrix2<f64> {
    Matrix2::new(
        m[(2 * i, 2 * j)],
        m[(2 * i, 2 * j + 1)],
        m[(2 * i + 1, 2 * j)],
        m[(2 * i + 1, 2 * j + 1)],
    )
}
