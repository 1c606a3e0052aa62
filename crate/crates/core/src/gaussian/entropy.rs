use std::f64::consts::LN_2;

use nalgebra::DMatrix;

use super::{symplectic_form, PHYSICALITY_HARD_TOL};
use crate::error::{Error, Result};

/// Symplectic eigenvalues of a covariance matrix, in descending order.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticSpectrum {
    values: Vec<f64>,
}

impl SymplecticSpectrum {
    /// Computes the spectrum of a 2N x 2N covariance matrix.
    ///
    /// With `γ = L Lᵀ` (Cholesky), the singular values of the antisymmetric
    /// `Lᵀ Ω L` are the symplectic eigenvalues, each appearing twice.
    pub(crate) fn of(matrix: &DMatrix<f64>) -> Result<Self> {
        let n = matrix.nrows() / 2;
        let chol = matrix
            .clone()
            .cholesky()
            .ok_or_else(|| Error::Physicality("covariance matrix is not positive definite".into()))?;
        let l = chol.l();
        let k = l.transpose() * symplectic_form(n) * &l;
        let mut sv: Vec<f64> = k.singular_values().iter().copied().collect();
        sv.sort_by(|a, b| b.total_cmp(a));
        let mut values = Vec::with_capacity(n);
        for pair in sv.chunks(2) {
            let nu = 0.5 * (pair[0] + pair[1]);
            if nu < 1.0 - PHYSICALITY_HARD_TOL {
                return Err(Error::Physicality(format!("symplectic eigenvalue {nu} < 1")));
            }
            values.push(nu.max(1.0));
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Von Neumann entropy in bits, `Σ G(ν)`.
    pub fn entropy(&self) -> f64 {
        self.values.iter().map(|&nu| entropy_function(nu)).sum()
    }
}

/// `G(x) = ((x+1)/2) log2((x+1)/2) − ((x−1)/2) log2((x−1)/2)`, with `G(1) = 0`.
pub fn entropy_function(nu: f64) -> f64 {
    let h = 0.5 * (nu - 1.0);
    if h <= 0.0 {
        return 0.0;
    }
    if h < 5e-9 {
        // (1+h)ln(1+h) = h + O(h²)
        return (h - h * h.ln()) / LN_2;
    }
    ((1.0 + h) * h.ln_1p() - h * h.ln()) / LN_2
}
