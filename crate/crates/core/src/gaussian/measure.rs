use nalgebra::{DMatrix, Matrix2};

use super::CovarianceMatrix;
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quadrature {
    X,
    P,
}

impl CovarianceMatrix {
    /// State of the remaining modes after a homodyne measurement of `mode`.
    ///
    /// The Schur complement uses the Moore-Penrose pseudo-inverse of the projected
    /// block, so a vanishing quadrature variance is not an error.
    pub fn condition_on_homodyne(&self, mode: &str, quadrature: Quadrature) -> Result<Self> {
        let m = self.mode_index(mode)?;
        let block = self.block(m, m);
        let proj = match quadrature {
            Quadrature::X => Matrix2::new(1.0, 0.0, 0.0, 0.0),
            Quadrature::P => Matrix2::new(0.0, 0.0, 0.0, 1.0),
        };
        let projected = proj * block * proj;
        let inv = projected
            .pseudo_inverse(1e-300)
            .expect("pseudo-inverse of a 2x2 matrix with non-negative tolerance");
        Ok(self.schur(m, &inv))
    }

    /// State of the remaining modes after a heterodyne (double homodyne) measurement of `mode`.
    pub fn condition_on_heterodyne(&self, mode: &str) -> Result<Self> {
        let m = self.mode_index(mode)?;
        let shifted = self.block(m, m) + Matrix2::identity();
        // physical blocks have eigenvalues >= 1 after the shift
        let inv = shifted.try_inverse().unwrap_or_else(Matrix2::zeros);
        Ok(self.schur(m, &inv))
    }

    fn schur(&self, m: usize, inv: &Matrix2<f64>) -> Self {
        let rest: Vec<usize> = (0..self.num_modes()).filter(|&k| k != m).collect();
        let reduced = self.select(&rest);
        let n = rest.len();
        let mut sigma = DMatrix::zeros(2 * n, 2);
        for (a, &k) in rest.iter().enumerate() {
            let b = self.block(k, m);
            for r in 0..2 {
                for c in 0..2 {
                    sigma[(2 * a + r, c)] = b[(r, c)];
                }
            }
        }
        let inv = DMatrix::from_fn(2, 2, |r, c| inv[(r, c)]);
        let correction = &sigma * inv * sigma.transpose();
        Self::from_parts(reduced.matrix() - correction, reduced.labels().to_vec())
    }
}
