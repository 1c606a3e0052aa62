use nalgebra::{DMatrix, Matrix2};

use super::{get_block, set_block, sigma_z, symplectic_form, CovarianceMatrix, SYMPLECTIC_TOL};
use crate::error::{Error, Result};

/// A linear map on quadratures that preserves the canonical commutation relations.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticTransform {
    matrix: DMatrix<f64>,
}

impl SymplecticTransform {
    /// Wraps `matrix`, rejecting anything that is not symplectic within [`SYMPLECTIC_TOL`].
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() || !matrix.nrows().is_multiple_of(2) || matrix.nrows() == 0 {
            return Err(Error::Domain(format!(
                "symplectic matrix must be 2N x 2N, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let s = Self { matrix };
        let residual = s.symplectic_residual();
        if residual >= SYMPLECTIC_TOL {
            return Err(Error::Domain(format!(
                "matrix is not symplectic (max residual {residual:e})"
            )));
        }
        Ok(s)
    }

    pub fn identity(modes: usize) -> Self {
        Self { matrix: DMatrix::identity(2 * modes, 2 * modes) }
    }

    /// Two-mode amplifier: diagonal blocks `√g·I`, off-diagonal blocks `√(g−1)·σz`.
    pub fn two_mode_squeezer(gain: f64) -> Result<Self> {
        if !(gain >= 1.0) || !gain.is_finite() {
            return Err(Error::Domain(format!("squeezer gain must be >= 1, got {gain}")));
        }
        let diag = Matrix2::identity() * gain.sqrt();
        let off = sigma_z() * (gain - 1.0).sqrt();
        Ok(Self::from_blocks(&diag, &off, &off, &diag))
    }

    /// Beamsplitter with the given transmittance.
    ///
    /// Output 1 is `√t·in1 − √(1−t)·in2`, output 2 is `√(1−t)·in1 + √t·in2`.
    pub fn beamsplitter(transmittance: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&transmittance) {
            return Err(Error::Domain(format!(
                "beamsplitter transmittance must lie in [0, 1], got {transmittance}"
            )));
        }
        let a = Matrix2::identity() * transmittance.sqrt();
        let b = Matrix2::identity() * (1.0 - transmittance).sqrt();
        Ok(Self::from_blocks(&a, &(-b), &b, &a))
    }

    /// π phase shift on a single mode (`x → −x`, `p → −p`).
    pub fn phase_flip() -> Self {
        Self { matrix: -DMatrix::identity(2, 2) }
    }

    fn from_blocks(a: &Matrix2<f64>, b: &Matrix2<f64>, c: &Matrix2<f64>, d: &Matrix2<f64>) -> Self {
        let mut m = DMatrix::zeros(4, 4);
        set_block(&mut m, 0, 0, a);
        set_block(&mut m, 0, 1, b);
        set_block(&mut m, 1, 0, c);
        set_block(&mut m, 1, 1, d);
        Self { matrix: m }
    }

    pub fn num_modes(&self) -> usize {
        self.matrix.nrows() / 2
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// `max |SΩSᵀ − Ω|`.
    pub fn symplectic_residual(&self) -> f64 {
        let omega = symplectic_form(self.num_modes());
        let lhs = &self.matrix * &omega * self.matrix.transpose();
        (lhs - omega).amax()
    }

    /// Lifts `self` to a `total_modes` register, acting on `targets` (in order)
    /// and as the identity elsewhere.
    pub fn embed(&self, targets: &[usize], total_modes: usize) -> Result<Self> {
        if targets.len() != self.num_modes() {
            return Err(Error::Index(format!(
                "transform acts on {} modes but {} targets were given",
                self.num_modes(),
                targets.len()
            )));
        }
        for (k, &t) in targets.iter().enumerate() {
            if t >= total_modes {
                return Err(Error::Index(format!("mode {t} out of range for {total_modes} modes")));
            }
            if targets[..k].contains(&t) {
                return Err(Error::Index(format!("mode {t} targeted twice")));
            }
        }
        let mut m = DMatrix::identity(2 * total_modes, 2 * total_modes);
        for &t in targets {
            set_block(&mut m, t, t, &Matrix2::zeros());
        }
        for (i, &ti) in targets.iter().enumerate() {
            for (j, &tj) in targets.iter().enumerate() {
                set_block(&mut m, ti, tj, &get_block(&self.matrix, i, j));
            }
        }
        Ok(Self { matrix: m })
    }

    /// Transform applying `self` first and then `next`.
    pub fn then(&self, next: &SymplecticTransform) -> Result<Self> {
        if next.num_modes() != self.num_modes() {
            return Err(Error::Dimension { expected: self.num_modes(), got: next.num_modes() });
        }
        Ok(Self { matrix: &next.matrix * &self.matrix })
    }

    /// `S γ Sᵀ`.
    pub fn apply(&self, state: &CovarianceMatrix) -> Result<CovarianceMatrix> {
        if state.num_modes() != self.num_modes() {
            return Err(Error::Dimension { expected: self.num_modes(), got: state.num_modes() });
        }
        let out = &self.matrix * state.matrix() * self.matrix.transpose();
        Ok(CovarianceMatrix::from_parts(out, state.labels().to_vec()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_gain_squeezer_is_identity() {
        let s = SymplecticTransform::two_mode_squeezer(1.0).unwrap();
        assert_eq!(s, SymplecticTransform::identity(2));
    }

    #[test]
    fn squeezer_gain_two() {
        let s = SymplecticTransform::two_mode_squeezer(2.0).unwrap();
        let m = s.matrix();
        assert!((m[(0, 0)] - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(m[(0, 2)], 1.0);
        assert_eq!(m[(1, 3)], -1.0);
        // direct product: row 0 of SΩSᵀ = [0, g - (g-1), 0, √g√(g-1) - √(g-1)√g]
        assert!(s.symplectic_residual() < 1e-15);
    }

    #[test]
    fn squeezer_rejects_sub_unit_gain() {
        assert!(matches!(SymplecticTransform::two_mode_squeezer(0.9), Err(Error::Domain(_))));
        assert!(SymplecticTransform::two_mode_squeezer(f64::NAN).is_err());
    }

    #[test]
    fn beamsplitter_limits() {
        assert_eq!(SymplecticTransform::beamsplitter(1.0).unwrap(), SymplecticTransform::identity(2));
        let swap = SymplecticTransform::beamsplitter(0.0).unwrap();
        let m = swap.matrix();
        for k in 0..2 {
            assert_eq!(m[(k, k)], 0.0);
            assert_eq!(m[(k, k + 2)].abs(), 1.0);
            assert_eq!(m[(k + 2, k)].abs(), 1.0);
        }
        assert!(matches!(SymplecticTransform::beamsplitter(1.2), Err(Error::Domain(_))));
        assert!(SymplecticTransform::beamsplitter(-0.1).is_err());
    }

    #[test]
    fn beamsplitter_splits_thermal_light() {
        let thermal = CovarianceMatrix::thermal(3.0, "a").unwrap();
        let input = thermal.tensor(&CovarianceMatrix::vacuum("b")).unwrap();
        let out = SymplecticTransform::beamsplitter(0.5).unwrap().apply(&input).unwrap();
        for k in 0..4 {
            assert!((out.matrix()[(k, k)] - 2.0).abs() < 1e-14);
        }
    }

    #[test]
    fn non_symplectic_matrix_rejected() {
        let mut m = DMatrix::identity(4, 4);
        m[(0, 0)] = 2.0;
        assert!(SymplecticTransform::new(m).is_err());
    }

    #[test]
    fn embed_checks_indices() {
        let bs = SymplecticTransform::beamsplitter(0.3).unwrap();
        assert!(matches!(bs.embed(&[1, 1], 3), Err(Error::Index(_))));
        assert!(matches!(bs.embed(&[0, 3], 3), Err(Error::Index(_))));
        assert!(matches!(bs.embed(&[0], 3), Err(Error::Index(_))));
        let id = SymplecticTransform::identity(2).embed(&[2, 0], 3).unwrap();
        assert_eq!(id, SymplecticTransform::identity(3));
    }

    #[test]
    fn embedded_transform_leaves_spectator_block() {
        let g1 = CovarianceMatrix::thermal(2.5, "a").unwrap();
        let g2 = CovarianceMatrix::thermal(4.0, "b").unwrap();
        let g3 = CovarianceMatrix::vacuum("c");
        let state = g1.tensor(&g2).unwrap().tensor(&g3).unwrap();
        let s = SymplecticTransform::beamsplitter(0.3).unwrap().embed(&[1, 2], 3).unwrap();
        let out = s.apply(&state).unwrap();
        assert_eq!(out.block(0, 0), state.block(0, 0));
        assert!(s.symplectic_residual() < 1e-15);
    }

    #[test]
    fn apply_checks_dimension() {
        let s = SymplecticTransform::identity(3);
        let state = CovarianceMatrix::vacuum("a");
        assert_eq!(s.apply(&state), Err(Error::Dimension { expected: 3, got: 1 }));
    }
}
