use nalgebra::{DMatrix, Matrix2};

use super::{get_block, set_block, sigma_z, SymplecticSpectrum, SymplecticTransform, PHYSICALITY_TOL};
use crate::error::{Error, Result};

/// Covariance matrix of a zero-mean Gaussian state over a labelled mode register.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix {
    matrix: DMatrix<f64>,
    labels: Vec<String>,
}

impl CovarianceMatrix {
    /// Validates shape, labels, symmetry (1e-10 relative) and physicality.
    pub fn new(matrix: DMatrix<f64>, labels: Vec<String>) -> Result<Self> {
        let n = matrix.nrows();
        if n != matrix.ncols() || n == 0 || !n.is_multiple_of(2) {
            return Err(Error::Domain(format!(
                "covariance matrix must be 2N x 2N, got {}x{}",
                n,
                matrix.ncols()
            )));
        }
        if labels.len() != n / 2 {
            return Err(Error::Dimension { expected: n / 2, got: labels.len() });
        }
        check_unique(&labels)?;
        let scale = matrix.amax().max(1.0);
        let asym = (&matrix - matrix.transpose()).amax();
        if asym > 1e-10 * scale {
            return Err(Error::Domain(format!("covariance matrix not symmetric ({asym:e})")));
        }
        let state = Self::from_parts(matrix, labels);
        let spectrum = state.symplectic_eigenvalues()?;
        if spectrum.min() < 1.0 - PHYSICALITY_TOL {
            return Err(Error::Physicality(format!(
                "symplectic eigenvalue {} below 1",
                spectrum.min()
            )));
        }
        Ok(state)
    }

    /// Internal constructor for results of operations that preserve validity.
    /// Symmetrizes to wash out rounding.
    pub(crate) fn from_parts(matrix: DMatrix<f64>, labels: Vec<String>) -> Self {
        let matrix = (&matrix + matrix.transpose()) * 0.5;
        Self { matrix, labels }
    }

    pub fn vacuum(label: impl Into<String>) -> Self {
        Self { matrix: DMatrix::identity(2, 2), labels: vec![label.into()] }
    }

    pub fn thermal(variance: f64, label: impl Into<String>) -> Result<Self> {
        if !(variance >= 1.0) || !variance.is_finite() {
            return Err(Error::Domain(format!("thermal variance must be >= 1, got {variance}")));
        }
        Ok(Self { matrix: DMatrix::identity(2, 2) * variance, labels: vec![label.into()] })
    }

    /// Two-mode squeezed vacuum with marginal variance `variance`.
    pub fn epr_state(variance: f64, labels: [&str; 2]) -> Result<Self> {
        if !(variance >= 1.0) || !variance.is_finite() {
            return Err(Error::Domain(format!("EPR variance must be >= 1, got {variance}")));
        }
        let labels: Vec<String> = labels.iter().map(|s| s.to_string()).collect();
        check_unique(&labels)?;
        let diag = Matrix2::identity() * variance;
        let corr = sigma_z() * (variance * variance - 1.0).sqrt();
        let mut m = DMatrix::zeros(4, 4);
        set_block(&mut m, 0, 0, &diag);
        set_block(&mut m, 0, 1, &corr);
        set_block(&mut m, 1, 0, &corr);
        set_block(&mut m, 1, 1, &diag);
        Ok(Self { matrix: m, labels })
    }

    pub fn num_modes(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn mode_index(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::Index(format!("no mode labelled {label:?}")))
    }

    /// 2x2 block between modes `i` and `j`.
    pub fn block(&self, i: usize, j: usize) -> Matrix2<f64> {
        get_block(&self.matrix, i, j)
    }

    /// 2x2 block between two labelled modes.
    pub fn block_of(&self, a: &str, b: &str) -> Result<Matrix2<f64>> {
        Ok(self.block(self.mode_index(a)?, self.mode_index(b)?))
    }

    /// Direct sum `self ⊕ other`.
    pub fn tensor(&self, other: &CovarianceMatrix) -> Result<Self> {
        let mut labels = self.labels.clone();
        labels.extend(other.labels.iter().cloned());
        check_unique(&labels)?;
        let (n, m) = (self.matrix.nrows(), other.matrix.nrows());
        let mut out = DMatrix::zeros(n + m, n + m);
        out.view_mut((0, 0), (n, n)).copy_from(&self.matrix);
        out.view_mut((n, n), (m, m)).copy_from(&other.matrix);
        Ok(Self { matrix: out, labels })
    }

    /// Reduced state on `keep`, in the order given.
    pub fn partial_trace(&self, keep: &[&str]) -> Result<Self> {
        if keep.is_empty() {
            return Err(Error::Domain("partial trace must keep at least one mode".into()));
        }
        let idx = keep.iter().map(|l| self.mode_index(l)).collect::<Result<Vec<_>>>()?;
        for (k, i) in idx.iter().enumerate() {
            if idx[..k].contains(i) {
                return Err(Error::Index(format!("mode {:?} kept twice", keep[k])));
            }
        }
        Ok(self.select(&idx))
    }

    pub(crate) fn select(&self, idx: &[usize]) -> Self {
        let mut out = DMatrix::zeros(2 * idx.len(), 2 * idx.len());
        for (a, &i) in idx.iter().enumerate() {
            for (b, &j) in idx.iter().enumerate() {
                set_block(&mut out, a, b, &self.block(i, j));
            }
        }
        let labels = idx.iter().map(|&i| self.labels[i].clone()).collect();
        Self { matrix: out, labels }
    }

    pub fn relabel(mut self, from: &str, to: &str) -> Result<Self> {
        let i = self.mode_index(from)?;
        if from != to && self.labels.iter().any(|l| l == to) {
            return Err(Error::Index(format!("label {to:?} already in use")));
        }
        self.labels[i] = to.to_string();
        Ok(self)
    }

    /// Applies a local transform acting on the labelled `modes`, in order.
    pub fn transform(&self, local: &SymplecticTransform, modes: &[&str]) -> Result<Self> {
        let idx = modes.iter().map(|l| self.mode_index(l)).collect::<Result<Vec<_>>>()?;
        local.embed(&idx, self.num_modes())?.apply(self)
    }

    pub fn symplectic_eigenvalues(&self) -> Result<SymplecticSpectrum> {
        SymplecticSpectrum::of(&self.matrix)
    }

    /// Von Neumann entropy in bits.
    pub fn von_neumann_entropy(&self) -> Result<f64> {
        Ok(self.symplectic_eigenvalues()?.entropy())
    }
}

fn check_unique(labels: &[String]) -> Result<()> {
    for (k, l) in labels.iter().enumerate() {
        if labels[..k].contains(l) {
            return Err(Error::Index(format!("duplicate mode label {l:?}")));
        }
    }
    Ok(())
}
