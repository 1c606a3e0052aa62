//! Eve's teleportation-based attack: parameter solving against a target
//! channel, NLA-assisted distillation, and construction of the joint state.

pub mod limit;
mod nla;
mod pipeline;
mod solve;

pub use nla::{max_gain, min_gain, nla_equivalent, nla_transmittance, source_before_nla};
pub use pipeline::{
    build_state, build_state_stages, entangling_cloner_state, AttackStateBundle, ClonerSpec,
};
pub use solve::{
    feasible_eta_interval, golden_section_max, min_epr_variance, min_squeezing_closed_form,
    solve_eta_vphi, solve_t, v_phi_for, NoiseModel,
};

use crate::channel::FiberLosses;
use crate::error::{Error, Result};

/// A two-mode squeezed vacuum, parameterized by squeezing `γ ∈ [0, 1)`
/// with marginal variance `V = (1 + γ²)/(1 − γ²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EprSource {
    squeezing: f64,
    variance: f64,
}

impl EprSource {
    pub fn from_squeezing(squeezing: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&squeezing) {
            return Err(Error::Domain(format!("squeezing must lie in [0, 1), got {squeezing}")));
        }
        let g2 = squeezing * squeezing;
        Ok(Self { squeezing, variance: (1.0 + g2) / (1.0 - g2) })
    }

    pub fn from_variance(variance: f64) -> Result<Self> {
        if !(variance >= 1.0) || !variance.is_finite() {
            return Err(Error::Domain(format!("EPR variance must be finite and >= 1, got {variance}")));
        }
        let squeezing = ((variance - 1.0) / (variance + 1.0)).sqrt();
        Ok(Self { squeezing, variance })
    }

    pub fn squeezing(&self) -> f64 {
        self.squeezing
    }

    pub fn variance(&self) -> f64 {
        self.variance
    }
}

/// Full parameterization of Eve's apparatus.
///
/// `v_rho` and `losses.t4` describe the physical source and distribution
/// link; with an NLA gain above 1 the pipeline runs on the equivalent
/// distilled pair returned by [`AttackConfig::effective_source`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttackConfig {
    /// Two-mode squeezer gain `g ≥ 1` at station I.
    pub g: f64,
    /// Transmittance of the beamsplitter combining the signal at station II.
    pub t: f64,
    /// Transmittance of the beamsplitter mixing the distributed EPR arm with `φ_E`.
    pub eta: f64,
    /// Variance of the distributed source `ρ_E`.
    pub v_rho: f64,
    /// Variance of the noise source `φ_E`.
    pub v_phi: f64,
    pub losses: FiberLosses,
    /// NLA gain on the distributed arm; 1 means no amplifier.
    pub nla_gain: f64,
}

impl AttackConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.g >= 1.0) {
            return Err(Error::Domain(format!("g must be >= 1, got {}", self.g)));
        }
        if !(0.0..=1.0).contains(&self.t) {
            return Err(Error::Domain(format!("t must lie in [0, 1], got {}", self.t)));
        }
        if !(0.0..=1.0).contains(&self.eta) {
            return Err(Error::Domain(format!("eta must lie in [0, 1], got {}", self.eta)));
        }
        if !(self.v_rho >= 1.0) || !(self.v_phi >= 1.0) {
            return Err(Error::Domain("EPR variances must be >= 1".into()));
        }
        if !(self.nla_gain >= 1.0) {
            return Err(Error::Domain(format!("NLA gain must be >= 1, got {}", self.nla_gain)));
        }
        FiberLosses::new(self.losses.t1, self.losses.t2, self.losses.t3, self.losses.t4)?;
        Ok(())
    }

    /// Source and distribution transmittance after folding in the NLA.
    pub fn effective_source(&self) -> Result<(EprSource, f64)> {
        nla_equivalent(&EprSource::from_variance(self.v_rho)?, self.losses.t4, self.nla_gain)
    }

    /// Fiber losses with `t4` replaced by its NLA equivalent.
    pub fn effective_losses(&self) -> Result<FiberLosses> {
        let (_, t4) = self.effective_source()?;
        Ok(FiberLosses { t4, ..self.losses })
    }
}
