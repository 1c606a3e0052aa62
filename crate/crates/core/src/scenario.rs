//! A fully specified physical scenario and its key rate.

use std::fmt;
use std::str::FromStr;

use crate::attack::limit::converge;
use crate::attack::{min_epr_variance, nla_equivalent, nla_transmittance, solve_t, EprSource};
use crate::channel::{target_from_system, FiberLosses, FiberSpec, GaussianChannelTarget, LinkGeometry};
use crate::error::{Error, Result};
use crate::keyrate::{
    limit_report, merged_cloner_rate, optimal_collective_baseline, optimize_teleport_attack,
    KeyRateReport, Protocol, SourceChoice,
};

/// Equivalent source variance above which a fixed source is evaluated as
/// an unbounded one.
pub const UNBOUNDED_VARIANCE_CAP: f64 = 1e4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AttackModel {
    /// Eve holds the full channel purification.
    Collective,
    /// Teleportation attack with the weakest admissible source.
    Individual,
    /// Teleportation attack with the configured source.
    Teleport,
    /// Single-station entangling cloner behind trusted fiber (`L1 = L2`).
    MergedCloner,
}

impl FromStr for AttackModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "collective" => Ok(Self::Collective),
            "individual" => Ok(Self::Individual),
            "teleport" | "teleportation" => Ok(Self::Teleport),
            "cloner" | "merged" => Ok(Self::MergedCloner),
            other => Err(Error::Config(format!(
                "unknown attack '{other}' (expected collective|individual|teleport|cloner)"
            ))),
        }
    }
}

impl fmt::Display for AttackModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Collective => "collective",
            Self::Individual => "individual",
            Self::Teleport => "teleport",
            Self::MergedCloner => "cloner",
        })
    }
}

/// Eve's distributed source.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SourceSpec {
    /// Equivalent source variance taken to infinity.
    Unbounded,
    /// Physical source variance, before the NLA.
    Fixed(f64),
    /// Weakest source reproducing the target.
    AtMinimum,
}

/// Two-mode squeezer gain at station I.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SqueezerGain {
    Limit,
    Fixed(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioParams {
    pub protocol: Protocol,
    pub epsilon: f64,
    /// Attenuation of the legitimate link, dB/km.
    pub alpha_system: f64,
    pub l_total: f64,
    /// Fiber available to Eve; `None` means lossless links.
    pub eve_fiber: Option<FiberSpec>,
    pub l1: f64,
    pub l2: f64,
    pub nla_gain: f64,
    pub source: SourceSpec,
    pub squeezer: SqueezerGain,
    pub model: AttackModel,
}

impl Default for ScenarioParams {
    fn default() -> Self {
        Self {
            protocol: Protocol::default(),
            epsilon: 0.04,
            alpha_system: 0.275,
            l_total: 50.0,
            eve_fiber: None,
            l1: 0.0,
            l2: 0.0,
            nla_gain: 1.0,
            source: SourceSpec::Unbounded,
            squeezer: SqueezerGain::Limit,
            model: AttackModel::Teleport,
        }
    }
}

impl ScenarioParams {
    pub fn target(&self) -> Result<GaussianChannelTarget> {
        target_from_system(self.alpha_system, self.l_total, self.epsilon)
    }

    pub fn losses(&self) -> Result<FiberLosses> {
        match &self.eve_fiber {
            None => Ok(FiberLosses::LOSSLESS),
            Some(fiber) => Ok(LinkGeometry::new(self.l1, self.l2, self.l_total, fiber.clone())?.losses()),
        }
    }

    /// Key rate of this scenario; limits are evaluated with the converged
    /// protocol of [`crate::attack::limit`].
    pub fn evaluate(&self) -> Result<KeyRateReport> {
        self.protocol.validate()?;
        if !(self.nla_gain >= 1.0) {
            return Err(Error::Domain(format!("NLA gain must be >= 1, got {}", self.nla_gain)));
        }
        let target = self.target()?;
        let losses = self.losses()?;
        match self.model {
            AttackModel::Collective => optimal_collective_baseline(&target, &self.protocol),
            AttackModel::MergedCloner => {
                if self.eve_fiber.is_some() && self.l1 != self.l2 {
                    return Err(Error::Domain("a merged station needs L1 = L2".into()));
                }
                merged_cloner_rate(&target, &self.protocol, &losses)
            }
            AttackModel::Individual => self.teleport(&target, &losses, SourceSpec::AtMinimum),
            AttackModel::Teleport => self.teleport(&target, &losses, self.source),
        }
    }

    /// Smallest equivalent source variance reproducing the target in the
    /// `g → ∞` limit, extrapolated like the key rate.
    pub fn min_source_variance(&self) -> Result<f64> {
        let target = self.target()?;
        let losses = self.losses()?;
        let eff_losses = FiberLosses { t4: nla_transmittance(losses.t4, self.nla_gain)?, ..losses };
        let est = converge(|g| {
            let t = solve_t(&target, g, &losses)?;
            Ok((min_epr_variance(&target, g, t, &eff_losses)?.variance(), ()))
        })?;
        Ok(est.value)
    }

    fn teleport(
        &self,
        target: &GaussianChannelTarget,
        losses: &FiberLosses,
        source: SourceSpec,
    ) -> Result<KeyRateReport> {
        let source = match source {
            SourceSpec::Fixed(v) => {
                let (eff, _) = nla_equivalent(&EprSource::from_variance(v)?, losses.t4, self.nla_gain)?;
                if eff.variance() > UNBOUNDED_VARIANCE_CAP {
                    SourceSpec::Unbounded
                } else {
                    SourceSpec::Fixed(v)
                }
            }
            other => other,
        };
        let level = |k: f64| {
            let g = match self.squeezer {
                SqueezerGain::Limit => k,
                SqueezerGain::Fixed(g) => g,
            };
            let choice = match source {
                SourceSpec::Unbounded => SourceChoice::Equivalent(k),
                SourceSpec::Fixed(v) => SourceChoice::Physical(v),
                SourceSpec::AtMinimum => SourceChoice::Minimum,
            };
            optimize_teleport_attack(target, &self.protocol, g, choice, losses, self.nla_gain)
        };
        let varies = matches!(self.squeezer, SqueezerGain::Limit) || source == SourceSpec::Unbounded;
        if varies {
            Ok(limit_report(level)?.0)
        } else {
            level(1.0)
        }
    }
}
