//! Fiber attenuation catalog and the Gaussian channel that Alice and Bob estimate.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// A fiber type with its attenuation coefficient in dB/km.
#[derive(Debug, Clone, PartialEq)]
pub struct FiberSpec {
    name: String,
    attenuation: f64,
}

impl FiberSpec {
    pub fn new(name: impl Into<String>, attenuation_db_per_km: f64) -> Result<Self> {
        if !(attenuation_db_per_km > 0.0) || !attenuation_db_per_km.is_finite() {
            return Err(Error::Domain(format!(
                "fiber attenuation must be > 0 dB/km, got {attenuation_db_per_km}"
            )));
        }
        Ok(Self { name: name.into(), attenuation: attenuation_db_per_km })
    }

    /// Operator-deployed fiber, 0.275 dB/km.
    pub fn deployed() -> Self {
        Self { name: "deployed".into(), attenuation: 0.275 }
    }

    /// Standard G.652 fiber, 0.2 dB/km.
    pub fn g652() -> Self {
        Self { name: "g652".into(), attenuation: 0.2 }
    }

    /// Low-loss fiber, 0.15 dB/km.
    pub fn lowloss() -> Self {
        Self { name: "lowloss".into(), attenuation: 0.15 }
    }

    /// Hollow-core antiresonant fiber, 0.1 dB/km.
    pub fn hollowcore() -> Self {
        Self { name: "hollowcore".into(), attenuation: 0.1 }
    }

    pub fn catalog() -> [FiberSpec; 4] {
        [Self::deployed(), Self::g652(), Self::lowloss(), Self::hollowcore()]
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn attenuation(&self) -> f64 {
        self.attenuation
    }

    /// Total loss in dB over `length` km.
    pub fn loss_db(&self, length: f64) -> Result<f64> {
        if !(length >= 0.0) {
            return Err(Error::Domain(format!("fiber length must be >= 0 km, got {length}")));
        }
        Ok(self.attenuation * length)
    }

    /// `10^(−α·L/10)`.
    pub fn transmittance(&self, length: f64) -> Result<f64> {
        Ok(10f64.powf(-self.loss_db(length)? / 10.0))
    }
}

impl FromStr for FiberSpec {
    type Err = Error;

    /// Accepts a catalog name or a bare attenuation in dB/km.
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "deployed" => Ok(Self::deployed()),
            "g652" | "g.652" => Ok(Self::g652()),
            "lowloss" => Ok(Self::lowloss()),
            "hollowcore" => Ok(Self::hollowcore()),
            other => {
                let alpha: f64 = other
                    .parse()
                    .map_err(|_| Error::Config(format!("unknown fiber {s:?}")))?;
                Self::new(format!("{alpha}dB/km"), alpha)
            }
        }
    }
}

impl fmt::Display for FiberSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name)
    }
}

/// Transmittance of `length` km of `fiber`.
pub fn transmittance(fiber: &FiberSpec, length: f64) -> Result<f64> {
    fiber.transmittance(length)
}

/// Equivalent channel `(T_equ, ε_equ)` estimated by Alice and Bob.
///
/// Excess noise is referred to the channel input, so the output noise is
/// `χ = 1 − T + T·ε`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianChannelTarget {
    transmittance: f64,
    excess_noise: f64,
}

impl GaussianChannelTarget {
    pub fn new(transmittance: f64, excess_noise: f64) -> Result<Self> {
        if !(transmittance > 0.0 && transmittance <= 1.0) {
            return Err(Error::Domain(format!(
                "channel transmittance must lie in (0, 1], got {transmittance}"
            )));
        }
        if !(excess_noise >= 0.0) || !excess_noise.is_finite() {
            return Err(Error::Domain(format!("excess noise must be >= 0, got {excess_noise}")));
        }
        Ok(Self { transmittance, excess_noise })
    }

    pub fn transmittance(&self) -> f64 {
        self.transmittance
    }

    pub fn excess_noise(&self) -> f64 {
        self.excess_noise
    }

    /// Output-referred added noise `χ = 1 − T + T·ε`.
    pub fn chi(&self) -> f64 {
        1.0 - self.transmittance + self.transmittance * self.excess_noise
    }

    /// Variance `N = 1 + Tε/(1−T)` of the thermal mode an entangling cloner
    /// must inject; infinite for a noisy unit-transmittance channel.
    pub fn noise_variance(&self) -> f64 {
        let t = self.transmittance;
        if t >= 1.0 {
            return if self.excess_noise == 0.0 { 1.0 } else { f64::INFINITY };
        }
        1.0 + t * self.excess_noise / (1.0 - t)
    }
}

/// Target channel of a fiber link of `length` km at `alpha` dB/km with excess noise `epsilon`.
pub fn target_from_system(alpha: f64, length: f64, epsilon: f64) -> Result<GaussianChannelTarget> {
    let fiber = FiberSpec::new("system", alpha)?;
    GaussianChannelTarget::new(fiber.transmittance(length)?, epsilon)
}

/// Transmittances of the four fiber links around Eve's stations.
///
/// `t1`: Alice to station I; `t2`: station II to Bob; `t3`: signal link between
/// the stations; `t4`: EPR distribution link between the stations. All of the
/// environment modes are trusted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiberLosses {
    pub t1: f64,
    pub t2: f64,
    pub t3: f64,
    pub t4: f64,
}

impl FiberLosses {
    /// Eve with lossless links everywhere.
    pub const LOSSLESS: FiberLosses = FiberLosses { t1: 1.0, t2: 1.0, t3: 1.0, t4: 1.0 };

    pub fn new(t1: f64, t2: f64, t3: f64, t4: f64) -> Result<Self> {
        for (name, t) in [("T1", t1), ("T2", t2), ("T3", t3), ("T4", t4)] {
            if !(t > 0.0 && t <= 1.0) {
                return Err(Error::Domain(format!("{name} must lie in (0, 1], got {t}")));
            }
        }
        Ok(Self { t1, t2, t3, t4 })
    }

    /// Transmittance of the signal path through Eve's fibers, `T1·T2·T3`.
    pub fn signal_path(&self) -> f64 {
        self.t1 * self.t2 * self.t3
    }
}

/// Placement of Eve's two stations along the Alice-Bob link.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkGeometry {
    l1: f64,
    l2: f64,
    l_total: f64,
    eve_fiber: FiberSpec,
}

impl LinkGeometry {
    pub fn new(l1: f64, l2: f64, l_total: f64, eve_fiber: FiberSpec) -> Result<Self> {
        if !(0.0 <= l1 && l1 <= l2 && l2 <= l_total) || !l_total.is_finite() {
            return Err(Error::Domain(format!(
                "station positions must satisfy 0 <= L1 <= L2 <= L_total, got L1={l1}, L2={l2}, L_total={l_total}"
            )));
        }
        Ok(Self { l1, l2, l_total, eve_fiber })
    }

    pub fn l1(&self) -> f64 {
        self.l1
    }

    pub fn l2(&self) -> f64 {
        self.l2
    }

    pub fn l_total(&self) -> f64 {
        self.l_total
    }

    pub fn eve_fiber(&self) -> &FiberSpec {
        &self.eve_fiber
    }

    pub fn losses(&self) -> FiberLosses {
        let t = |len: f64| {
            self.eve_fiber
                .transmittance(len.max(0.0))
                .expect("non-negative length and valid fiber")
        };
        let between = t(self.l2 - self.l1);
        FiberLosses { t1: t(self.l1), t2: t(self.l_total - self.l2), t3: between, t4: between }
    }
}
