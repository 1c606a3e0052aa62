//! Mutual information, Holevo bound and Devetak–Winter key rate.

use std::fmt;
use std::str::FromStr;

use crate::attack::limit::{converge, LimitEstimate};
use crate::attack::{
    build_state, entangling_cloner_state, min_epr_variance, nla_equivalent, nla_transmittance,
    solve_eta_vphi, solve_t, source_before_nla, AttackConfig, AttackStateBundle, ClonerSpec,
    EprSource, NoiseModel,
};
use crate::channel::{FiberLosses, GaussianChannelTarget};
use crate::error::{Error, Result};
use crate::gaussian::Quadrature;

/// Bob's measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Detection {
    Homodyne,
    Heterodyne,
}

/// Whose data the key is distilled from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Reconciliation {
    /// Alice's data; Eve is conditioned on Alice's heterodyne.
    Direct,
    /// Bob's data; Eve is conditioned on Bob's measurement.
    Reverse,
}

impl FromStr for Detection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "hom" | "homodyne" => Ok(Self::Homodyne),
            "het" | "heterodyne" => Ok(Self::Heterodyne),
            other => Err(Error::Config(format!("unknown detection '{other}' (expected hom|het)"))),
        }
    }
}

impl fmt::Display for Detection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Homodyne => "homodyne",
            Self::Heterodyne => "heterodyne",
        })
    }
}

impl FromStr for Reconciliation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "rr" | "reverse" => Ok(Self::Reverse),
            "dr" | "direct" => Ok(Self::Direct),
            other => Err(Error::Config(format!("unknown direction '{other}' (expected rr|dr)"))),
        }
    }
}

impl fmt::Display for Reconciliation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Direct => "direct",
            Self::Reverse => "reverse",
        })
    }
}

/// Protocol parameters shared by every rate evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Protocol {
    /// Alice's modulation variance; the EPR variance is `V_A + 1`.
    pub v_a: f64,
    /// Reconciliation efficiency.
    pub beta: f64,
    pub detection: Detection,
    pub reconciliation: Reconciliation,
}

impl Default for Protocol {
    fn default() -> Self {
        Self { v_a: 4.0, beta: 0.96, detection: Detection::Homodyne, reconciliation: Reconciliation::Reverse }
    }
}

impl Protocol {
    pub fn validate(&self) -> Result<()> {
        if !(self.v_a > 0.0) || !self.v_a.is_finite() {
            return Err(Error::Domain(format!("modulation variance must be positive, got {}", self.v_a)));
        }
        if !(self.beta > 0.0 && self.beta <= 1.0) {
            return Err(Error::Domain(format!("beta must lie in (0, 1], got {}", self.beta)));
        }
        Ok(())
    }
}

/// Result of one key-rate evaluation, in bits per channel use.
#[derive(Debug, Clone, PartialEq)]
pub struct KeyRateReport {
    pub mutual_information: f64,
    pub holevo: f64,
    /// `β·I_ab − χ_E`, possibly negative.
    pub rate_raw: f64,
    pub beta: f64,
    pub detection: Detection,
    pub reconciliation: Reconciliation,
    /// Attack parameters that produced this rate, when an attack was solved.
    pub config: Option<AttackConfig>,
}

impl KeyRateReport {
    /// Key rate clipped at zero.
    pub fn rate(&self) -> f64 {
        self.rate_raw.max(0.0)
    }

    /// Replaces the rate by a limit estimate, keeping `rate = β·I − χ`.
    fn with_rate(mut self, rate_raw: f64) -> Self {
        self.rate_raw = rate_raw;
        self.holevo = self.beta * self.mutual_information - rate_raw;
        self
    }
}

fn checked_log2_ratio(num: f64, den: f64) -> Result<f64> {
    if !(den > 0.0) || !(num > 0.0) {
        return Err(Error::Physicality(format!("non-positive variance in mutual information ({num}, {den})")));
    }
    Ok((num / den).log2())
}

/// Alice–Bob mutual information, with Alice heterodyning her EPR half.
pub fn mutual_information(bundle: &AttackStateBundle, detection: Detection) -> Result<f64> {
    let ab = bundle.reduced_ab()?;
    let v_b = ab.block_of(bundle.bob(), bundle.bob())?[(0, 0)];
    let cond = ab.condition_on_heterodyne(bundle.alice())?;
    let v_cond = cond.matrix()[(0, 0)];
    match detection {
        Detection::Homodyne => Ok(0.5 * checked_log2_ratio(v_b, v_cond)?),
        Detection::Heterodyne => checked_log2_ratio(v_b + 1.0, v_cond + 1.0),
    }
}

/// Holevo information between Eve's modes and the reconciling party's data.
pub fn holevo_bound(
    bundle: &AttackStateBundle,
    reconciliation: Reconciliation,
    detection: Detection,
) -> Result<f64> {
    let s_e = bundle.eve_with(None)?.von_neumann_entropy()?;
    let (party, heterodyne) = match reconciliation {
        Reconciliation::Reverse => (bundle.bob(), detection == Detection::Heterodyne),
        Reconciliation::Direct => (bundle.alice(), true),
    };
    let joint = bundle.eve_with(Some(party))?;
    let cond = if heterodyne {
        joint.condition_on_heterodyne(party)?
    } else {
        joint.condition_on_homodyne(party, Quadrature::X)?
    };
    Ok((s_e - cond.von_neumann_entropy()?).max(0.0))
}

/// Devetak–Winter rate `β·I_ab − χ_E` for a given joint state.
pub fn secret_key_rate(bundle: &AttackStateBundle, protocol: &Protocol) -> Result<KeyRateReport> {
    protocol.validate()?;
    let i_ab = mutual_information(bundle, protocol.detection)?;
    let holevo = holevo_bound(bundle, protocol.reconciliation, protocol.detection)?;
    Ok(KeyRateReport {
        mutual_information: i_ab,
        holevo,
        rate_raw: protocol.beta * i_ab - holevo,
        beta: protocol.beta,
        detection: protocol.detection,
        reconciliation: protocol.reconciliation,
        config: None,
    })
}

/// Rate against an eavesdropper holding the full purification of the channel.
pub fn optimal_collective_baseline(
    target: &GaussianChannelTarget,
    protocol: &Protocol,
) -> Result<KeyRateReport> {
    let bundle = entangling_cloner_state(target, &ClonerSpec::ideal(target)?, protocol.v_a)?;
    secret_key_rate(&bundle, protocol)
}

/// Rate against a single-station cloner with trusted fiber `T1` before and
/// `T2` after it.
pub fn merged_cloner_rate(
    target: &GaussianChannelTarget,
    protocol: &Protocol,
    losses: &FiberLosses,
) -> Result<KeyRateReport> {
    let bundle = entangling_cloner_state(target, &ClonerSpec::merged_station(target, losses)?, protocol.v_a)?;
    secret_key_rate(&bundle, protocol)
}

/// How Eve's distributed source is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SourceChoice {
    /// Physical variance before any NLA.
    Physical(f64),
    /// Variance of the equivalent source after the NLA.
    Equivalent(f64),
    /// The weakest equivalent source that reproduces the target.
    Minimum,
}

/// Solves the attack at squeezer gain `g` and returns the rate for the
/// mixing parameters that maximize Eve's Holevo information.
pub fn optimize_teleport_attack(
    target: &GaussianChannelTarget,
    protocol: &Protocol,
    g: f64,
    source: SourceChoice,
    losses: &FiberLosses,
    nla_gain: f64,
) -> Result<KeyRateReport> {
    protocol.validate()?;
    let t = solve_t(target, g, losses)?;
    let t4_eff = nla_transmittance(losses.t4, nla_gain)?;
    let eff_losses = FiberLosses { t4: t4_eff, ..*losses };
    let (effective, v_rho) = match source {
        SourceChoice::Physical(v) => {
            let (eff, _) = nla_equivalent(&EprSource::from_variance(v)?, losses.t4, nla_gain)?;
            (eff, v)
        }
        SourceChoice::Equivalent(v) => {
            let eff = EprSource::from_variance(v)?;
            (eff, source_before_nla(&eff, losses.t4, nla_gain)?.variance())
        }
        SourceChoice::Minimum => {
            let eff = min_epr_variance(target, g, t, &eff_losses)?;
            (eff, source_before_nla(&eff, losses.t4, nla_gain)?.variance())
        }
    };
    let model = NoiseModel { g, t, v_rho: effective.variance(), losses: eff_losses };
    let config_for = |eta: f64, v_phi: f64| AttackConfig { g, t, eta, v_rho, v_phi, losses: *losses, nla_gain };
    let (eta, v_phi, _) = solve_eta_vphi(target, &model, 1e-9, |eta, v_phi| {
        let bundle = build_state(&config_for(eta, v_phi), protocol.v_a)?;
        holevo_bound(&bundle, protocol.reconciliation, protocol.detection)
    })?;
    let config = config_for(eta, v_phi);
    let mut report = secret_key_rate(&build_state(&config, protocol.v_a)?, protocol)?;
    report.config = Some(config);
    Ok(report)
}

/// Limit `g → ∞` of a per-level evaluation, with the report of the last level.
pub fn limit_report(
    mut eval: impl FnMut(f64) -> Result<KeyRateReport>,
) -> Result<(KeyRateReport, LimitEstimate<()>)> {
    let est = converge(|k| {
        let r = eval(k)?;
        Ok((r.rate_raw, r))
    })?;
    let report = est.last.clone().with_rate(est.value);
    Ok((report, LimitEstimate { value: est.value, last: (), samples: est.samples }))
}

/// Teleportation attack with the weakest source that still reproduces the
/// target (`η = 1`), in the `g → ∞` limit.
pub fn individual_attack_baseline(
    target: &GaussianChannelTarget,
    protocol: &Protocol,
    losses: &FiberLosses,
) -> Result<KeyRateReport> {
    let (report, _) = limit_report(|g| {
        optimize_teleport_attack(target, protocol, g, SourceChoice::Minimum, losses, 1.0)
    })?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::target_from_system;

    /// Closed-form collective bound for homodyne reverse reconciliation.
    fn collective_closed_form(t: f64, eps: f64, v_a: f64, beta: f64) -> f64 {
        let v = v_a + 1.0;
        let chi = (1.0 - t) / t + eps;
        let vb = t * (v + chi);
        let c2 = t * (v * v - 1.0);
        let a = v * v + vb * vb - 2.0 * c2;
        let b = v * vb - c2;
        let l1 = (0.5 * (a + (a * a - 4.0 * b * b).sqrt())).sqrt();
        let l2 = (0.5 * (a - (a * a - 4.0 * b * b).sqrt())).sqrt();
        let l3 = (v * (v - c2 / vb)).sqrt();
        let g = |x: f64| {
            if x <= 1.0 + 1e-12 {
                0.0
            } else {
                let p = (x + 1.0) / 2.0;
                let m = (x - 1.0) / 2.0;
                p * p.log2() - m * m.log2()
            }
        };
        let i_ab = 0.5 * ((v + chi) / (1.0 + chi)).log2();
        beta * i_ab - (g(l1) + g(l2) - g(l3))
    }

    #[test]
    fn identity_channel_information() {
        let target = GaussianChannelTarget::new(1.0, 0.0).unwrap();
        let r = optimal_collective_baseline(&target, &Protocol::default()).unwrap();
        assert!((r.mutual_information - 0.5 * 5f64.log2()).abs() < 1e-12);
        assert!(r.holevo.abs() < 1e-9);
        assert!((r.rate_raw - 0.96 * r.mutual_information).abs() < 1e-9);
    }

    #[test]
    fn collective_matches_closed_form() {
        for (len, eps) in [(10.0, 0.01), (50.0, 0.04), (80.0, 0.1)] {
            let target = target_from_system(0.275, len, eps).unwrap();
            let r = optimal_collective_baseline(&target, &Protocol::default()).unwrap();
            let oracle = collective_closed_form(target.transmittance(), eps, 4.0, 0.96);
            assert!((r.rate_raw - oracle).abs() < 1e-9, "{len}: {} vs {oracle}", r.rate_raw);
        }
    }

    #[test]
    fn mutual_information_closed_form() {
        let target = target_from_system(0.275, 50.0, 0.04).unwrap();
        let r = optimal_collective_baseline(&target, &Protocol::default()).unwrap();
        let t = target.transmittance();
        let chi_tot = (1.0 - t) / t + 0.04;
        let oracle = 0.5 * ((5.0 + chi_tot) / (1.0 + chi_tot)).log2();
        assert!((r.mutual_information - oracle).abs() < 1e-12);
    }

    #[test]
    fn reverse_beats_direct_beyond_three_db() {
        let target = target_from_system(0.275, 20.0, 0.01).unwrap();
        let rr = optimal_collective_baseline(&target, &Protocol::default()).unwrap();
        let dr = optimal_collective_baseline(
            &target,
            &Protocol { reconciliation: Reconciliation::Direct, ..Protocol::default() },
        )
        .unwrap();
        assert!(rr.rate_raw > dr.rate_raw);
        assert!(dr.rate_raw < 0.0);
    }

    #[test]
    fn teleport_rate_between_baselines() {
        let target = target_from_system(0.275, 50.0, 0.04).unwrap();
        let p = Protocol::default();
        let coll = optimal_collective_baseline(&target, &p).unwrap().rate_raw;
        let strong = optimize_teleport_attack(&target, &p, 1e3, SourceChoice::Physical(1e3), &FiberLosses::LOSSLESS, 1.0)
            .unwrap();
        let weak = optimize_teleport_attack(&target, &p, 1e3, SourceChoice::Physical(2.0), &FiberLosses::LOSSLESS, 1.0)
            .unwrap();
        assert!(coll <= strong.rate_raw + 1e-9);
        assert!(strong.rate_raw <= weak.rate_raw + 1e-9);
        let cfg = weak.config.unwrap();
        assert!(cfg.eta > 0.0 && cfg.eta <= 1.0);
    }

    #[test]
    fn parse_flags() {
        assert_eq!("het".parse::<Detection>().unwrap(), Detection::Heterodyne);
        assert_eq!("RR".parse::<Reconciliation>().unwrap(), Reconciliation::Reverse);
        assert!("x".parse::<Detection>().is_err());
    }
}
