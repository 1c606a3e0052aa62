use crate::channel::{FiberLosses, GaussianChannelTarget};
use crate::error::{Error, Result};
use crate::gaussian::{CovarianceMatrix, SymplecticTransform};

use super::AttackConfig;

/// Joint state of Alice, Bob, Eve and the trusted loss modes after an attack.
#[derive(Debug, Clone)]
pub struct AttackStateBundle {
    state: CovarianceMatrix,
    alice: String,
    bob: String,
    eve: Vec<String>,
    trusted: Vec<String>,
    discarded: Vec<String>,
}

impl AttackStateBundle {
    pub fn state(&self) -> &CovarianceMatrix {
        &self.state
    }

    pub fn alice(&self) -> &str {
        &self.alice
    }

    pub fn bob(&self) -> &str {
        &self.bob
    }

    pub fn eve_modes(&self) -> &[String] {
        &self.eve
    }

    pub fn trusted_modes(&self) -> &[String] {
        &self.trusted
    }

    pub fn discarded_modes(&self) -> &[String] {
        &self.discarded
    }

    /// Alice–Bob reduced state.
    pub fn reduced_ab(&self) -> Result<CovarianceMatrix> {
        self.state.partial_trace(&[&self.alice, &self.bob])
    }

    /// Eve's modes, optionally together with one more mode (placed last).
    pub fn eve_with(&self, extra: Option<&str>) -> Result<CovarianceMatrix> {
        let mut keep: Vec<&str> = self.eve.iter().map(String::as_str).collect();
        keep.extend(extra);
        self.state.partial_trace(&keep)
    }
}

fn add_vacuum(state: CovarianceMatrix, label: &str) -> Result<CovarianceMatrix> {
    state.tensor(&CovarianceMatrix::vacuum(label))
}

fn mix(state: &CovarianceMatrix, t: f64, a: &str, b: &str) -> Result<CovarianceMatrix> {
    state.transform(&SymplecticTransform::beamsplitter(t)?, &[a, b])
}

/// Builds the attack stage by stage. Returns the named intermediate states,
/// the last of which has modes `A, B5, F1..F4, E0, E1, E2, E3`.
///
/// Stage order: Alice's EPR source; trusted loss `T1`; station I (distributed
/// pair through `T4`, two-mode squeezer); trusted loss `T3`; station II
/// mixing of the distributed arm with `φ_E` at `η`, then with the signal at
/// `t`; trusted loss `T2`.
pub fn build_state_stages(
    config: &AttackConfig,
    v_a: f64,
) -> Result<Vec<(&'static str, CovarianceMatrix)>> {
    config.validate()?;
    if !(v_a > 0.0) {
        return Err(Error::Domain(format!("modulation variance must be positive, got {v_a}")));
    }
    let (source, t4) = config.effective_source()?;
    let FiberLosses { t1, t2, t3, .. } = config.losses;
    let mut stages = Vec::with_capacity(7);

    let s = CovarianceMatrix::epr_state(v_a + 1.0, ["A", "B0"])?;
    stages.push(("source", s.clone()));

    let s = add_vacuum(s, "F1")?;
    let s = mix(&s, t1, "B0", "F1")?.relabel("B0", "B1")?;
    stages.push(("trusted_t1", s.clone()));

    let s = s.tensor(&CovarianceMatrix::epr_state(source.variance(), ["H1", "H3"])?)?;
    let s = add_vacuum(s, "F4")?;
    let s = mix(&s, t4, "H3", "F4")?;
    let s = s
        .transform(&SymplecticTransform::two_mode_squeezer(config.g)?, &["B1", "H1"])?
        .relabel("B1", "B2")?
        .relabel("H1", "E0")?;
    stages.push(("station_one", s.clone()));

    let s = add_vacuum(s, "F3")?;
    let s = mix(&s, t3, "B2", "F3")?.relabel("B2", "B3")?;
    stages.push(("trusted_t3", s.clone()));

    let s = s.tensor(&CovarianceMatrix::epr_state(config.v_phi, ["E20", "E1"])?)?;
    let s = mix(&s, config.eta, "H3", "E20")?.relabel("H3", "E30")?.relabel("E20", "E2")?;
    stages.push(("station_two_eta", s.clone()));

    let s = mix(&s, config.t, "B3", "E30")?.relabel("B3", "B4")?.relabel("E30", "E3")?;
    stages.push(("station_two_t", s.clone()));

    let s = add_vacuum(s, "F2")?;
    let s = mix(&s, t2, "B4", "F2")?.relabel("B4", "B5")?;
    stages.push(("trusted_t2", s));
    Ok(stages)
}

/// Final joint state of the teleportation-based attack.
pub fn build_state(config: &AttackConfig, v_a: f64) -> Result<AttackStateBundle> {
    let (_, state) = build_state_stages(config, v_a)?.pop().expect("stages are never empty");
    Ok(AttackStateBundle {
        state,
        alice: "A".into(),
        bob: "B5".into(),
        eve: vec!["E1".into(), "E2".into(), "E3".into()],
        trusted: vec!["F1".into(), "F2".into(), "F3".into(), "F4".into()],
        discarded: vec!["E0".into()],
    })
}

/// Entangling cloner placed between two trusted loss sections.
///
/// The signal crosses `trusted_before`, a beamsplitter of transmittance
/// `1 − wiretap_ratio` fed by one arm of Eve's EPR pair, then `trusted_after`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClonerSpec {
    transmittance: f64,
    trusted_before: f64,
    trusted_after: f64,
}

impl ClonerSpec {
    pub fn new(wiretap_ratio: f64, trusted_before: f64, trusted_after: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&wiretap_ratio) {
            return Err(Error::Domain(format!("wiretap ratio must lie in [0, 1), got {wiretap_ratio}")));
        }
        Self::with_transmittance(1.0 - wiretap_ratio, trusted_before, trusted_after)
    }

    /// Same as [`ClonerSpec::new`] but parameterized by the cloner
    /// transmittance, which keeps precision for very lossy channels.
    pub fn with_transmittance(transmittance: f64, trusted_before: f64, trusted_after: f64) -> Result<Self> {
        if !(transmittance > 0.0 && transmittance <= 1.0) {
            return Err(Error::Domain(format!("cloner transmittance must lie in (0, 1], got {transmittance}")));
        }
        for t in [trusted_before, trusted_after] {
            if !(t > 0.0 && t <= 1.0) {
                return Err(Error::Domain(format!("trusted transmittance must lie in (0, 1], got {t}")));
            }
        }
        Ok(Self { transmittance, trusted_before, trusted_after })
    }

    /// Ideal cloner matching the whole channel.
    pub fn ideal(target: &GaussianChannelTarget) -> Result<Self> {
        Self::with_transmittance(target.transmittance(), 1.0, 1.0)
    }

    /// Cloner at a single station with trusted fiber `T1` before and `T2` after.
    pub fn merged_station(target: &GaussianChannelTarget, losses: &FiberLosses) -> Result<Self> {
        let inner = target.transmittance() / (losses.t1 * losses.t2);
        if inner > 1.0 {
            return Err(Error::Infeasible(format!(
                "trusted fiber transmittance {} is below the target {}",
                losses.t1 * losses.t2,
                target.transmittance()
            )));
        }
        Self::with_transmittance(inner, losses.t1, losses.t2)
    }

    pub fn wiretap_ratio(&self) -> f64 {
        1.0 - self.transmittance
    }

    pub fn cloner_transmittance(&self) -> f64 {
        self.transmittance
    }

    pub fn trusted_before(&self) -> f64 {
        self.trusted_before
    }

    pub fn trusted_after(&self) -> f64 {
        self.trusted_after
    }

    /// Variance of Eve's EPR pair reproducing the target noise.
    pub fn eve_variance(&self, target: &GaussianChannelTarget) -> Result<f64> {
        let tc = self.cloner_transmittance();
        let total = self.trusted_before * tc * self.trusted_after;
        if (total - target.transmittance()).abs() > 1e-9 * target.transmittance() {
            return Err(Error::Domain(format!(
                "cloner transmittance chain {total} differs from target {}",
                target.transmittance()
            )));
        }
        let (t1, t2) = (self.trusted_before, self.trusted_after);
        if tc == 1.0 {
            return Ok(1.0);
        }
        let n = ((target.chi() - 1.0 + t2) / t2 - tc * (1.0 - t1)) / (1.0 - tc);
        if n < 1.0 - 1e-12 {
            return Err(Error::Infeasible(format!("cloner needs variance {n} below vacuum")));
        }
        Ok(n.max(1.0))
    }
}

/// Joint state of a collective entangling-cloner attack. Eve holds the
/// tapped output `E2` and the retained EPR arm `E1`.
pub fn entangling_cloner_state(
    target: &GaussianChannelTarget,
    cloner: &ClonerSpec,
    v_a: f64,
) -> Result<AttackStateBundle> {
    if !(v_a > 0.0) {
        return Err(Error::Domain(format!("modulation variance must be positive, got {v_a}")));
    }
    let n = cloner.eve_variance(target)?;
    let s = CovarianceMatrix::epr_state(v_a + 1.0, ["A", "B0"])?;
    let s = add_vacuum(s, "F1")?;
    let s = mix(&s, cloner.trusted_before, "B0", "F1")?;
    let s = s.tensor(&CovarianceMatrix::epr_state(n, ["E2", "E1"])?)?;
    let s = mix(&s, cloner.cloner_transmittance(), "B0", "E2")?;
    let s = add_vacuum(s, "F2")?;
    let s = mix(&s, cloner.trusted_after, "B0", "F2")?.relabel("B0", "B5")?;
    Ok(AttackStateBundle {
        state: s,
        alice: "A".into(),
        bob: "B5".into(),
        eve: vec!["E1".into(), "E2".into()],
        trusted: vec!["F1".into(), "F2".into()],
        discarded: Vec::new(),
    })
}
