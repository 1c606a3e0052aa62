//! Run configuration: flat `key = value` files with `[section]` headers,
//! keys named like the command-line flags.

use std::path::PathBuf;
use std::str::FromStr;

use crate::channel::FiberSpec;
use crate::error::{Error, Result};
use crate::keyrate::{Detection, Protocol, Reconciliation};
use crate::scenario::{AttackModel, ScenarioParams, SourceSpec, SqueezerGain};
use crate::sweep::{Axis, AxisName, ScenarioId};

const SECTIONS: [&str; 7] = ["general", "protocol", "channel", "attack", "geometry", "sweep", "output"];

/// Every field is optional; unset fields fall back to defaults when the
/// configuration is turned into scenario parameters.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunConfig {
    pub scenario: Option<ScenarioId>,
    pub epsilon: Option<f64>,
    pub va: Option<f64>,
    pub beta: Option<f64>,
    pub alpha_system: Option<f64>,
    /// Fiber name, attenuation in dB/km, or `ideal` for lossless links.
    pub eve_fiber: Option<String>,
    pub l_total: Option<f64>,
    pub l1: Option<f64>,
    pub l2: Option<f64>,
    pub gain: Option<f64>,
    pub v_rho: Option<f64>,
    pub detection: Option<Detection>,
    pub direction: Option<Reconciliation>,
    pub attack: Option<AttackModel>,
    pub squeezer_gain: Option<f64>,
    pub out: Option<PathBuf>,
    pub steps: Option<usize>,
    pub tol: Option<f64>,
    pub g_lo: Option<f64>,
    pub g_hi: Option<f64>,
    pub axes: Vec<Axis>,
}

fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| Error::Config(format!("invalid value '{value}' for '{key}'")))
}

/// Parses `name:min:max:steps[:log]`.
pub fn parse_axis(spec: &str) -> Result<Axis> {
    let parts: Vec<&str> = spec.split(':').map(str::trim).collect();
    if !(parts.len() == 4 || (parts.len() == 5 && parts[4] == "log")) {
        return Err(Error::Config(format!("axis '{spec}' must look like name:min:max:steps[:log]")));
    }
    let axis = Axis {
        name: parts[0].parse::<AxisName>()?,
        min: parse_value("axis", parts[1])?,
        max: parse_value("axis", parts[2])?,
        steps: parse_value("axis", parts[3])?,
        log: parts.len() == 5,
    };
    axis.validate()?;
    Ok(axis)
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        let mut seen: Vec<String> = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split(['#', ';']).next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(section) = line.strip_prefix('[') {
                let name = section
                    .strip_suffix(']')
                    .ok_or_else(|| Error::Config(format!("line {}: unterminated section header", n + 1)))?
                    .trim();
                if !SECTIONS.contains(&name) {
                    return Err(Error::Config(format!("line {}: unknown section [{name}]", n + 1)));
                }
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", n + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            if key != "axis" {
                if seen.iter().any(|k| k == key) {
                    return Err(Error::Config(format!("line {}: duplicate key '{key}'", n + 1)));
                }
                seen.push(key.to_string());
            }
            cfg.set(key, value).map_err(|e| match e {
                Error::Config(m) => Error::Config(format!("line {}: {m}", n + 1)),
                other => other,
            })?;
        }
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "scenario" => self.scenario = Some(value.parse()?),
            "epsilon" => self.epsilon = Some(parse_value(key, value)?),
            "va" => self.va = Some(parse_value(key, value)?),
            "beta" => self.beta = Some(parse_value(key, value)?),
            "alpha-system" => self.alpha_system = Some(parse_value(key, value)?),
            "eve-fiber" => self.eve_fiber = Some(value.to_string()),
            "l-total" => self.l_total = Some(parse_value(key, value)?),
            "l1" => self.l1 = Some(parse_value(key, value)?),
            "l2" => self.l2 = Some(parse_value(key, value)?),
            "gain" => self.gain = Some(parse_value(key, value)?),
            "v-rho" => self.v_rho = Some(parse_value(key, value)?),
            "detection" => self.detection = Some(value.parse()?),
            "direction" => self.direction = Some(value.parse()?),
            "attack" => self.attack = Some(value.parse()?),
            "squeezer-gain" => self.squeezer_gain = Some(parse_value(key, value)?),
            "out" => self.out = Some(PathBuf::from(value)),
            "steps" => self.steps = Some(parse_value(key, value)?),
            "tol" => self.tol = Some(parse_value(key, value)?),
            "g-lo" => self.g_lo = Some(parse_value(key, value)?),
            "g-hi" => self.g_hi = Some(parse_value(key, value)?),
            "axis" => self.axes.push(parse_axis(value)?),
            other => return Err(Error::Config(format!("unknown key '{other}'"))),
        }
        Ok(())
    }

    /// Fields set in `over` replace those in `self`; axes given in `over`
    /// replace all axes of `self`.
    pub fn merged_with(self, over: RunConfig) -> RunConfig {
        RunConfig {
            scenario: over.scenario.or(self.scenario),
            epsilon: over.epsilon.or(self.epsilon),
            va: over.va.or(self.va),
            beta: over.beta.or(self.beta),
            alpha_system: over.alpha_system.or(self.alpha_system),
            eve_fiber: over.eve_fiber.or(self.eve_fiber),
            l_total: over.l_total.or(self.l_total),
            l1: over.l1.or(self.l1),
            l2: over.l2.or(self.l2),
            gain: over.gain.or(self.gain),
            v_rho: over.v_rho.or(self.v_rho),
            detection: over.detection.or(self.detection),
            direction: over.direction.or(self.direction),
            attack: over.attack.or(self.attack),
            squeezer_gain: over.squeezer_gain.or(self.squeezer_gain),
            out: over.out.or(self.out),
            steps: over.steps.or(self.steps),
            tol: over.tol.or(self.tol),
            g_lo: over.g_lo.or(self.g_lo),
            g_hi: over.g_hi.or(self.g_hi),
            axes: if over.axes.is_empty() { self.axes } else { over.axes },
        }
    }

    pub fn eve_fiber_spec(&self) -> Result<Option<FiberSpec>> {
        match self.eve_fiber.as_deref().map(str::trim) {
            None | Some("ideal") | Some("lossless") | Some("none") => Ok(None),
            Some(s) => Ok(Some(s.parse()?)),
        }
    }

    pub fn scenario_params(&self) -> Result<ScenarioParams> {
        let d = ScenarioParams::default();
        let protocol = Protocol {
            v_a: self.va.unwrap_or(d.protocol.v_a),
            beta: self.beta.unwrap_or(d.protocol.beta),
            detection: self.detection.unwrap_or(d.protocol.detection),
            reconciliation: self.direction.unwrap_or(d.protocol.reconciliation),
        };
        protocol.validate()?;
        let params = ScenarioParams {
            protocol,
            epsilon: self.epsilon.unwrap_or(d.epsilon),
            alpha_system: self.alpha_system.unwrap_or(d.alpha_system),
            l_total: self.l_total.unwrap_or(d.l_total),
            eve_fiber: self.eve_fiber_spec()?,
            l1: self.l1.unwrap_or(d.l1),
            l2: self.l2.unwrap_or(d.l2),
            nla_gain: self.gain.unwrap_or(d.nla_gain),
            source: self.v_rho.map_or(d.source, SourceSpec::Fixed),
            squeezer: self.squeezer_gain.map_or(d.squeezer, SqueezerGain::Fixed),
            model: self.attack.unwrap_or(d.model),
        };
        if !(params.epsilon >= 0.0) || !(params.alpha_system > 0.0) || !(params.l_total >= 0.0) {
            return Err(Error::Config("epsilon, alpha-system and l-total must be non-negative".into()));
        }
        Ok(params)
    }
}
