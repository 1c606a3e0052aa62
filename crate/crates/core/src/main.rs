use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cvqkd::config::{parse_axis, RunConfig};
use cvqkd::error::Error;
use cvqkd::keyrate::{Detection, KeyRateReport, Reconciliation};
use cvqkd::output::{figure, fmt12, sweep_csv, write_artifacts, FigureId};
use cvqkd::scenario::{AttackModel, ScenarioParams};
use cvqkd::sweep::{cutoff_distance, find_threshold_gain, run_sweep, Axis, ScenarioId, SweepSpec};

#[derive(Parser)]
#[command(name = "cvqkd", version, about = "CV-QKD key rates under fiber-limited teleportation attacks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Key rate of a single scenario.
    Keyrate(Common),
    /// Reproduce a figure as CSV files plus a gnuplot script.
    Figure {
        #[arg(value_parser = parse_figure)]
        id: FigureId,
        #[command(flatten)]
        common: Common,
    },
    /// Grid sweep over scenario parameters.
    Sweep {
        /// Scenario preset supplying default axes.
        #[arg(long, value_parser = parse_scenario)]
        scenario: Option<ScenarioId>,
        /// Axis as name:min:max:steps[:log]; repeatable. Replaces preset axes.
        #[arg(long = "axis", value_parser = parse_axis_flag)]
        axes: Vec<Axis>,
        #[command(flatten)]
        common: Common,
    },
    /// NLA gain at which the worst station-II position flips.
    Threshold {
        #[arg(long)]
        g_lo: Option<f64>,
        #[arg(long)]
        g_hi: Option<f64>,
        #[arg(long)]
        tol: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Distance at which the key rate reaches zero.
    Cutoff {
        #[arg(long)]
        tol: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct Common {
    /// Configuration file (key = value with [section] headers).
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    epsilon: Option<f64>,
    /// Alice's modulation variance.
    #[arg(long)]
    va: Option<f64>,
    /// Reconciliation efficiency.
    #[arg(long)]
    beta: Option<f64>,
    /// Attenuation of the legitimate link in dB/km.
    #[arg(long)]
    alpha_system: Option<f64>,
    /// deployed | g652 | lowloss | hollowcore | <dB/km> | ideal
    #[arg(long)]
    eve_fiber: Option<String>,
    #[arg(long)]
    l_total: Option<f64>,
    #[arg(long)]
    l1: Option<f64>,
    #[arg(long)]
    l2: Option<f64>,
    /// NLA gain.
    #[arg(long)]
    gain: Option<f64>,
    /// Physical variance of Eve's distributed source (default: unbounded).
    #[arg(long)]
    v_rho: Option<f64>,
    /// hom | het
    #[arg(long, value_parser = parse_detection)]
    detection: Option<Detection>,
    /// rr | dr
    #[arg(long, value_parser = parse_direction)]
    direction: Option<Reconciliation>,
    /// collective | individual | teleport | cloner
    #[arg(long, value_parser = parse_attack)]
    attack: Option<AttackModel>,
    /// Fixed two-mode squeezer gain (default: limit g → ∞).
    #[arg(long)]
    squeezer_gain: Option<f64>,
    /// Grid points per axis.
    #[arg(long)]
    steps: Option<usize>,
    /// Output path (file for sweep, directory for figure).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_figure(s: &str) -> Result<FigureId, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_scenario(s: &str) -> Result<ScenarioId, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_axis_flag(s: &str) -> Result<Axis, String> {
    parse_axis(s).map_err(|e| e.to_string())
}

fn parse_detection(s: &str) -> Result<Detection, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_direction(s: &str) -> Result<Reconciliation, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_attack(s: &str) -> Result<AttackModel, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

impl Common {
    fn resolve(&self, extra: RunConfig) -> Result<RunConfig, Error> {
        let file = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        let flags = RunConfig {
            epsilon: self.epsilon,
            va: self.va,
            beta: self.beta,
            alpha_system: self.alpha_system,
            eve_fiber: self.eve_fiber.clone(),
            l_total: self.l_total,
            l1: self.l1,
            l2: self.l2,
            gain: self.gain,
            v_rho: self.v_rho,
            detection: self.detection,
            direction: self.direction,
            attack: self.attack,
            squeezer_gain: self.squeezer_gain,
            out: self.out.clone(),
            steps: self.steps,
            ..extra
        };
        Ok(file.merged_with(flags))
    }
}

/// Appends one line of command output.
macro_rules! emit {
    ($out:expr, $($arg:tt)*) => {{
        $out.push_str(&format!($($arg)*));
        $out.push('\n');
    }};
}

fn print_report(out: &mut String, params: &ScenarioParams, r: &KeyRateReport) {
    let target = params.target().ok();
    emit!(out, "attack={}", params.model);
    if let Some(t) = target {
        emit!(out, "T_equ={}", fmt12(t.transmittance()));
    }
    emit!(out, "I_ab={}", fmt12(r.mutual_information));
    emit!(out, "holevo={}", fmt12(r.holevo));
    emit!(out, "rate_raw={}", fmt12(r.rate_raw));
    emit!(out, "rate={}", fmt12(r.rate()));
    emit!(out, "beta={}", r.beta);
    emit!(out, "detection={}", r.detection);
    emit!(out, "direction={}", r.reconciliation);
    if let Some(c) = &r.config {
        emit!(out, "g={}", fmt12(c.g));
        emit!(out, "t={}", fmt12(c.t));
        emit!(out, "eta={}", fmt12(c.eta));
        emit!(out, "V_rho={}", fmt12(c.v_rho));
        emit!(out, "V_phi={}", fmt12(c.v_phi));
        emit!(out, "G={}", fmt12(c.nla_gain));
        emit!(out, "T1={}", fmt12(c.losses.t1));
        emit!(out, "T2={}", fmt12(c.losses.t2));
        emit!(out, "T3={}", fmt12(c.losses.t3));
        emit!(out, "T4={}", fmt12(c.losses.t4));
        if let Ok((s, t4g)) = c.effective_source() {
            emit!(out, "gamma_G={}", fmt12(s.squeezing()));
            emit!(out, "T4_G={}", fmt12(t4g));
        }
    }
}

fn run(cli: Cli) -> Result<String, Error> {
    let mut out = String::new();
    match cli.command {
        Command::Keyrate(common) => {
            let params = common.resolve(RunConfig::default())?.scenario_params()?;
            let report = params.evaluate()?;
            print_report(&mut out, &params, &report);
        }
        Command::Figure { id, common } => {
            let cfg = common.resolve(RunConfig::default())?;
            let params = cfg.scenario_params()?;
            let files = figure(id, &params, cfg.steps)?;
            let dir = cfg.out.clone().unwrap_or_else(|| PathBuf::from("."));
            write_artifacts(&dir, &files)?;
            for f in &files {
                emit!(out, "{}", dir.join(&f.name).display());
            }
        }
        Command::Sweep { scenario, axes, common } => {
            let cfg = common.resolve(RunConfig { scenario, axes, ..RunConfig::default() })?;
            let params = cfg.scenario_params()?;
            let id = cfg.scenario.unwrap_or(ScenarioId::Stations);
            let spec = if cfg.axes.is_empty() {
                SweepSpec::preset(id, params, cfg.steps)?
            } else {
                SweepSpec::new(id, cfg.axes.clone(), params)?
            };
            let csv = sweep_csv(&run_sweep(&spec));
            match &cfg.out {
                Some(path) => std::fs::write(path, csv)
                    .map_err(|e| Error::Config(format!("cannot write {}: {e}", path.display())))?,
                None => out.push_str(&csv),
            }
        }
        Command::Threshold { g_lo, g_hi, tol, common } => {
            let cfg = common.resolve(RunConfig { g_lo, g_hi, tol, ..RunConfig::default() })?;
            let mut params = cfg.scenario_params()?;
            if params.eve_fiber.is_none() {
                params.eve_fiber = Some(cvqkd::channel::FiberSpec::hollowcore());
            }
            let (lo, hi, tol) = (cfg.g_lo.unwrap_or(1.0), cfg.g_hi.unwrap_or(20.0), cfg.tol.unwrap_or(1e-3));
            let r = find_threshold_gain(&params, lo, hi, tol)?;
            emit!(out, "G_th={}", fmt12(r.gain));
            emit!(out, "bracket_lo={}", fmt12(r.bracket.0));
            emit!(out, "bracket_hi={}", fmt12(r.bracket.1));
            emit!(out, "rate_colocated={}", fmt12(r.rate_colocated));
            emit!(out, "rate_split_lo={}", fmt12(r.rate_split_low));
            emit!(out, "rate_split_hi={}", fmt12(r.rate_split_high));
        }
        Command::Cutoff { tol, common } => {
            let cfg = common.resolve(RunConfig { tol, ..RunConfig::default() })?;
            let params = cfg.scenario_params()?;
            let cutoff = cutoff_distance(&params, cfg.tol.unwrap_or(1e-2))?;
            emit!(out, "cutoff_km={cutoff}");
        }
    }
    Ok(out)
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) => 2,
        e if e.is_infeasible() => 3,
        Error::NoThreshold { .. } => 4,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(text) => {
            let mut stdout = std::io::stdout().lock();
            match stdout.write_all(text.as_bytes()).and_then(|_| stdout.flush()) {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => {
                    eprintln!("error: {e}");
                    ExitCode::from(1)
                }
                _ => ExitCode::SUCCESS,
            }
        }
        Err(e) => {
            eprintln!("error: {}: {e}", e.name());
            ExitCode::from(exit_code(&e))
        }
    }
}
