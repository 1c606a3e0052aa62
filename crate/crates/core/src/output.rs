//! CSV tables, gnuplot scripts and the figure harness.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;

use crate::channel::FiberSpec;
use crate::error::{Error, Result};
use crate::keyrate::KeyRateReport;
use crate::scenario::{AttackModel, ScenarioParams, SourceSpec};
use crate::sweep::{
    feasible_gain_region, run_sweep, with_pool, Axis, AxisName, ScenarioId, SweepResult, SweepSpec,
    DEFAULT_FIXED_VARIANCE, DEFAULT_STEPS_1D, DEFAULT_STEPS_2D,
};

/// Formats a number with 12 significant digits.
pub fn fmt12(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.11e}")
    } else {
        x.to_string()
    }
}

fn opt12(x: Option<f64>) -> String {
    x.map(fmt12).unwrap_or_default()
}

const OUTPUT_COLUMNS: [&str; 10] = ["I_ab", "holevo", "rate_raw", "rate", "flag", "t", "eta", "V_phi", "gamma_G", "T4_G"];

fn report_cells(report: Option<&KeyRateReport>) -> [String; 9] {
    let Some(r) = report else {
        return Default::default();
    };
    let cfg = r.config.as_ref();
    let eff = cfg.and_then(|c| c.effective_source().ok());
    [
        fmt12(r.mutual_information),
        fmt12(r.holevo),
        fmt12(r.rate_raw),
        fmt12(r.rate()),
        String::new(),
        opt12(cfg.map(|c| c.t)),
        opt12(cfg.map(|c| c.eta)),
        opt12(cfg.map(|c| c.v_phi)),
        opt12(eff.map(|(s, _)| s.squeezing())),
    ]
}

/// Sweep table: axis columns, then the report columns and solver internals.
pub fn sweep_csv(result: &SweepResult) -> String {
    let mut out = String::new();
    let mut header: Vec<&str> = result.spec.axes.iter().map(|a| a.name.name()).collect();
    header.extend(OUTPUT_COLUMNS);
    out.push_str(&header.join(","));
    out.push('\n');
    for p in &result.points {
        let mut cells: Vec<String> = p.coords.iter().map(|&c| fmt12(c)).collect();
        let report = p.report();
        let mut rc = report_cells(report).to_vec();
        rc[4] = p.flag().name().to_string();
        cells.extend(rc);
        let t4g = report.and_then(|r| r.config.as_ref()).and_then(|c| c.effective_source().ok()).map(|(_, t)| t);
        cells.push(opt12(t4g));
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// A file produced by a command.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub contents: String,
}

/// Writes artifacts into `dir`, creating it if needed.
pub fn write_artifacts(dir: &Path, artifacts: &[Artifact]) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::Config(format!("cannot create {}: {e}", dir.display())))?;
    for a in artifacts {
        let path = dir.join(&a.name);
        fs::write(&path, &a.contents).map_err(|e| Error::Config(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(())
}

/// Gnuplot commands plotting `rate` of a 1-D sweep CSV.
fn line_plot(csv: &str, x: &str, title: &str) -> String {
    format!(
        "set datafile separator ','\nset key autotitle columnhead\nset xlabel '{x}'\nset ylabel 'key rate (bits/use)'\n\
         set title '{title}'\nplot '{csv}' using '{x}':'rate' with lines\n"
    )
}

/// Gnuplot commands drawing `rate` of a 2-D sweep CSV as a heat map.
fn map_plot(csv: &str, x: &str, y: &str, title: &str) -> String {
    format!(
        "set datafile separator ','\nset view map\nset xlabel '{x}'\nset ylabel '{y}'\nset cblabel 'key rate (bits/use)'\n\
         set title '{title}'\nsplot '{csv}' using '{x}':'{y}':(strcol('flag') eq 'infeasible' ? NaN : column('rate')) \
         with pm3d notitle\n"
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FigureId {
    Fig1b,
    Fig3,
    Fig4,
    Fig5,
    Fig6,
    Fig7,
}

impl FigureId {
    pub const ALL: [FigureId; 6] = [Self::Fig1b, Self::Fig3, Self::Fig4, Self::Fig5, Self::Fig6, Self::Fig7];

    pub fn name(&self) -> &'static str {
        match self {
            Self::Fig1b => "fig1b",
            Self::Fig3 => "fig3",
            Self::Fig4 => "fig4",
            Self::Fig5 => "fig5",
            Self::Fig6 => "fig6",
            Self::Fig7 => "fig7",
        }
    }
}

impl FromStr for FigureId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|f| f.name() == s.trim())
            .ok_or_else(|| Error::Config(format!("unknown figure '{s}' (expected fig1b|fig3|fig4|fig5|fig6|fig7)")))
    }
}

fn sweep_artifact(name: &str, spec: &SweepSpec) -> Artifact {
    Artifact { name: name.to_string(), contents: sweep_csv(&run_sweep(spec)) }
}

/// Computes every panel of a figure. Returns CSV artifacts followed by a
/// gnuplot script `<id>.gp` that references them.
pub fn figure(id: FigureId, base: &ScenarioParams, steps: Option<usize>) -> Result<Vec<Artifact>> {
    let n1 = steps.unwrap_or(DEFAULT_STEPS_1D);
    let n2 = steps.unwrap_or(DEFAULT_STEPS_2D);
    let hollow = base.eve_fiber.clone().unwrap_or_else(FiberSpec::hollowcore);
    let mut files = Vec::new();
    let mut script = String::from("# gnuplot script; run from the directory holding the CSV files\n");
    match id {
        FigureId::Fig1b => {
            let base = ScenarioParams { eve_fiber: None, source: SourceSpec::Unbounded, ..base.clone() };
            files.push(fig1b_table(&base, n1)?);
            script.push_str(
                "set datafile separator ','\nset key autotitle columnhead\nset logscale x\nset xlabel 'V_rho'\n\
                 set ylabel 'key rate (bits/use)'\nplot 'fig1b.csv' using 1:2 with lines, '' using 1:3 with lines dt 3, \
                 '' using 1:4 with lines dt 2\n",
            );
        }
        FigureId::Fig3 => {
            for l in [50.0, 100.0] {
                let p = ScenarioParams { l_total: l, eve_fiber: Some(hollow.clone()), nla_gain: 1.0, ..base.clone() };
                let name = format!("fig3_L{l}.csv");
                files.push(sweep_artifact(&name, &SweepSpec::preset(ScenarioId::Stations, p, Some(n2))?));
                script.push_str(&map_plot(&name, "L1", "L2", &format!("L_total = {l} km")));
                script.push_str("pause -1\n");
            }
        }
        FigureId::Fig4 => {
            let classes: [(&str, Option<FiberSpec>); 4] = [
                ("collective", None),
                ("g652", Some(FiberSpec::g652())),
                ("lowloss", Some(FiberSpec::lowloss())),
                ("hollowcore", Some(FiberSpec::hollowcore())),
            ];
            for eps in [0.04, 0.1] {
                let mut plots = Vec::new();
                for (label, fiber) in &classes {
                    let model = if fiber.is_some() { AttackModel::Teleport } else { AttackModel::Collective };
                    let p = ScenarioParams {
                        epsilon: eps,
                        eve_fiber: fiber.clone(),
                        model,
                        source: SourceSpec::Unbounded,
                        nla_gain: 1.0,
                        ..base.clone()
                    };
                    let spec = SweepSpec::new(
                        ScenarioId::DistanceFibers,
                        vec![Axis::linear(AxisName::LTotal, 1.0, 200.0, n1)],
                        ScenarioParams { l1: 0.0, l2: 0.0, ..p },
                    )?;
                    let name = format!("fig4_eps{eps}_{label}.csv");
                    files.push(sweep_artifact(&name, &spec));
                    plots.push(format!("'{name}' using 'L_total':'rate' with lines title '{label}'"));
                }
                let _ = write!(
                    script,
                    "set datafile separator ','\nset xlabel 'L_total (km)'\nset ylabel 'key rate (bits/use)'\n\
                     set logscale y\nset title 'epsilon = {eps}'\nplot {}\npause -1\n",
                    plots.join(", ")
                );
            }
        }
        FigureId::Fig5 => {
            let p = ScenarioParams { eve_fiber: Some(hollow.clone()), ..base.clone() };
            for (name, gain) in [("fig5a_G2.csv", 2.0), ("fig5b_G10.csv", 10.0), ("fig5b_G20.csv", 20.0)] {
                let q = ScenarioParams { nla_gain: gain, ..p.clone() };
                files.push(sweep_artifact(name, &SweepSpec::preset(ScenarioId::NlaStations, q, Some(n2))?));
                script.push_str(&map_plot(name, "L1", "L2", &format!("G = {gain}")));
                script.push_str("pause -1\n");
            }
            files.push(sweep_artifact("fig5c.csv", &SweepSpec::preset(ScenarioId::NlaGainMap, p, Some(n2))?));
            script.push_str(&map_plot("fig5c.csv", "L2", "G", "L1 = 0"));
        }
        FigureId::Fig6 => {
            for fiber in [FiberSpec::lowloss(), FiberSpec::g652(), FiberSpec::deployed()] {
                let p = ScenarioParams { eve_fiber: Some(fiber.clone()), ..base.clone() };
                let name = format!("fig6_{}.csv", fiber.name());
                files.push(sweep_artifact(&name, &SweepSpec::preset(ScenarioId::NlaGainMap, p, Some(n2))?));
                script.push_str(&map_plot(&name, "L2", "G", fiber.name()));
                script.push_str("pause -1\n");
            }
        }
        FigureId::Fig7 => {
            let v = match base.source {
                SourceSpec::Fixed(v) => v,
                _ => DEFAULT_FIXED_VARIANCE,
            };
            let p = ScenarioParams { eve_fiber: Some(hollow.clone()), source: SourceSpec::Fixed(v), ..base.clone() };
            files.push(sweep_artifact("fig7a.csv", &SweepSpec::preset(ScenarioId::FixedVariance, p.clone(), Some(n2))?));
            let l2s = Axis::linear(AxisName::L2, 0.0, p.l_total, n2).values();
            files.push(boundary_table(&p, v, &l2s)?);
            let q = ScenarioParams { l1: 0.0, l2: p.l_total, ..p };
            let spec = SweepSpec::new(ScenarioId::FixedVariance, vec![Axis::linear(AxisName::Gain, 1.0, 10.0, n1)], q)?;
            files.push(sweep_artifact("fig7b.csv", &spec));
            script.push_str(&map_plot("fig7a.csv", "L2", "G", &format!("V_rho = {v}")));
            script.push_str(
                "replot 'fig7a_boundaries.csv' using 'L2':'G_min':(0) with lines lw 2 title 'left', \
                 '' using 'L2':'G_max':(0) with lines lw 2 title 'right'\npause -1\n",
            );
            script.push_str(&line_plot("fig7b.csv", "G", "L2 = L_total"));
        }
    }
    files.push(Artifact { name: format!("{}.gp", id.name()), contents: script });
    Ok(files)
}

fn fig1b_table(base: &ScenarioParams, steps: usize) -> Result<Artifact> {
    let v_min = base.min_source_variance()?;
    let individual = ScenarioParams { model: AttackModel::Individual, ..base.clone() }.evaluate()?.rate_raw;
    let collective = ScenarioParams { model: AttackModel::Collective, ..base.clone() }.evaluate()?.rate_raw;
    let vs = Axis::geometric(AxisName::VRho, v_min, 1e3, steps.max(2)).values();
    let rates: Vec<Option<f64>> = with_pool(|| {
        vs.par_iter()
            .map(|&v| {
                ScenarioParams { model: AttackModel::Teleport, source: SourceSpec::Fixed(v), ..base.clone() }
                    .evaluate()
                    .ok()
                    .map(|r| r.rate_raw)
            })
            .collect()
    });
    let mut csv = String::from("V_rho,rate_teleport,rate_individual,rate_collective\n");
    for (v, r) in vs.iter().zip(rates) {
        let _ = writeln!(csv, "{},{},{},{}", fmt12(*v), opt12(r), fmt12(individual), fmt12(collective));
    }
    Ok(Artifact { name: "fig1b.csv".into(), contents: csv })
}

fn boundary_table(base: &ScenarioParams, v_rho: f64, l2s: &[f64]) -> Result<Artifact> {
    let strips = feasible_gain_region(base, v_rho, l2s)?;
    let mut csv = String::from("L2,T4,G_min,G_max,rate_left,rate_right\n");
    for s in strips {
        let left = s.left.and_then(|r| r.ok()).map(|r| r.rate_raw);
        let right = s.right.ok().map(|r| r.rate_raw);
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{}",
            fmt12(s.l2),
            fmt12(s.t4),
            opt12(s.g_min),
            fmt12(s.g_max),
            opt12(left),
            opt12(right)
        );
    }
    Ok(Artifact { name: "fig7a_boundaries.csv".into(), contents: csv })
}
