//! Parameter sweeps, NLA threshold search, admissible gain strips and
//! cutoff distances.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::attack::{max_gain, min_epr_variance, min_gain, nla_equivalent, nla_transmittance, solve_t, EprSource};
use crate::attack::limit::LIMIT_LEVELS;
use crate::channel::{FiberLosses, FiberSpec};
use crate::error::{Error, Result};
use crate::keyrate::KeyRateReport;
use crate::scenario::{AttackModel, ScenarioParams, SourceSpec};

/// Environment variable capping the number of sweep worker threads.
pub const THREADS_ENV: &str = "CVQKD_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScenarioId {
    Fig1b,
    Stations,
    DistanceFibers,
    NlaStations,
    NlaGainMap,
    FixedVariance,
    Threshold,
}

impl ScenarioId {
    pub const ALL: [ScenarioId; 7] = [
        Self::Fig1b,
        Self::Stations,
        Self::DistanceFibers,
        Self::NlaStations,
        Self::NlaGainMap,
        Self::FixedVariance,
        Self::Threshold,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Self::Fig1b => "fig1b",
            Self::Stations => "stations",
            Self::DistanceFibers => "distance_fibers",
            Self::NlaStations => "nla_stations",
            Self::NlaGainMap => "nla_gain_map",
            Self::FixedVariance => "fixed_variance",
            Self::Threshold => "threshold",
        }
    }
}

impl FromStr for ScenarioId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|id| id.name() == s.trim())
            .ok_or_else(|| Error::Config(format!("unknown scenario '{s}'")))
    }
}

impl fmt::Display for ScenarioId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Scenario parameter that an axis varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AxisName {
    VRho,
    L1,
    L2,
    LTotal,
    Gain,
    Epsilon,
}

impl AxisName {
    pub const ALL: [AxisName; 6] = [Self::VRho, Self::L1, Self::L2, Self::LTotal, Self::Gain, Self::Epsilon];

    /// Column name in CSV output.
    pub fn name(&self) -> &'static str {
        match self {
            Self::VRho => "V_rho",
            Self::L1 => "L1",
            Self::L2 => "L2",
            Self::LTotal => "L_total",
            Self::Gain => "G",
            Self::Epsilon => "epsilon",
        }
    }

    fn apply(&self, params: &mut ScenarioParams, value: f64) {
        match self {
            Self::VRho => params.source = SourceSpec::Fixed(value),
            Self::L1 => params.l1 = value,
            Self::L2 => params.l2 = value,
            Self::LTotal => params.l_total = value,
            Self::Gain => params.nla_gain = value,
            Self::Epsilon => params.epsilon = value,
        }
    }
}

impl FromStr for AxisName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        Self::ALL
            .into_iter()
            .find(|a| a.name().eq_ignore_ascii_case(s))
            .or(match s {
                "v-rho" | "vrho" => Some(Self::VRho),
                "l-total" | "ltotal" => Some(Self::LTotal),
                "gain" => Some(Self::Gain),
                _ => None,
            })
            .ok_or_else(|| Error::Config(format!("unknown axis '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub name: AxisName,
    pub min: f64,
    pub max: f64,
    pub steps: usize,
    /// Geometric instead of linear spacing.
    pub log: bool,
}

impl Axis {
    pub fn linear(name: AxisName, min: f64, max: f64, steps: usize) -> Self {
        Self { name, min, max, steps, log: false }
    }

    pub fn geometric(name: AxisName, min: f64, max: f64, steps: usize) -> Self {
        Self { name, min, max, steps, log: true }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.min.is_finite() || !self.max.is_finite() || self.max < self.min {
            return Err(Error::Config(format!("axis {}: need finite min <= max", self.name.name())));
        }
        if self.steps < 2 && !(self.steps == 1 && self.min == self.max) {
            return Err(Error::Config(format!(
                "axis {}: need at least 2 steps (or 1 step with min = max)",
                self.name.name()
            )));
        }
        if self.log && !(self.min > 0.0) {
            return Err(Error::Config(format!("axis {}: geometric spacing needs min > 0", self.name.name())));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.min];
        }
        let n = (self.steps - 1) as f64;
        (0..self.steps)
            .map(|i| {
                if i + 1 == self.steps {
                    return self.max;
                }
                let f = i as f64 / n;
                if self.log {
                    self.min * (self.max / self.min).powf(f)
                } else {
                    self.min + (self.max - self.min) * f
                }
            })
            .collect()
    }
}

/// A grid of scenarios: the base parameters with each axis swept.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub scenario: ScenarioId,
    pub axes: Vec<Axis>,
    pub base: ScenarioParams,
}

pub const DEFAULT_STEPS_1D: usize = 51;
pub const DEFAULT_STEPS_2D: usize = 41;

impl SweepSpec {
    pub fn new(scenario: ScenarioId, axes: Vec<Axis>, base: ScenarioParams) -> Result<Self> {
        if axes.is_empty() {
            return Err(Error::Config("a sweep needs at least one axis".into()));
        }
        for (i, a) in axes.iter().enumerate() {
            a.validate()?;
            if axes[..i].iter().any(|b| b.name == a.name) {
                return Err(Error::Config(format!("axis {} given twice", a.name.name())));
            }
        }
        Ok(Self { scenario, axes, base })
    }

    /// Default axes of a scenario around `base`. `steps` overrides the grid
    /// density (51 points for 1-D sweeps, 41 per axis for maps).
    pub fn preset(scenario: ScenarioId, base: ScenarioParams, steps: Option<usize>) -> Result<Self> {
        let n1 = steps.unwrap_or(DEFAULT_STEPS_1D);
        let n2 = steps.unwrap_or(DEFAULT_STEPS_2D);
        let l = base.l_total;
        let fiber = || base.eve_fiber.clone().or(Some(FiberSpec::hollowcore()));
        let (axes, base) = match scenario {
            ScenarioId::Fig1b => (
                vec![Axis::geometric(AxisName::VRho, 1.0, 1e3, n1)],
                ScenarioParams { model: AttackModel::Teleport, ..base.clone() },
            ),
            ScenarioId::Stations | ScenarioId::NlaStations => (
                vec![Axis::linear(AxisName::L1, 0.0, l, n2), Axis::linear(AxisName::L2, 0.0, l, n2)],
                ScenarioParams { eve_fiber: fiber(), source: SourceSpec::Unbounded, ..base.clone() },
            ),
            ScenarioId::DistanceFibers => (
                vec![Axis::linear(AxisName::LTotal, 1.0, 200.0, n1)],
                ScenarioParams { l1: 0.0, l2: 0.0, ..base.clone() },
            ),
            ScenarioId::NlaGainMap => (
                vec![Axis::linear(AxisName::L2, 0.0, l, n2), Axis::linear(AxisName::Gain, 1.0, 20.0, n2)],
                ScenarioParams { eve_fiber: fiber(), l1: 0.0, source: SourceSpec::Unbounded, ..base.clone() },
            ),
            ScenarioId::FixedVariance => {
                let source = match base.source {
                    SourceSpec::Fixed(v) => SourceSpec::Fixed(v),
                    _ => SourceSpec::Fixed(DEFAULT_FIXED_VARIANCE),
                };
                (
                    vec![Axis::linear(AxisName::L2, 0.0, l, n2), Axis::linear(AxisName::Gain, 1.0, 10.0, n2)],
                    ScenarioParams { eve_fiber: fiber(), l1: 0.0, source, ..base.clone() },
                )
            }
            ScenarioId::Threshold => (
                vec![Axis::linear(AxisName::Gain, 1.0, 20.0, n1)],
                ScenarioParams { eve_fiber: fiber(), l1: 0.0, l2: l, source: SourceSpec::Unbounded, ..base.clone() },
            ),
        };
        Self::new(scenario, axes, base)
    }

    /// Grid points in row-major order (last axis fastest).
    pub fn grid(&self) -> Vec<Vec<f64>> {
        let values: Vec<Vec<f64>> = self.axes.iter().map(Axis::values).collect();
        let mut out = vec![Vec::new()];
        for vals in &values {
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    vals.iter().map(move |&v| {
                        let mut p = prefix.clone();
                        p.push(v);
                        p
                    })
                })
                .collect();
        }
        out
    }

    pub fn params_at(&self, coords: &[f64]) -> ScenarioParams {
        let mut p = self.base.clone();
        for (axis, &v) in self.axes.iter().zip(coords) {
            axis.name.apply(&mut p, v);
        }
        p
    }
}

/// Physical source variance used by the fixed-variance scenario by default.
pub const DEFAULT_FIXED_VARIANCE: f64 = 1.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PointFlag {
    Ok,
    Infeasible,
    Nonpositive,
}

impl PointFlag {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Ok => "ok",
            Self::Infeasible => "infeasible",
            Self::Nonpositive => "nonpositive",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub coords: Vec<f64>,
    pub outcome: std::result::Result<KeyRateReport, Error>,
}

impl SweepPoint {
    pub fn flag(&self) -> PointFlag {
        match &self.outcome {
            Err(_) => PointFlag::Infeasible,
            Ok(r) if r.rate_raw <= 0.0 => PointFlag::Nonpositive,
            Ok(_) => PointFlag::Ok,
        }
    }

    pub fn report(&self) -> Option<&KeyRateReport> {
        self.outcome.as_ref().ok()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub spec: SweepSpec,
    pub points: Vec<SweepPoint>,
}

/// Worker count from [`THREADS_ENV`], if set to a positive integer.
pub fn thread_limit() -> Option<usize> {
    std::env::var(THREADS_ENV).ok()?.trim().parse().ok().filter(|&n: &usize| n > 0)
}

/// Runs `f` on a pool honoring [`THREADS_ENV`].
pub fn with_pool<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_limit() {
        builder = builder.num_threads(n);
    }
    match builder.build() {
        Ok(pool) => pool.install(f),
        Err(_) => f(),
    }
}

/// Evaluates every grid point; failures become flagged points.
pub fn run_sweep(spec: &SweepSpec) -> SweepResult {
    let grid = spec.grid();
    let points = with_pool(|| {
        grid.into_par_iter()
            .map(|coords| {
                let outcome = spec.params_at(&coords).evaluate();
                SweepPoint { coords, outcome }
            })
            .collect()
    });
    SweepResult { spec: spec.clone(), points }
}

/// Outcome of the NLA threshold search.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdResult {
    pub gain: f64,
    /// Final bisection bracket.
    pub bracket: (f64, f64),
    /// Rate with both stations at Alice (independent of the gain).
    pub rate_colocated: f64,
    /// Rate with station II at Bob, at the lower and upper bracket ends.
    pub rate_split_low: f64,
    pub rate_split_high: f64,
}

fn split_difference(base: &ScenarioParams, gain: f64, colocated: f64) -> Result<(f64, f64)> {
    let split = ScenarioParams { l1: 0.0, l2: base.l_total, nla_gain: gain, ..base.clone() }.evaluate()?;
    Ok((colocated - split.rate_raw, split.rate_raw))
}

/// Gain at which the worst station-II position moves from Alice (`L2 = 0`)
/// to Bob (`L2 = L_total`), by bisection on the sign of
/// `rate(L2 = 0) − rate(L2 = L_total)` with station I at Alice.
pub fn find_threshold_gain(base: &ScenarioParams, lo: f64, hi: f64, tol: f64) -> Result<ThresholdResult> {
    if !(lo >= 1.0 && hi > lo && tol > 0.0) {
        return Err(Error::Domain(format!("invalid gain bracket [{lo}, {hi}] with tol {tol}")));
    }
    if base.eve_fiber.is_none() {
        return Err(Error::Domain("the threshold search needs a fiber for Eve".into()));
    }
    let base = ScenarioParams { model: AttackModel::Teleport, source: SourceSpec::Unbounded, ..base.clone() };
    let colocated = ScenarioParams { l1: 0.0, l2: 0.0, ..base.clone() }.evaluate()?.rate_raw;
    let (d_lo, mut r_lo) = split_difference(&base, lo, colocated)?;
    let (d_hi, mut r_hi) = split_difference(&base, hi, colocated)?;
    if !(d_lo < 0.0 && d_hi > 0.0) {
        return Err(Error::NoThreshold {
            lo,
            hi,
            reason: format!(
                "rate(L2=0) - rate(L2=L_total) is {d_lo:.3e} at G={lo} and {d_hi:.3e} at G={hi}; \
                 expected a change from negative to positive"
            ),
        });
    }
    let (mut a, mut b) = (lo, hi);
    while b - a > tol {
        let mid = 0.5 * (a + b);
        let (d, r) = split_difference(&base, mid, colocated)?;
        if d < 0.0 {
            a = mid;
            r_lo = r;
        } else {
            b = mid;
            r_hi = r;
        }
    }
    Ok(ThresholdResult {
        gain: 0.5 * (a + b),
        bracket: (a, b),
        rate_colocated: colocated,
        rate_split_low: r_lo,
        rate_split_high: r_hi,
    })
}

/// Admissible NLA gains for a fixed physical source at one station-II position.
#[derive(Debug, Clone, PartialEq)]
pub struct GainStrip {
    pub l2: f64,
    pub t4: f64,
    /// Smallest gain whose equivalent source reproduces the target.
    pub g_min: Option<f64>,
    /// Gain at which the equivalent squeezing reaches 1.
    pub g_max: f64,
    /// Rate on the left boundary (weakest admissible equivalent source).
    pub left: Option<std::result::Result<KeyRateReport, Error>>,
    /// Rate on the right boundary (equivalent source of infinite variance).
    pub right: std::result::Result<KeyRateReport, Error>,
}

impl GainStrip {
    pub fn is_empty(&self) -> bool {
        self.g_min.is_none()
    }
}

/// For each `L2` (station I at Alice), the gain interval
/// `[G_min, G_max]` over which the NLA-distilled version of the fixed source
/// is both Gaussian and strong enough, with the boundary rates.
pub fn feasible_gain_region(base: &ScenarioParams, v_rho: f64, l2_values: &[f64]) -> Result<Vec<GainStrip>> {
    let fiber = base.eve_fiber.clone().ok_or_else(|| Error::Domain("the gain region needs a fiber for Eve".into()))?;
    let source = EprSource::from_variance(v_rho)?;
    let target = base.target()?;
    let g_ref = *LIMIT_LEVELS.last().expect("levels are non-empty");
    let strips: Vec<Result<GainStrip>> = with_pool(|| {
        l2_values
            .par_iter()
            .map(|&l2| {
                let p = ScenarioParams { l1: 0.0, l2, eve_fiber: Some(fiber.clone()), ..base.clone() };
                let losses: FiberLosses = p.losses()?;
                let t = solve_t(&target, g_ref, &losses)?;
                let g_max = max_gain(&source, losses.t4)?;
                let g_min = min_gain(&source, losses.t4, 1e-9, |gain| {
                    let (eff, _) = match nla_equivalent(&source, losses.t4, gain) {
                        Ok(x) => x,
                        Err(e) if e.is_infeasible() => return Ok(true),
                        Err(e) => return Err(e),
                    };
                    let t4g = nla_transmittance(losses.t4, gain)?;
                    match min_epr_variance(&target, g_ref, t, &FiberLosses { t4: t4g, ..losses }) {
                        Ok(v_min) => Ok(eff.variance() >= v_min.variance()),
                        Err(e) if e.is_infeasible() => Ok(false),
                        Err(e) => Err(e),
                    }
                })?;
                let left = g_min.map(|g| {
                    ScenarioParams { nla_gain: g, model: AttackModel::Individual, ..p.clone() }.evaluate()
                });
                let right = ScenarioParams {
                    nla_gain: g_max.min(1e6),
                    source: SourceSpec::Unbounded,
                    model: AttackModel::Teleport,
                    ..p.clone()
                }
                .evaluate();
                Ok(GainStrip { l2, t4: losses.t4, g_min, g_max, left, right })
            })
            .collect()
    });
    strips.into_iter().collect()
}

/// Distance at which a key rate reaches zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cutoff {
    Found(f64),
    /// No zero crossing up to this distance.
    Beyond(f64),
}

impl fmt::Display for Cutoff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Found(l) => write!(f, "{l}"),
            Self::Beyond(l) => write!(f, ">{l}"),
        }
    }
}

pub const CUTOFF_START_KM: f64 = 1.0;
pub const CUTOFF_MAX_KM: f64 = 500.0;
const CUTOFF_SCAN_KM: f64 = 5.0;

/// Zero crossing of the raw key rate in `L_total`, located by a coarse scan
/// followed by bisection to `tol` km. Station distances are scaled with the
/// total length only through the fixed `L1`, `L2` of `base`.
pub fn cutoff_distance(base: &ScenarioParams, tol: f64) -> Result<Cutoff> {
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("tolerance must be positive, got {tol}")));
    }
    let rate = |l: f64| ScenarioParams { l_total: l, ..base.clone() }.evaluate().map(|r| r.rate_raw);
    let start = CUTOFF_START_KM.max(base.l2);
    if rate(start)? <= 0.0 {
        return Err(Error::Domain(format!("key rate is not positive at {start} km")));
    }
    let mut lo = start;
    let mut hi = None;
    let mut l = start;
    while l < CUTOFF_MAX_KM {
        let next = (l + CUTOFF_SCAN_KM).min(CUTOFF_MAX_KM);
        if rate(next)? <= 0.0 {
            hi = Some(next);
            break;
        }
        lo = next;
        l = next;
    }
    let Some(mut hi) = hi else {
        return Ok(Cutoff::Beyond(CUTOFF_MAX_KM));
    };
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if rate(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Cutoff::Found(0.5 * (lo + hi)))
}
