use crate::channel::{FiberLosses, GaussianChannelTarget};
use crate::error::{Error, Result};

use super::EprSource;

/// Largest variance tried when searching for the minimum source variance.
const VARIANCE_SEARCH_CAP: f64 = 1e8;

/// Noise at Bob's output produced by the pipeline, as a function of `η` and
/// `V_φ` for fixed `g`, `t`, source variance and fiber losses.
///
/// With `a = t·T3·(g−1)`:
///
/// ```text
/// χ_out = T2·[t·T3·g·(1−T1) + a·V_ρ + t·(1−T3)
///             + (1−t)·(η·(T4·V_ρ + 1 − T4) + (1−η)·V_φ)
///             − 2·√(a·(1−t)·η·T4·(V_ρ²−1))] + 1 − T2
/// ```
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    pub g: f64,
    pub t: f64,
    pub v_rho: f64,
    pub losses: FiberLosses,
}

impl NoiseModel {
    pub fn noise(&self, eta: f64, v_phi: f64) -> f64 {
        let FiberLosses { t1, t2, t3, t4 } = self.losses;
        let (g, t, v) = (self.g, self.t, self.v_rho);
        let a = t * t3 * (g - 1.0);
        let arm = t4 * v + 1.0 - t4;
        let cross = (a * (1.0 - t) * eta * t4 * (v * v - 1.0)).max(0.0).sqrt();
        t2 * (t * t3 * g * (1.0 - t1) + a * v + t * (1.0 - t3)
            + (1.0 - t) * (eta * arm + (1.0 - eta) * v_phi)
            - 2.0 * cross)
            + 1.0
            - t2
    }

    /// Coefficient of `V_φ` in [`NoiseModel::noise`].
    pub fn phi_coefficient(&self, eta: f64) -> f64 {
        self.losses.t2 * (1.0 - self.t) * (1.0 - eta)
    }

    /// Quadratic `A·u² + B·u + D` in `u = √η` giving `χ_out(η, V_φ=1) − χ`.
    fn vacuum_phi_quadratic(&self, chi: f64) -> (f64, f64, f64) {
        let FiberLosses { t1, t2, t3, t4 } = self.losses;
        let (g, t, v) = (self.g, self.t, self.v_rho);
        let a = t * t3 * (g - 1.0);
        let qa = t2 * (1.0 - t) * t4 * (v - 1.0);
        let qb = -2.0 * t2 * (a * (1.0 - t) * t4 * (v * v - 1.0)).max(0.0).sqrt();
        let qd = t2 * (t * t3 * g * (1.0 - t1) + a * v + t * (1.0 - t3) + (1.0 - t)) + 1.0 - t2 - chi;
        (qa, qb, qd)
    }
}

/// Beamsplitter transmittance at station II that makes the overall signal
/// transmittance equal the target: `t = T / (g·T1·T2·T3)`.
pub fn solve_t(target: &GaussianChannelTarget, g: f64, losses: &FiberLosses) -> Result<f64> {
    if !(g >= 1.0) {
        return Err(Error::Domain(format!("g must be >= 1, got {g}")));
    }
    let path = g * losses.signal_path();
    let t = target.transmittance() / path;
    if t > 1.0 + 1e-12 {
        return Err(Error::Infeasible(format!(
            "g·T1·T2·T3 = {path} is below the target transmittance {}",
            target.transmittance()
        )));
    }
    Ok(t.min(1.0))
}

fn feasibility_tolerance(chi: f64) -> f64 {
    1e-12 * chi.abs().max(1.0)
}

/// Range `[η_lo, η_hi]` of mixing transmittances for which some `V_φ ≥ 1`
/// reproduces the target noise, or `None` when the source is too weak.
///
/// The excess of `χ_out(η, V_φ=1)` over the target is a convex quadratic in
/// `√η`; the feasible set is its sublevel set at zero.
pub fn feasible_eta_interval(
    target: &GaussianChannelTarget,
    model: &NoiseModel,
) -> Option<(f64, f64)> {
    let chi = target.chi();
    let tol = feasibility_tolerance(chi);
    let (qa, qb, qd) = model.vacuum_phi_quadratic(chi);
    let f = |u: f64| (qa * u + qb) * u + qd;
    let u_star = if qa > 0.0 { (-qb / (2.0 * qa)).clamp(0.0, 1.0) } else if qb < 0.0 { 1.0 } else { 0.0 };
    if f(u_star) > tol {
        return None;
    }
    let root = |mut inside: f64, mut outside: f64| {
        for _ in 0..200 {
            let mid = 0.5 * (inside + outside);
            if f(mid) <= tol {
                inside = mid;
            } else {
                outside = mid;
            }
            if (inside - outside).abs() < 1e-17 {
                break;
            }
        }
        inside
    };
    let lo = if f(0.0) <= tol { 0.0 } else { root(u_star, 0.0) };
    let hi = if f(1.0) <= tol { 1.0 } else { root(u_star, 1.0) };
    Some((lo * lo, hi * hi))
}

/// Noise-source variance completing the target noise at the given `η`.
/// Returns 1 where `V_φ` does not enter (`η = 1` or `t = 1`).
pub fn v_phi_for(target: &GaussianChannelTarget, model: &NoiseModel, eta: f64) -> Result<f64> {
    let coeff = model.phi_coefficient(eta);
    let chi = target.chi();
    let rest = chi - model.noise(eta, 0.0);
    if coeff <= 1e-300 {
        let fixed = model.noise(eta, 1.0);
        if (fixed - chi).abs() > 1e-6 * chi.max(1.0) {
            return Err(Error::Infeasible(format!(
                "output noise {fixed} cannot be tuned to {chi} at eta = {eta}"
            )));
        }
        return Ok(1.0);
    }
    let v_phi = rest / coeff;
    if v_phi < 1.0 - 1e-6 * v_phi.abs().max(1.0) {
        return Err(Error::Infeasible(format!("required V_phi = {v_phi} is below vacuum")));
    }
    Ok(v_phi.max(1.0))
}

/// Smallest source variance for which the target is reachable at this `g`,
/// by bisection on the squeezing parameter.
pub fn min_epr_variance(
    target: &GaussianChannelTarget,
    g: f64,
    t: f64,
    losses: &FiberLosses,
) -> Result<EprSource> {
    let feasible = |v: f64| {
        let model = NoiseModel { g, t, v_rho: v, losses: *losses };
        feasible_eta_interval(target, &model).is_some()
    };
    if feasible(1.0) {
        return EprSource::from_variance(1.0);
    }
    if !feasible(VARIANCE_SEARCH_CAP) {
        return Err(Error::Infeasible(format!(
            "target noise {} unreachable for any source variance up to {VARIANCE_SEARCH_CAP:e}",
            target.chi()
        )));
    }
    let mut lo = 1.0f64;
    let mut hi = 2.0f64;
    while !feasible(hi) {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if feasible(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo < 1e-14 * hi {
            break;
        }
    }
    EprSource::from_variance(hi)
}

/// Minimum squeezing from the `η = 1` boundary condition, solved as the
/// quadratic `d·γ² + e·γ + f = 0` with
///
/// ```text
/// K0 = t·T3·g·(1−T1) + t·(1−T3) − (χ − 1 + T2)/T2
/// d  = a + (1−t)·(2·T4 − 1) − K0
/// e  = −4·√(a·(1−t)·T4)
/// f  = a + (1−t) + K0
/// ```
///
/// Valid when the optimal mixing at the threshold sits at `η = 1`.
pub fn min_squeezing_closed_form(
    target: &GaussianChannelTarget,
    g: f64,
    t: f64,
    losses: &FiberLosses,
) -> Option<f64> {
    let FiberLosses { t1, t2, t3, t4 } = *losses;
    let a = t * t3 * (g - 1.0);
    let k0 = t * t3 * g * (1.0 - t1) + t * (1.0 - t3) - (target.chi() - 1.0 + t2) / t2;
    let d = a + (1.0 - t) * (2.0 * t4 - 1.0) - k0;
    let e = -4.0 * (a * (1.0 - t) * t4).sqrt();
    let f = a + (1.0 - t) + k0;
    let disc = e * e - 4.0 * d * f;
    if disc < 0.0 || d == 0.0 {
        return None;
    }
    let gamma = (-e - disc.sqrt()) / (2.0 * d);
    (0.0..1.0).contains(&gamma).then_some(gamma)
}

/// Maximum of a function on `[lo, hi]`: a coarse scan picks the bracket,
/// then golden-section refinement to `tol`. Returns `(argmax, max)`.
pub fn golden_section_max(
    lo: f64,
    hi: f64,
    tol: f64,
    mut f: impl FnMut(f64) -> Result<f64>,
) -> Result<(f64, f64)> {
    if hi - lo <= tol {
        let x = 0.5 * (lo + hi);
        return Ok((x, f(x)?));
    }
    const SCAN: usize = 8;
    let h = (hi - lo) / SCAN as f64;
    let mut best = (lo, f(lo)?);
    let mut best_i = 0;
    for i in 1..=SCAN {
        let x = if i == SCAN { hi } else { lo + h * i as f64 };
        let y = f(x)?;
        if y > best.1 {
            best = (x, y);
            best_i = i;
        }
    }
    let mut a = lo + h * best_i.saturating_sub(1) as f64;
    let mut b = if best_i + 1 >= SCAN { hi } else { lo + h * (best_i + 1) as f64 };
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    while b - a > tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d)?;
        }
    }
    let (x, y) = if fc > fd { (c, fc) } else { (d, fd) };
    Ok(if y >= best.1 { (x, y) } else { best })
}

/// Width kept between the mixing transmittance and 1 when `V_φ` would
/// otherwise diverge.
const ETA_EDGE: f64 = 1e-6;

/// Chooses `η` (and the matching `V_φ`) maximizing `objective(η, V_φ)` over
/// the feasible interval. Returns `(η, V_φ, objective)`.
pub fn solve_eta_vphi(
    target: &GaussianChannelTarget,
    model: &NoiseModel,
    tol: f64,
    mut objective: impl FnMut(f64, f64) -> Result<f64>,
) -> Result<(f64, f64, f64)> {
    let (lo, hi) = feasible_eta_interval(target, model).ok_or_else(|| {
        Error::Infeasible(format!("source variance {} below the feasibility threshold", model.v_rho))
    })?;
    let t_degenerate = model.t >= 1.0 - 1e-15;
    let cap = 1.0 - ETA_EDGE;
    let (lo, hi) = if !t_degenerate && hi >= 1.0 {
        // interval squeezed against eta = 1: V_phi drops out there
        if lo >= cap { (1.0, 1.0) } else { (lo, cap) }
    } else {
        (lo, hi)
    };
    if lo >= hi - 1e-15 {
        let v_phi = v_phi_for(target, model, hi)?;
        return Ok((hi, v_phi, objective(hi, v_phi)?));
    }
    let (eta, value) = golden_section_max(lo, hi, tol, |eta| {
        let v_phi = v_phi_for(target, model, eta)?;
        objective(eta, v_phi)
    })?;
    Ok((eta, v_phi_for(target, model, eta)?, value))
}
