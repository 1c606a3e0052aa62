use super::EprSource;
use crate::error::{Error, Result};

/// Equivalent Gaussian source and distribution transmittance after an NLA of
/// gain `gain` on the arm that crossed a link of transmittance `t4`:
/// `γ^G = γ·√(1 + (G²−1)T4)`, `T4^G = G²T4 / (1 + (G²−1)T4)`.
pub fn nla_equivalent(source: &EprSource, t4: f64, gain: f64) -> Result<(EprSource, f64)> {
    if !(gain >= 1.0) || !gain.is_finite() {
        return Err(Error::Domain(format!("NLA gain must be >= 1, got {gain}")));
    }
    if !(t4 > 0.0 && t4 <= 1.0) {
        return Err(Error::Domain(format!("T4 must lie in (0, 1], got {t4}")));
    }
    if gain == 1.0 {
        return Ok((*source, t4));
    }
    let t4g = nla_transmittance(t4, gain)?;
    let boost = 1.0 + (gain * gain - 1.0) * t4;
    let squeezing = source.squeezing() * boost.sqrt();
    if squeezing >= 1.0 {
        return Err(Error::GainTooLarge { gain, squeezing });
    }
    Ok((EprSource::from_squeezing(squeezing)?, t4g))
}

/// Equivalent distribution transmittance `T4^G = G²T4 / (1 + (G²−1)T4)`.
pub fn nla_transmittance(t4: f64, gain: f64) -> Result<f64> {
    if !(gain >= 1.0) || !gain.is_finite() {
        return Err(Error::Domain(format!("NLA gain must be >= 1, got {gain}")));
    }
    if !(t4 > 0.0 && t4 <= 1.0) {
        return Err(Error::Domain(format!("T4 must lie in (0, 1], got {t4}")));
    }
    if gain == 1.0 {
        return Ok(t4);
    }
    Ok(gain * gain * t4 / (1.0 + (gain * gain - 1.0) * t4))
}

/// Largest gain keeping the equivalent state Gaussian (`γ^G = 1`):
/// `G_max = √(1 + (1/γ² − 1)/T4)`.
pub fn max_gain(source: &EprSource, t4: f64) -> Result<f64> {
    let g = source.squeezing();
    if g >= 1.0 {
        return Err(Error::Domain("squeezing must be < 1".into()));
    }
    if !(t4 > 0.0 && t4 <= 1.0) {
        return Err(Error::Domain(format!("T4 must lie in (0, 1], got {t4}")));
    }
    if g == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok((1.0 + (1.0 / (g * g) - 1.0) / t4).sqrt())
}

/// Physical source that an NLA of gain `gain` maps onto `effective`.
pub fn source_before_nla(effective: &EprSource, t4: f64, gain: f64) -> Result<EprSource> {
    if !(gain >= 1.0) {
        return Err(Error::Domain(format!("NLA gain must be >= 1, got {gain}")));
    }
    let boost = 1.0 + (gain * gain - 1.0) * t4;
    EprSource::from_squeezing(effective.squeezing() / boost.sqrt())
}

/// Smallest gain in `[1, G_max)` for which `admissible(G)` holds, by bisection
/// to `tol`. `admissible` must be monotone (false below, true above).
/// Returns `None` when no gain below `G_max` is admissible.
pub fn min_gain(
    source: &EprSource,
    t4: f64,
    tol: f64,
    mut admissible: impl FnMut(f64) -> Result<bool>,
) -> Result<Option<f64>> {
    if admissible(1.0)? {
        return Ok(Some(1.0));
    }
    let g_max = max_gain(source, t4)?;
    // stay strictly inside the Gaussian region
    let mut hi = if g_max.is_finite() { 1.0 + (g_max - 1.0) * (1.0 - 1e-9) } else { 1e6 };
    if !admissible(hi)? {
        return Ok(None);
    }
    let mut lo = 1.0;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if admissible(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Some(hi))
}
