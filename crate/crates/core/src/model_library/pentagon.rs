//! Pentagon central charges Z(γ) = (1/π)∮_γ y dz on y² = z³ − 3Λ²z + u.
//!
//! γ₁ is the cycle collapsing at u = −2Λ³ and γ₂ the cycle collapsing at
//! u = +2Λ³, oriented so that ⟨γ₁, γ₂⟩ = 1 is compatible with positivity of
//! ⟨dZ ∧ dZ̄⟩ and Z_{γ₁}(0) > 0 (Λ = 1).

use std::sync::OnceLock;

use num::complex::Complex64 as C64;

use super::periods::{normalized_period, track, SegmentRule};
use crate::error::{Error, Result};

/// sin of the angle between Z_{γ₁} and Z_{γ₂} below which a point counts as
/// lying on the wall.
pub const WALL_TOLERANCE: f64 = 1e-9;

fn rule() -> &'static SegmentRule {
    static RULE: OnceLock<SegmentRule> = OnceLock::new();
    RULE.get_or_init(|| SegmentRule::new(128))
}

/// (Z, dZ/du) for γ₁ and γ₂.
pub fn periods(lambda: C64, u: C64) -> Result<[(C64, C64); 2]> {
    let v = u / (lambda * lambda * lambda);
    let curve = track(v)?;
    let (c0, d0) = normalized_period(&curve, 0, rule())?;
    let (c1, d1) = normalized_period(&curve, 1, rule())?;
    let scale = lambda.powf(2.5);
    let dscale = lambda.powf(-0.5);
    Ok([(-c1 * scale, -d1 * dscale), (c0 * scale, d0 * dscale)])
}

/// sin of the oriented angle from Z_{γ₂} to Z_{γ₁}; negative inside the wall.
pub fn wall_indicator(lambda: C64, u: C64) -> Result<f64> {
    let [(z1, _), (z2, _)] = periods(lambda, u)?;
    Ok((z1 * z2.conj()).im / (z1.norm() * z2.norm()))
}

/// Chamber index: 0 inside the wall, 1 for the outer region on the upper
/// side of the cuts, 2 for the outer region below them.
///
/// The outer region is an annulus; the trivialization cuts it into two
/// pieces whose labels differ by the monodromy around ±2Λ³.
pub fn chamber(lambda: C64, u: C64) -> Result<usize> {
    let s = wall_indicator(lambda, u)?;
    if s.abs() < WALL_TOLERANCE {
        return Err(Error::WallProximity(format!("u = {u} lies on the wall")));
    }
    if s < 0.0 {
        return Ok(0);
    }
    let v = u / (lambda * lambda * lambda);
    Ok(if v.im > 0.0 || (v.im == 0.0 && v.re.abs() >= 2.0) {
        1
    } else {
        2
    })
}

/// Point where the ray from the origin in direction e^{iφ} meets the wall,
/// located by bisection on the wall indicator.
pub fn wall_point(lambda: C64, phi: f64) -> Result<C64> {
    let dir = C64::from_polar(1.0, phi);
    let scale = lambda.norm().powi(3);
    let sign_at = |r: f64| -> Result<f64> { wall_indicator(lambda, dir * (r * scale)) };
    let mut lo = 0.0;
    let mut hi = 0.5;
    while sign_at(hi)? < 0.0 {
        lo = hi;
        hi *= 2.0;
        if hi > 1e3 {
            return Err(Error::InvalidParameter(format!("no wall crossing in direction {phi}")));
        }
    }
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        match sign_at(mid) {
            Ok(s) if s < 0.0 => lo = mid,
            Ok(_) => hi = mid,
            Err(e) => return Err(e),
        }
        if hi - lo < 1e-15 * hi {
            break;
        }
    }
    Ok(dir * (0.5 * (lo + hi) * scale))
}
