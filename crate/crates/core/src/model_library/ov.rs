//! Ooguri-Vafa central charges on the punctured disc |u| < |Λ|.
//!
//! Basis order is (γ_e, γ_m) with ⟨γ_m, γ_e⟩ = 1. The logarithm is the
//! principal branch of log(u/Λ); the chamber excludes its cut.

use num::complex::Complex64 as C64;

use crate::charge_lattice::Charge;
use crate::error::{Error, Result};
use crate::quadrature::adaptive_gk15;
use crate::semiflat::{CoordinateValue, SemiflatFrame};

/// Angular margin kept from the branch cut of log(u/Λ).
const CUT_MARGIN: f64 = 1e-12;

/// (Z, dZ/du) for γ_e and γ_m.
pub fn periods(lambda: C64, u: C64) -> Result<[(C64, C64); 2]> {
    let t = u / lambda;
    if t.norm() < 1e-14 {
        return Err(Error::DegeneratePoint(format!("u = {u} is the singular fiber")));
    }
    if t.norm() >= 1.0 {
        return Err(Error::OutsideChamber(format!("|u| = {} not below |Λ|", u.norm())));
    }
    if std::f64::consts::PI - t.arg().abs() < CUT_MARGIN {
        return Err(Error::OutsideChamber(format!("u = {u} lies on the branch cut")));
    }
    let two_pi_i = C64::new(0.0, 2.0 * std::f64::consts::PI);
    let log = t.ln();
    let zm = (u * log - u) / two_pi_i;
    let dzm = log / two_pi_i;
    Ok([(u, C64::new(1.0, 0.0)), (zm, dzm)])
}

/// Corrected coordinate X_γ(ζ) of the Ooguri-Vafa model by direct
/// quadrature of the one-step formula.
///
/// The rays ℓ_{±γ_e} are parametrized as ζ' = d·t with t = x/(1 − x) and the
/// x-integral is done by adaptive Gauss-Kronrod, independently of the panel
/// rule used by the iteration solver. `frame` must be an Ooguri-Vafa frame.
pub fn ov_oracle(frame: &SemiflatFrame, gamma: &Charge, zeta: C64, delta: f64) -> Result<CoordinateValue> {
    frame.lattice.check(gamma)?;
    let ge = Charge::new([1, 0]);
    let ze = frame.z_of(&ge);
    let mut correction = C64::new(0.0, 0.0);
    for sign in [1i64, -1] {
        let g = ge.scale(sign);
        let d = -ze * sign as f64 / ze.norm();
        if (zeta / d).arg().abs() < delta {
            return Err(Error::DirectedLimitRequired(format!("ζ = {zeta} is on the ray of {g}")));
        }
        let p = frame.lattice.pair(gamma, &g)?;
        if p == 0 {
            continue;
        }
        let integrand = |x: f64| {
            let t = x / (1.0 - x);
            let zp = d * t;
            let log_x = frame.log_xsf(&g, zp);
            if log_x.re < -700.0 {
                return C64::new(0.0, 0.0);
            }
            let l = (1.0 - log_x.exp()).ln();
            // dζ'/ζ' = dt/t and dt = dx/(1 − x)²
            let jac = 1.0 / (t * (1.0 - x) * (1.0 - x));
            (zp + zeta) / (zp - zeta) * l * jac
        };
        let (val, _) = adaptive_gk15(integrand, 0.0, 1.0, 1e-15, 4000);
        correction += p as f64 * val;
    }
    let four_pi_i = C64::new(0.0, 4.0 * std::f64::consts::PI);
    let log = frame.log_xsf(gamma, zeta) - correction / four_pi_i;
    Ok(CoordinateValue::from_log(gamma.clone(), zeta, log))
}
