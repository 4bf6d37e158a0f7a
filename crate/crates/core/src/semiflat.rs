//! Semiflat Darboux coordinates X^sf_γ(ζ) and the semiflat forms ω_+, ω_3^sf.
//!
//! Forms are 4×4 antisymmetric matrices in the real coordinates
//! (Re u, Im u, θ₁, θ₂); (α∧β)_{kl} = α_k β_l − α_l β_k.

use nalgebra::{DMatrix, Matrix4};
use num::complex::Complex64 as C64;
use num::Zero;

use crate::charge_lattice::{combine, CentralCharge, Charge, Lattice};
use crate::error::{Error, Result};

pub type Form = Matrix4<C64>;

const TAU: f64 = 2.0 * std::f64::consts::PI;

/// Evaluation site: base point u, radius R, torus angles θ.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelPoint {
    pub u: C64,
    pub r: f64,
    pub theta: Vec<f64>,
}

impl ModelPoint {
    pub fn new(u: C64, r: f64, theta: Vec<f64>) -> Result<Self> {
        if !r.is_finite() || r <= 0.0 {
            return Err(Error::InvalidParameter(format!("R = {r} must be positive")));
        }
        if !u.is_finite() || theta.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidParameter("non-finite coordinates".into()));
        }
        Ok(ModelPoint {
            u,
            r,
            theta: theta.into_iter().map(|t| t.rem_euclid(TAU)).collect(),
        })
    }
}

/// X_γ(ζ) with its logarithm on a chosen branch.
#[derive(Clone, Debug, PartialEq)]
pub struct CoordinateValue {
    pub gamma: Charge,
    pub zeta: C64,
    pub value: C64,
    pub log_value: C64,
}

impl CoordinateValue {
    pub fn from_log(gamma: Charge, zeta: C64, log_value: C64) -> Self {
        CoordinateValue {
            gamma,
            zeta,
            value: log_value.exp(),
            log_value,
        }
    }
}

/// θ_γ = Σγⁱθᵢ + π q(γ) mod 2π, with q the quadratic refinement of the
/// lattice; satisfies θ_γ + θ_γ' = θ_{γ+γ'} + π⟨γ,γ'⟩ mod 2π.
pub fn theta_eval(lattice: &Lattice, theta: &[f64], gamma: &Charge) -> f64 {
    let linear: f64 = gamma.coeffs().iter().zip(theta).map(|(c, t)| *c as f64 * t).sum();
    (linear + std::f64::consts::PI * lattice.quadratic_refinement(gamma) as f64).rem_euclid(TAU)
}

fn check_zeta(zeta: C64) -> Result<()> {
    if zeta.norm() == 0.0 || !zeta.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "ζ = {zeta} must be finite and nonzero"
        )));
    }
    Ok(())
}

/// Central charge data frozen at one point: everything semiflat is explicit
/// in Z, dZ/du and θ.
#[derive(Clone, Debug, PartialEq)]
pub struct SemiflatFrame {
    pub lattice: Lattice,
    pub point: ModelPoint,
    pub z: Vec<C64>,
    pub dz: Vec<C64>,
    dual: DMatrix<f64>,
}

impl SemiflatFrame {
    pub fn new(lattice: &Lattice, central: &CentralCharge, point: &ModelPoint) -> Result<Self> {
        let (z, dz) = central.basis_with_derivatives(point.u)?;
        SemiflatFrame::from_values(lattice, point, z, dz)
    }

    pub fn from_values(lattice: &Lattice, point: &ModelPoint, z: Vec<C64>, dz: Vec<C64>) -> Result<Self> {
        let n = lattice.rank_total();
        for len in [z.len(), dz.len(), point.theta.len()] {
            if len != n {
                return Err(Error::DimensionMismatch { expected: n, got: len });
            }
        }
        Ok(SemiflatFrame {
            lattice: lattice.clone(),
            point: point.clone(),
            z,
            dz,
            dual: lattice.dual_pairing(),
        })
    }

    pub fn dual_pairing(&self) -> &DMatrix<f64> {
        &self.dual
    }

    pub fn z_of(&self, gamma: &Charge) -> C64 {
        combine(gamma, &self.z)
    }

    pub fn theta_of(&self, gamma: &Charge) -> f64 {
        theta_eval(&self.lattice, &self.point.theta, gamma)
    }

    /// πR Z_γ/ζ + iθ_γ + πR ζ Z̄_γ.
    pub fn log_xsf(&self, gamma: &Charge, zeta: C64) -> C64 {
        let z = self.z_of(gamma);
        let pr = std::f64::consts::PI * self.point.r;
        pr * z / zeta + C64::new(0.0, self.theta_of(gamma)) + pr * zeta * z.conj()
    }

    pub fn xsf(&self, gamma: &Charge, zeta: C64) -> Result<CoordinateValue> {
        self.lattice.check(gamma)?;
        check_zeta(zeta)?;
        Ok(CoordinateValue::from_log(
            gamma.clone(),
            zeta,
            self.log_xsf(gamma, zeta),
        ))
    }

    fn require_four_dims(&self) -> Result<()> {
        if self.lattice.rank_total() != 2 || self.lattice.gauge_rank() != 2 {
            return Err(Error::Unsupported("semiflat forms need a rank-2 lattice".into()));
        }
        Ok(())
    }

    /// d log X^sf_{e_i} over (Re u, Im u, θ₁, θ₂) for each basis element.
    pub fn dlog_xsf_basis(&self, zeta: C64) -> Vec<[C64; 4]> {
        let pr = std::f64::consts::PI * self.point.r;
        let i = C64::new(0.0, 1.0);
        (0..self.z.len())
            .map(|k| {
                let a = self.dz[k];
                let mut row = [C64::zero(); 4];
                row[0] = pr * a / zeta + pr * zeta * a.conj();
                row[1] = pr * i * a / zeta - pr * zeta * i * a.conj();
                row[2 + k] = i;
                row
            })
            .collect()
    }

    /// (1/8π²R) Σ M^{ij} d log X_i ∧ d log X_j.
    pub fn varpi_sf(&self, zeta: C64) -> Result<Form> {
        self.require_four_dims()?;
        check_zeta(zeta)?;
        Ok(pairing_form(&self.dual, &self.dlog_xsf_basis(zeta)) / C64::from(varpi_denominator(self.point.r)))
    }

    fn dz_rows(&self) -> Vec<[C64; 4]> {
        let i = C64::new(0.0, 1.0);
        self.dz.iter().map(|a| [*a, i * a, C64::zero(), C64::zero()]).collect()
    }

    fn dtheta_rows(&self) -> Vec<[C64; 4]> {
        (0..self.z.len())
            .map(|k| {
                let mut row = [C64::zero(); 4];
                row[2 + k] = C64::new(1.0, 0.0);
                row
            })
            .collect()
    }

    /// ω_+ = −(1/2π)⟨dZ ∧ dθ⟩.
    pub fn omega_plus(&self) -> Result<Form> {
        self.require_four_dims()?;
        let f = mixed_pairing_form(&self.dual, &self.dz_rows(), &self.dtheta_rows());
        Ok(f * C64::from(-1.0 / TAU))
    }

    /// ω_3^sf = (R/4)⟨dZ ∧ dZ̄⟩ − (1/8π²R)⟨dθ ∧ dθ⟩.
    pub fn omega3(&self) -> Result<Form> {
        self.require_four_dims()?;
        let dz = self.dz_rows();
        let dzbar: Vec<[C64; 4]> = dz.iter().map(|r| r.map(|c| c.conj())).collect();
        let base = mixed_pairing_form(&self.dual, &dz, &dzbar) * C64::from(self.point.r / 4.0);
        let th = self.dtheta_rows();
        let fiber = mixed_pairing_form(&self.dual, &th, &th) / C64::from(varpi_denominator(self.point.r));
        Ok(base - fiber)
    }

    /// −(i/2ζ)ω_+ + ω_3 − (i/2)ζ conj(ω_+).
    pub fn twistor_family(&self, zeta: C64) -> Result<Form> {
        Ok(twistor_combination(&self.omega_plus()?, &self.omega3()?, zeta))
    }
}

/// 8π²R.
pub fn varpi_denominator(r: f64) -> f64 {
    8.0 * std::f64::consts::PI * std::f64::consts::PI * r
}

/// −(i/2ζ)ω_+ + ω_3 − (i/2)ζ conj(ω_+).
pub fn twistor_combination(omega_plus: &Form, omega3: &Form, zeta: C64) -> Form {
    let i = C64::new(0.0, 1.0);
    omega_plus * (-i / (2.0 * zeta)) + omega3 - omega_plus.map(|c| c.conj()) * (0.5 * i * zeta)
}

/// Σ M^{ij} α_i ∧ β_j as a matrix.
pub fn mixed_pairing_form(m: &DMatrix<f64>, alpha: &[[C64; 4]], beta: &[[C64; 4]]) -> Form {
    let mut out = Form::zeros();
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let c = m[(i, j)];
            if c == 0.0 {
                continue;
            }
            for k in 0..4 {
                for l in 0..4 {
                    out[(k, l)] += c * (alpha[i][k] * beta[j][l] - alpha[i][l] * beta[j][k]);
                }
            }
        }
    }
    out
}

/// Σ M^{ij} α_i ∧ α_j.
pub fn pairing_form(m: &DMatrix<f64>, alpha: &[[C64; 4]]) -> Form {
    mixed_pairing_form(m, alpha, alpha)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pentagon_lattice() -> Lattice {
        Lattice::new(vec![vec![0, 1], vec![-1, 0]], 0).unwrap()
    }

    fn frame() -> SemiflatFrame {
        let point = ModelPoint::new(C64::new(0.3, 0.2), 3.0, vec![0.4, 2.1]).unwrap();
        SemiflatFrame::from_values(
            &pentagon_lattice(),
            &point,
            vec![C64::new(1.1, 0.2), C64::new(-0.1, 0.9)],
            vec![C64::new(0.5, -0.1), C64::new(0.2, 0.6)],
        )
        .unwrap()
    }

    #[test]
    fn theta_twisting() {
        let l = pentagon_lattice();
        let th = [0.4, 2.1];
        let g1 = Charge::new([1, 0]);
        let g2 = Charge::new([0, 1]);
        assert!((theta_eval(&l, &th, &g1) - 0.4).abs() < 1e-15);
        let sum = theta_eval(&l, &th, &(&g1 + &g2));
        let expected = (0.4 + 2.1 - std::f64::consts::PI).rem_euclid(TAU);
        assert!((sum - expected).abs() < 1e-12);
        let g = Charge::new([3, -2]);
        let s = theta_eval(&l, &th, &g) + theta_eval(&l, &th, &-&g);
        assert!((s.rem_euclid(TAU)).min(TAU - s.rem_euclid(TAU)) < 1e-12);
    }

    #[test]
    fn modulus_on_own_ray() {
        let f = frame();
        let g = Charge::new([1, 1]);
        let z = f.z_of(&g);
        let zeta = -z / z.norm();
        let x = f.xsf(&g, zeta).unwrap();
        let want = (-2.0 * std::f64::consts::PI * 3.0 * z.norm()).exp();
        assert!((x.value.norm() / want - 1.0).abs() < 1e-12);
    }

    #[test]
    fn reality_of_xsf() {
        let f = frame();
        let g = Charge::new([2, -1]);
        let zeta = C64::new(0.3, -0.7);
        let a = f.xsf(&g, -1.0 / zeta.conj()).unwrap().value;
        let b = f.xsf(&-&g, zeta).unwrap().value.conj();
        assert!((a / b - 1.0).norm() < 1e-12);
    }

    #[test]
    fn block_structure() {
        let f = frame();
        let wp = f.omega_plus().unwrap();
        assert_eq!(wp[(2, 3)], C64::zero());
        assert_eq!(wp[(0, 1)], C64::zero());
        let w3 = f.omega3().unwrap();
        for (k, l) in [(0, 2), (0, 3), (1, 2), (1, 3)] {
            assert_eq!(w3[(k, l)], C64::zero());
        }
        // −(1/8π²R)·M^{12}·2 on dθ₁∧dθ₂
        let m = f.dual_pairing();
        let want = -2.0 * m[(0, 1)] / varpi_denominator(3.0);
        assert!((w3[(2, 3)].re - want).abs() < 1e-15);
    }

    #[test]
    fn r_scaling() {
        let f = frame();
        let mut p2 = f.point.clone();
        p2.r *= 2.0;
        let f2 = SemiflatFrame::from_values(&f.lattice, &p2, f.z.clone(), f.dz.clone()).unwrap();
        let (a, b) = (f.omega3().unwrap(), f2.omega3().unwrap());
        assert!((b[(0, 1)] - 2.0 * a[(0, 1)]).norm() < 1e-15);
        assert!((b[(2, 3)] - 0.5 * a[(2, 3)]).norm() < 1e-15);
    }

    #[test]
    fn varpi_identity() {
        let f = frame();
        for k in 0..12 {
            let zeta = C64::from_polar(1.0, 0.3 + k as f64 * 0.5);
            let diff = f.varpi_sf(zeta).unwrap() - f.twistor_family(zeta).unwrap();
            assert!(diff.iter().all(|c| c.norm() < 1e-13));
        }
    }

    #[test]
    fn zeta_zero_rejected() {
        let f = frame();
        assert!(f.xsf(&Charge::new([1, 0]), C64::zero()).is_err());
    }
}
