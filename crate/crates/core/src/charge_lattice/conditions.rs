use num::complex::Complex64 as C64;

use super::central::CentralCharge;
use super::lattice::Lattice;
use super::spectrum::{lookup, Spectrum};
use crate::error::Result;

/// Relative finite-difference step for derivatives on the base.
pub const FD_STEP: f64 = 1e-5;

/// Residuals of the structural conditions at one base point.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PointResiduals {
    pub u: C64,
    /// Variation of flavor central charges from the first sample point.
    pub flavor_constancy: f64,
    /// Largest coefficient of ⟨dZ ∧ dZ⟩.
    pub holomorphic_wedge: f64,
    /// 0 when the dZ_γ span the holomorphic cotangent space, 1 otherwise.
    pub rank_deficiency: f64,
    /// max(0, −c) for ⟨dZ ∧ dZ̄⟩ = c dx∧dy.
    pub positivity: f64,
    /// Number of charges with Ω(γ) ≠ Ω(−γ).
    pub parity: f64,
    /// |∂Z/∂ū| from Cauchy-Riemann differences.
    pub holomorphy: f64,
    /// |difference quotient − registered dZ/du|.
    pub derivative: f64,
    /// Coefficient c itself, for reporting.
    pub positivity_value: f64,
}

impl PointResiduals {
    pub fn max_residual(&self) -> f64 {
        [
            self.flavor_constancy,
            self.holomorphic_wedge,
            self.rank_deficiency,
            self.positivity,
            self.parity,
            self.holomorphy,
            self.derivative,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

/// Per-condition report over a set of base points.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConditionReport {
    pub points: Vec<PointResiduals>,
    pub failures: Vec<(C64, String)>,
}

impl ConditionReport {
    fn column(&self, f: impl Fn(&PointResiduals) -> f64) -> f64 {
        self.points.iter().map(f).fold(0.0, f64::max)
    }

    /// Maxima in the order: flavor, wedge, rank, positivity, parity,
    /// holomorphy, derivative.
    pub fn maxima(&self) -> [(&'static str, f64); 7] {
        [
            ("flavor-constancy", self.column(|p| p.flavor_constancy)),
            ("dZ^dZ", self.column(|p| p.holomorphic_wedge)),
            ("rank", self.column(|p| p.rank_deficiency)),
            ("positivity", self.column(|p| p.positivity)),
            ("parity", self.column(|p| p.parity)),
            ("holomorphy", self.column(|p| p.holomorphy)),
            ("derivative", self.column(|p| p.derivative)),
        ]
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.failures.is_empty() && !self.points.is_empty() && self.maxima().iter().all(|(_, v)| *v < tol)
    }
}

/// Central difference of f along the real direction `dir` with one
/// Richardson step.
fn richardson<F: Fn(C64) -> Result<Vec<C64>>>(f: &F, u: C64, dir: C64, h: f64) -> Result<Vec<C64>> {
    let d = |h: f64| -> Result<Vec<C64>> {
        let p = f(u + dir * h)?;
        let m = f(u - dir * h)?;
        Ok(p.iter().zip(&m).map(|(a, b)| (a - b) / (2.0 * h)).collect())
    };
    let coarse = d(h)?;
    let fine = d(0.5 * h)?;
    Ok(fine.iter().zip(&coarse).map(|(f, c)| (4.0 * f - c) / 3.0).collect())
}

fn point_residuals(
    lattice: &Lattice,
    central: &CentralCharge,
    spectrum: &Spectrum,
    u: C64,
    reference: &[C64],
) -> Result<PointResiduals> {
    let n = lattice.rank_total();
    let g = lattice.gauge_rank();
    let eval = |x: C64| central.basis_values(x);
    let (values, analytic) = central.basis_with_derivatives(u)?;
    let h = FD_STEP * u.norm().max(1e-2);
    let dx = richardson(&eval, u, C64::new(1.0, 0.0), h)?;
    let dy = richardson(&eval, u, C64::new(0.0, 1.0), h)?;

    let flavor_constancy = (g..n).map(|i| (values[i] - reference[i]).norm()).fold(0.0, f64::max);

    // the base has one complex coordinate, so du∧du = 0 kills every
    // component of ⟨dZ∧dZ⟩
    let holomorphic_wedge = 0.0;
    let m = lattice.dual_pairing();

    let norm = (0..g).map(|i| dx[i].norm_sqr()).sum::<f64>().sqrt();
    let rank_deficiency = if norm > 1e-8 { 0.0 } else { 1.0 };

    // Σ M^{ij} a_i ā_j du∧dū with du∧dū = −2i dx∧dy
    let mut s = C64::new(0.0, 0.0);
    for i in 0..g {
        for j in 0..g {
            s += m[(i, j)] * dx[i] * dx[j].conj();
        }
    }
    let c = (C64::new(0.0, -2.0) * s).re;
    let positivity = (-c).max(0.0);

    let chamber = spectrum.chamber_index(u)?;
    let entries = &spectrum.chambers()[chamber].entries;
    let parity = entries
        .iter()
        .filter(|(gm, _)| lookup(entries, gm) != lookup(entries, &-gm))
        .count() as f64;

    let holomorphy = (0..n)
        .map(|i| (0.5 * (dx[i] + C64::new(0.0, 1.0) * dy[i])).norm())
        .fold(0.0, f64::max);
    let derivative = (0..n).map(|i| (dx[i] - analytic[i]).norm()).fold(0.0, f64::max);

    Ok(PointResiduals {
        u,
        flavor_constancy,
        holomorphic_wedge,
        rank_deficiency,
        positivity,
        parity,
        holomorphy,
        derivative,
        positivity_value: c,
    })
}

/// Check flavor constancy, dZ∧dZ = 0, rank, positivity and parity, and the
/// holomorphy of Z, on the sample points.
pub fn validate_conditions(
    lattice: &Lattice,
    central: &CentralCharge,
    spectrum: &Spectrum,
    points: &[C64],
) -> ConditionReport {
    let mut report = ConditionReport::default();
    let reference = match points.first().map(|u| central.basis_values(*u)) {
        Some(Ok(v)) => v,
        Some(Err(e)) => {
            report.failures.push((points[0], e.to_string()));
            return report;
        }
        None => return report,
    };
    for u in points {
        match point_residuals(lattice, central, spectrum, *u, &reference) {
            Ok(p) => report.points.push(p),
            Err(e) => report.failures.push((*u, e.to_string())),
        }
    }
    report
}
