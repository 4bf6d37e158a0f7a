//! The holomorphic symplectic family ϖ(ζ) built from the corrected
//! coordinates, its Laurent coefficients (ω_+, ω_3), and the metric.
//!
//! Forms are 4 × 4 matrices over (Re u, Im u, θ₁, θ₂) with
//! ω(v, w) = vᵀ·ω·w. Derivatives of log X are central differences over
//! points displaced in each coordinate, each one a full re-solve on the
//! quadrature grids of the base point.

use nalgebra::{Matrix3, Matrix4, SymmetricEigen, Vector3};
use num::complex::Complex64 as C64;
use num::Zero;
use rayon::prelude::*;

use crate::charge_lattice::{rays_from_basis, Charge};
use crate::error::{Error, Result};
use crate::model_library::ModelDefinition;
use crate::quadrature::Side;
use crate::rh_solver::{Solution, SolverOptions};
use crate::semiflat::{pairing_form, varpi_denominator, Form, ModelPoint, SemiflatFrame};

pub type RealForm = Matrix4<f64>;

/// Finite-difference steps: h_u = max(rel_u·|u|, min_u), h_θ = theta.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FdSteps {
    pub rel_u: f64,
    pub min_u: f64,
    pub theta: f64,
}

impl Default for FdSteps {
    fn default() -> Self {
        FdSteps {
            rel_u: 1e-4,
            min_u: 1e-4,
            theta: 1e-4,
        }
    }
}

impl FdSteps {
    pub fn scaled(self, f: f64) -> Self {
        FdSteps {
            rel_u: self.rel_u * f,
            min_u: self.min_u * f,
            theta: self.theta * f,
        }
    }

    fn sizes(&self, u: C64) -> [f64; 4] {
        let hu = (self.rel_u * u.norm()).max(self.min_u);
        [hu, hu, self.theta, self.theta]
    }
}

/// Where log X is evaluated: off the rays, or on BPS ray `ray` at
/// ζ = direction·e^s continued from one side.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Probe {
    Off(C64),
    OnRay { ray: usize, s: f64, side: Side },
}

fn displaced(point: &ModelPoint, coord: usize, h: f64) -> Result<ModelPoint> {
    let mut u = point.u;
    let mut theta = point.theta.clone();
    match coord {
        0 => u += h,
        1 => u += C64::new(0.0, h),
        k => theta[k - 2] += h,
    }
    ModelPoint::new(u, point.r, theta)
}

/// A base point and its eight displacements, either semiflat or solved.
pub struct PointFamily {
    pub base_frame: SemiflatFrame,
    pub base: Option<Solution>,
    steps: [f64; 4],
    /// (minus, plus) per coordinate
    frames: Vec<(SemiflatFrame, SemiflatFrame)>,
    solutions: Vec<(Solution, Solution)>,
}

impl PointFamily {
    /// Semiflat coordinates only.
    pub fn semiflat(model: &ModelDefinition, point: &ModelPoint, steps: FdSteps) -> Result<Self> {
        let h = steps.sizes(point.u);
        let frame_at = |p: &ModelPoint| SemiflatFrame::new(&model.lattice, &model.central, p);
        let frames = (0..4)
            .map(|c| {
                Ok((
                    frame_at(&displaced(point, c, -h[c])?)?,
                    frame_at(&displaced(point, c, h[c])?)?,
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(PointFamily {
            base_frame: frame_at(point)?,
            base: None,
            steps: h,
            frames,
            solutions: Vec::new(),
        })
    }

    /// Re-solve around a converged solution with the same active charges
    /// and node layout.
    pub fn around(model: &ModelDefinition, base: Solution, steps: FdSteps) -> Result<Self> {
        let point = base.frame.point.clone();
        let h = steps.sizes(point.u);
        let active: Vec<(Charge, i64)> = base
            .grids()
            .iter()
            .flat_map(|g| g.ray.charges.iter().map(|c| (c.charge.clone(), c.omega)))
            .collect();
        let solve_at = |p: ModelPoint| -> Result<Solution> {
            let frame = SemiflatFrame::new(&model.lattice, &model.central, &p)?;
            let rays = rays_from_basis(&active, &frame.z, p.r, 0.0)?;
            base.resolve_at(frame, &rays)
        };
        let jobs: Vec<(usize, f64)> = (0..4).flat_map(|c| [(c, -h[c]), (c, h[c])]).collect();
        let mut solved = jobs
            .par_iter()
            .map(|&(c, hc)| solve_at(displaced(&point, c, hc)?))
            .collect::<Result<Vec<_>>>()?
            .into_iter();
        let mut solutions = Vec::with_capacity(4);
        for _ in 0..4 {
            let minus = solved.next().expect("eight displaced solutions");
            let plus = solved.next().expect("eight displaced solutions");
            solutions.push((minus, plus));
        }
        let frames = solutions
            .iter()
            .map(|(m, p)| (m.frame.clone(), p.frame.clone()))
            .collect();
        Ok(PointFamily {
            base_frame: base.frame.clone(),
            base: Some(base),
            steps: h,
            frames,
            solutions,
        })
    }

    fn zeta_of(&self, probe: Probe) -> Result<C64> {
        match probe {
            Probe::Off(z) => Ok(z),
            Probe::OnRay { ray, s, .. } => {
                let base = self
                    .base
                    .as_ref()
                    .ok_or_else(|| Error::InvalidParameter("semiflat data have no rays".into()))?;
                let g = base
                    .grids()
                    .get(ray)
                    .ok_or_else(|| Error::InvalidParameter(format!("no ray {ray}")))?;
                Ok(g.ray.direction * s.exp())
            }
        }
    }

    fn log_x(&self, frame: &SemiflatFrame, sol: Option<&Solution>, gamma: &Charge, probe: Probe) -> Result<C64> {
        let zeta = self.zeta_of(probe)?;
        let mut v = frame.log_xsf(gamma, zeta);
        if let Some(sol) = sol {
            v += match probe {
                Probe::Off(z) => {
                    if let Some(k) = sol.ray_near(z) {
                        return Err(Error::DirectedLimitRequired(format!("ζ = {z} is within δ of ray {k}")));
                    }
                    sol.upsilon(gamma, z, None)
                }
                Probe::OnRay { ray, side, .. } => sol.upsilon(gamma, zeta, Some((ray, side))),
            };
        }
        Ok(v)
    }

    /// d log X_γ over (Re u, Im u, θ₁, θ₂) by central differences.
    pub fn dlog_x(&self, gamma: &Charge, probe: Probe) -> Result<[C64; 4]> {
        let mut row = [C64::zero(); 4];
        for c in 0..4 {
            let (fm, fp) = &self.frames[c];
            let (sm, sp) = match self.solutions.get(c) {
                Some((m, p)) => (Some(m), Some(p)),
                None => (None, None),
            };
            let mut d = self.log_x(fp, sp, gamma, probe)? - self.log_x(fm, sm, gamma, probe)?;
            // θ enters through iθ mod 2π
            d.im = (d.im + std::f64::consts::PI).rem_euclid(std::f64::consts::TAU) - std::f64::consts::PI;
            row[c] = d / (2.0 * self.steps[c]);
        }
        Ok(row)
    }

    /// ϖ(ζ) = (1/8π²R) Σ M^{ij} d log X_i ∧ d log X_j.
    pub fn varpi(&self, probe: Probe) -> Result<Form> {
        let lattice = &self.base_frame.lattice;
        let rows = (0..lattice.rank_total())
            .map(|i| self.dlog_x(&lattice.basis(i), probe))
            .collect::<Result<Vec<_>>>()?;
        Ok(pairing_form(self.base_frame.dual_pairing(), &rows) / C64::from(varpi_denominator(self.base_frame.point.r)))
    }
}

/// Laurent coefficients of ϖ(ζ) = a/ζ + b + cζ with ω_+ = 2i·a, ω_3 = b.
#[derive(Clone, Debug, PartialEq)]
pub struct LaurentFit {
    pub omega_plus: Form,
    pub omega3: Form,
    pub c: Form,
    /// max entrywise deviation of the samples from the fit
    pub residual: f64,
    /// max |c + (i/2)·conj(ω_+)|
    pub reality_defect: f64,
    /// max |Im ω_3|
    pub omega3_imaginary: f64,
}

/// Least-squares fit of each entry to a/ζ + b + cζ. Fails with the Laurent
/// residual error when the deviation exceeds `tolerance`.
pub fn laurent_fit(samples: &[(C64, Form)], tolerance: f64) -> Result<LaurentFit> {
    if samples.len() < 5 {
        return Err(Error::InvalidParameter(format!(
            "Laurent fit needs at least 5 samples, got {}",
            samples.len()
        )));
    }
    let basis = |z: C64| [1.0 / z, C64::new(1.0, 0.0), z];
    let mut normal = Matrix3::<C64>::zeros();
    for (z, _) in samples {
        let b = basis(*z);
        for i in 0..3 {
            for j in 0..3 {
                normal[(i, j)] += b[i].conj() * b[j];
            }
        }
    }
    let lu = normal.lu();
    let mut coef = [Form::zeros(), Form::zeros(), Form::zeros()];
    for k in 0..4 {
        for l in 0..4 {
            let mut rhs = Vector3::<C64>::zeros();
            for (z, f) in samples {
                let b = basis(*z);
                for i in 0..3 {
                    rhs[i] += b[i].conj() * f[(k, l)];
                }
            }
            let x = lu
                .solve(&rhs)
                .ok_or_else(|| Error::InvalidParameter("ζ samples do not determine the fit".into()))?;
            for i in 0..3 {
                coef[i][(k, l)] = x[i];
            }
        }
    }
    let mut residual = 0.0f64;
    for (z, f) in samples {
        let b = basis(*z);
        let model = coef[0] * b[0] + coef[1] * b[1] + coef[2] * b[2];
        residual = residual.max((f - model).iter().map(|c| c.norm()).fold(0.0, f64::max));
    }
    let i = C64::new(0.0, 1.0);
    let omega_plus = coef[0] * (2.0 * i);
    let expected_c = omega_plus.map(|c| c.conj()) * (-0.5 * i);
    let fit = LaurentFit {
        reality_defect: (coef[2] - expected_c).iter().map(|c| c.norm()).fold(0.0, f64::max),
        omega3_imaginary: coef[1].iter().map(|c| c.im.abs()).fold(0.0, f64::max),
        omega_plus,
        omega3: coef[1],
        c: coef[2],
        residual,
    };
    if residual > tolerance {
        return Err(Error::LaurentResidual(residual));
    }
    Ok(fit)
}

/// Coefficient of dx⁰∧dx¹∧dx²∧dx³ in α∧β.
pub fn wedge4(a: &RealForm, b: &RealForm) -> f64 {
    a[(0, 1)] * b[(2, 3)] - a[(0, 2)] * b[(1, 3)] + a[(0, 3)] * b[(1, 2)] + a[(1, 2)] * b[(0, 3)]
        - a[(1, 3)] * b[(0, 2)]
        + a[(2, 3)] * b[(0, 1)]
}

/// Sign relating ω_3(·, J·) to g, fixed on the semiflat reference.
pub const METRIC_SIGN: f64 = 1.0;

/// Metric, complex structure and triple-algebra diagnostics at one point.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricSample {
    pub omega: [RealForm; 3],
    pub g: RealForm,
    pub j: RealForm,
    pub eigenvalues: [f64; 4],
    /// max |J² + I|
    pub j_defect: f64,
    /// max |g(J·, J·) − g|
    pub compatibility: f64,
    /// asymmetry of ω_3(·, J·) before symmetrization
    pub asymmetry: f64,
    /// [ω₁², ω₂², ω₃²] and [ω₁ω₂, ω₁ω₃, ω₂ω₃] as 4-form coefficients
    pub squares: [f64; 3],
    pub mixed: [f64; 3],
}

impl MetricSample {
    pub fn positive_definite(&self) -> bool {
        self.eigenvalues.iter().all(|e| *e > 0.0)
    }

    /// max relative deviation among the squares and of the mixed products.
    pub fn triple_defect(&self) -> f64 {
        let scale = self.squares.iter().map(|s| s.abs()).fold(0.0, f64::max);
        let sq = self
            .squares
            .iter()
            .map(|s| (s - self.squares[2]).abs())
            .fold(0.0, f64::max);
        let mx = self.mixed.iter().map(|s| s.abs()).fold(0.0, f64::max);
        sq.max(mx) / scale
    }
}

/// J = −ω₁⁻¹ω₂ and g = sym(±ω_3·J) from ω₁ = Re ω_+, ω₂ = Im ω_+.
pub fn metric_from_triple(omega_plus: &Form, omega3: &Form, tolerance: f64) -> Result<MetricSample> {
    let w1 = omega_plus.map(|c| c.re);
    let w2 = omega_plus.map(|c| c.im);
    let w3 = omega3.map(|c| c.re);
    let inv = w1
        .try_inverse()
        .ok_or_else(|| Error::NotHyperkahler("Re ω_+ is degenerate".into()))?;
    let j = -(inv * w2);
    let j_defect = (j * j + RealForm::identity()).abs().max();
    if j_defect > tolerance {
        return Err(Error::NotHyperkahler(format!("|J² + 1| = {j_defect:.3e}")));
    }
    let raw = w3 * j * METRIC_SIGN;
    let asymmetry = (raw - raw.transpose()).abs().max();
    let g = (raw + raw.transpose()) * 0.5;
    let eig = SymmetricEigen::new(g).eigenvalues;
    let mut eigenvalues = [eig[0], eig[1], eig[2], eig[3]];
    eigenvalues.sort_by(f64::total_cmp);
    let compatibility = (j.transpose() * g * j - g).abs().max();
    let omega = [w1, w2, w3];
    let squares = [wedge4(&w1, &w1), wedge4(&w2, &w2), wedge4(&w3, &w3)];
    let mixed = [wedge4(&w1, &w2), wedge4(&w1, &w3), wedge4(&w2, &w3)];
    Ok(MetricSample {
        omega,
        g,
        j,
        eigenvalues,
        j_defect,
        compatibility,
        asymmetry,
        squares,
        mixed,
    })
}

/// `n` unit-circle points with the rotation that keeps them farthest from
/// the given ray directions.
pub fn circle_samples(n: usize, directions: &[C64]) -> Vec<C64> {
    let step = std::f64::consts::TAU / n as f64;
    let clearance = |offset: f64| {
        (0..n)
            .map(|k| {
                let z = C64::from_polar(1.0, offset + step * k as f64);
                directions
                    .iter()
                    .map(|d| (z / d).arg().abs())
                    .fold(std::f64::consts::PI, f64::min)
            })
            .fold(std::f64::consts::PI, f64::min)
    };
    let best = (0..64)
        .map(|i| step * (i as f64 + 0.5) / 64.0)
        .max_by(|a, b| clearance(*a).total_cmp(&clearance(*b)))
        .unwrap_or(0.0);
    (0..n).map(|k| C64::from_polar(1.0, best + step * k as f64)).collect()
}

/// ϖ at the sample points, the Laurent fit and the metric.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricReport {
    pub samples: Vec<(C64, Form)>,
    pub fit: LaurentFit,
    pub metric: MetricSample,
}

/// Tolerances for the extraction steps.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MetricTolerances {
    pub laurent: f64,
    pub complex_structure: f64,
}

impl Default for MetricTolerances {
    fn default() -> Self {
        MetricTolerances {
            laurent: 1e-6,
            complex_structure: 1e-6,
        }
    }
}

/// Full pipeline at one point; `semiflat_only` skips the solver.
pub fn metric_at(
    model: &ModelDefinition,
    point: &ModelPoint,
    opts: &SolverOptions,
    steps: FdSteps,
    n_samples: usize,
    tol: MetricTolerances,
    semiflat_only: bool,
) -> Result<MetricReport> {
    let family = if semiflat_only {
        PointFamily::semiflat(model, point, steps)?
    } else {
        let frame = SemiflatFrame::new(&model.lattice, &model.central, point)?;
        let rays = crate::charge_lattice::bps_rays(&model.spectrum, &model.central, point.u, point.r, opts.eps_spec)?;
        let base = crate::rh_solver::solve(frame, &rays, opts)?;
        PointFamily::around(model, base, steps)?
    };
    let dirs: Vec<C64> = family
        .base
        .as_ref()
        .map(|b| b.grids().iter().map(|g| g.ray.direction).collect())
        .unwrap_or_default();
    let samples = circle_samples(n_samples, &dirs)
        .into_par_iter()
        .map(|z| Ok((z, family.varpi(Probe::Off(z))?)))
        .collect::<Result<Vec<_>>>()?;
    let fit = laurent_fit(&samples, tol.laurent)?;
    let metric = metric_from_triple(&fit.omega_plus, &fit.omega3, tol.complex_structure)?;
    Ok(MetricReport { samples, fit, metric })
}
