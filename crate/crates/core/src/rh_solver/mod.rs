//! Fixed-point solution of the ray integral equation for the corrected
//! Darboux coordinates X_γ(ζ) = X^sf_γ(ζ)·exp Υ_γ(ζ).
//!
//! On the ray ζ' = d·e^s the equation reads
//!
//! Υ_γ(ζ) = −(1/4πi) Σ_ℓ Σ_{γ'∈ℓ} Ω(γ')⟨γ,γ'⟩ ∫ coth((s − w)/2) log(1 − X_{γ'}(d e^s)) ds,
//!
//! with w = log(ζ/d). Only the values of Υ at the quadrature nodes of the
//! active rays are unknowns; everything else follows by one more quadrature.

mod decay;
mod io;
mod wall;

pub use decay::{decay_scan, max_correction_on_circle, DecayReport, DecayRow};
pub use io::{read_solution, solution_hash, write_solution, SolutionHeader, StoredSolution};
pub use wall::{check_wall_continuity, wall_discrepancy, SpectrumChoice, WallReport, WallStep};

use num::complex::Complex64 as C64;
use num::Zero;
use rayon::prelude::*;

use crate::charge_lattice::{Charge, Ray};
use crate::error::{Error, Result};
use crate::quadrature::{PanelRule, Side};
use crate::semiflat::{CoordinateValue, SemiflatFrame};

/// Numerical parameters of the solver.
#[derive(Clone, Debug, PartialEq)]
pub struct SolverOptions {
    /// Tail bound for the truncation of the ray integrals.
    pub eps_quad: f64,
    pub panels: usize,
    pub per_panel: usize,
    pub tol_iter: f64,
    pub max_iter: usize,
    /// Charges with e^{−2πR|Z|} below this are dropped from the spectrum.
    pub eps_spec: f64,
    /// Angular distance (radians) from a ray below which evaluation needs
    /// an explicit side.
    pub delta: f64,
    /// Largest admissible e^{−2πR|Z|} over the active charges.
    pub x_ceiling: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            eps_quad: 1e-12,
            panels: 16,
            per_panel: 16,
            tol_iter: 1e-10,
            max_iter: 50,
            eps_spec: 1e-16,
            delta: 1e-3,
            x_ceiling: 0.9,
        }
    }
}

/// Smallest truncation half-width.
const MIN_S_MAX: f64 = 1.0;

/// Quadrature nodes on one BPS ray, ζ'(s) = direction·e^s.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureGrid {
    pub ray: Ray,
    pub rule: PanelRule,
}

/// Truncation half-width from e^{−2πR·min|Z|·cosh s_max} = eps_quad.
pub fn tail_s_max(r: f64, min_abs_z: f64, eps_quad: f64) -> f64 {
    let c = -eps_quad.ln() / (2.0 * std::f64::consts::PI * r * min_abs_z);
    c.max(1.0).acosh().max(MIN_S_MAX)
}

/// One grid per ray. Fails with "R too small" when some active X^sf is not
/// safely inside the unit disc on its own ray.
pub fn build_grids(frame: &SemiflatFrame, rays: &[Ray], opts: &SolverOptions) -> Result<Vec<QuadratureGrid>> {
    let r = frame.point.r;
    let mut grids = Vec::with_capacity(rays.len());
    for ray in rays {
        let m = ray.min_abs_z();
        let peak = (-2.0 * std::f64::consts::PI * r * m).exp();
        if peak > opts.x_ceiling {
            return Err(Error::RTooSmall(format!(
                "|X^sf| reaches {peak:.3} on the ray at angle {:.4} (ceiling {})",
                ray.angle(),
                opts.x_ceiling
            )));
        }
        grids.push(QuadratureGrid {
            ray: ray.clone(),
            rule: PanelRule::new(tail_s_max(r, m, opts.eps_quad), opts.panels, opts.per_panel),
        });
    }
    Ok(grids)
}

/// Same node layout as `reference`, directions and central charges taken
/// from `rays`, which must carry the same charges (in any ray order).
pub fn grids_like(reference: &[QuadratureGrid], rays: &[Ray]) -> Result<Vec<QuadratureGrid>> {
    if reference.len() != rays.len() {
        return Err(Error::InvalidParameter(format!(
            "ray count changed from {} to {}",
            reference.len(),
            rays.len()
        )));
    }
    reference
        .iter()
        .map(|g| {
            let same = |ray: &&Ray| {
                ray.charges.len() == g.ray.charges.len()
                    && g.ray
                        .charges
                        .iter()
                        .zip(&ray.charges)
                        .all(|(a, b)| a.charge == b.charge)
            };
            let ray = rays
                .iter()
                .find(same)
                .ok_or_else(|| Error::InvalidParameter("ray charges changed between points".into()))?;
            Ok(QuadratureGrid {
                ray: ray.clone(),
                rule: g.rule.clone(),
            })
        })
        .collect()
}

/// Converged node data: `upsilon[ray][charge][node]`.
#[derive(Clone, Debug, PartialEq)]
pub struct RaySolution {
    pub grids: Vec<QuadratureGrid>,
    pub upsilon: Vec<Vec<Vec<C64>>>,
    pub iterations: usize,
    pub residual: f64,
    pub history: Vec<f64>,
}

/// w = log(ζ/d) with imaginary part in (−π, π].
pub fn kernel_point(zeta: C64, direction: C64) -> C64 {
    (zeta / direction).ln()
}

/// log(1 − X_{γ'}) at the nodes of each ray for the current Υ.
fn log_one_minus(
    frame: &SemiflatFrame,
    grids: &[QuadratureGrid],
    upsilon: &[Vec<Vec<C64>>],
) -> Result<Vec<Vec<Vec<C64>>>> {
    grids
        .iter()
        .zip(upsilon)
        .map(|(g, ups)| {
            g.ray
                .charges
                .iter()
                .zip(ups)
                .map(|(rc, u)| {
                    g.rule
                        .nodes
                        .iter()
                        .zip(u)
                        .map(|(s, y)| {
                            let zeta = g.ray.direction * s.exp();
                            let x = (frame.log_xsf(&rc.charge, zeta) + y).exp();
                            if x.norm() >= 1.0 {
                                return Err(Error::LogDomain(format!(
                                    "|X_{}| = {:.3} at s = {s:.3}",
                                    rc.charge,
                                    x.norm()
                                )));
                            }
                            Ok((1.0 - x).ln())
                        })
                        .collect()
                })
                .collect()
        })
        .collect()
}

/// Source integrals I_{ℓ,γ'}(ζ) = ∫ coth((s − w)/2) log(1 − X_{γ'}) ds.
/// `side` selects, for ray `ℓ`, the function continued analytically from
/// that side of the ray, so ζ may lie on the ray or slightly across it.
fn upsilon_from_sources(
    frame: &SemiflatFrame,
    grids: &[QuadratureGrid],
    logs: &[Vec<Vec<C64>>],
    gamma: &Charge,
    zeta: C64,
    side: Option<(usize, Side)>,
) -> C64 {
    let lattice = &frame.lattice;
    let mut total = C64::zero();
    for (ri, g) in grids.iter().enumerate() {
        let w = kernel_point(zeta, g.ray.direction);
        let sd = match side {
            Some((k, s)) if k == ri => s,
            _ => Side::Auto,
        };
        for (rc, l) in g.ray.charges.iter().zip(&logs[ri]) {
            let p = lattice.pair_unchecked(gamma, &rc.charge);
            if p == 0 {
                continue;
            }
            total += (rc.omega * p) as f64 * g.rule.coth_integral(l, w, sd);
        }
    }
    // −1/(4πi) = i/(4π)
    total * C64::new(0.0, 1.0 / (4.0 * std::f64::consts::PI))
}

/// One application of the integral operator to node data.
fn apply_operator(
    frame: &SemiflatFrame,
    grids: &[QuadratureGrid],
    upsilon: &[Vec<Vec<C64>>],
) -> Result<Vec<Vec<Vec<C64>>>> {
    let logs = log_one_minus(frame, grids, upsilon)?;
    let targets: Vec<(usize, usize)> = grids
        .iter()
        .enumerate()
        .flat_map(|(ri, g)| (0..g.rule.len()).map(move |k| (ri, k)))
        .collect();
    let values: Vec<Vec<C64>> = targets
        .par_iter()
        .map(|&(ri, k)| {
            let g = &grids[ri];
            let zeta = g.ray.direction * g.rule.nodes[k].exp();
            g.ray
                .charges
                .iter()
                .map(|rc| upsilon_from_sources(frame, grids, &logs, &rc.charge, zeta, None))
                .collect()
        })
        .collect();
    let mut out: Vec<Vec<Vec<C64>>> = grids
        .iter()
        .map(|g| vec![vec![C64::zero(); g.rule.len()]; g.ray.charges.len()])
        .collect();
    for (&(ri, k), vals) in targets.iter().zip(values) {
        for (ci, v) in vals.into_iter().enumerate() {
            out[ri][ci][k] = v;
        }
    }
    Ok(out)
}

fn max_change(a: &[Vec<Vec<C64>>], b: &[Vec<Vec<C64>>]) -> f64 {
    a.iter()
        .flatten()
        .zip(b.iter().flatten())
        .flat_map(|(x, y)| x.iter().zip(y).map(|(p, q)| (p - q).norm()))
        .fold(0.0, f64::max)
}

/// Iterate from X = X^sf (or from `initial`) until the node update falls
/// below `tol_iter`.
pub fn iterate(
    frame: &SemiflatFrame,
    grids: Vec<QuadratureGrid>,
    opts: &SolverOptions,
    initial: Option<Vec<Vec<Vec<C64>>>>,
) -> Result<RaySolution> {
    let mut ups = initial.unwrap_or_else(|| {
        grids
            .iter()
            .map(|g| vec![vec![C64::zero(); g.rule.len()]; g.ray.charges.len()])
            .collect()
    });
    let mut history = Vec::new();
    for it in 1..=opts.max_iter {
        let next = apply_operator(frame, &grids, &ups)?;
        let change = max_change(&next, &ups);
        ups = next;
        history.push(change);
        if !change.is_finite() {
            break;
        }
        if change < opts.tol_iter {
            return Ok(RaySolution {
                grids,
                upsilon: ups,
                iterations: it,
                residual: change,
                history,
            });
        }
    }
    Err(Error::NonConvergence {
        iterations: history.len(),
        history,
    })
}

/// Converged solution at one point together with its semiflat frame.
#[derive(Clone, Debug, PartialEq)]
pub struct Solution {
    pub frame: SemiflatFrame,
    pub rays: RaySolution,
    pub options: SolverOptions,
    logs: Vec<Vec<Vec<C64>>>,
}

/// Build grids and iterate.
pub fn solve(frame: SemiflatFrame, rays: &[Ray], opts: &SolverOptions) -> Result<Solution> {
    let grids = build_grids(&frame, rays, opts)?;
    let sol = iterate(&frame, grids, opts, None)?;
    Solution::new(frame, sol, opts.clone())
}

impl Solution {
    pub fn new(frame: SemiflatFrame, rays: RaySolution, options: SolverOptions) -> Result<Self> {
        let logs = log_one_minus(&frame, &rays.grids, &rays.upsilon)?;
        Ok(Solution {
            frame,
            rays,
            options,
            logs,
        })
    }

    /// Solve at another frame with the same node layout, starting from this
    /// solution's node data.
    pub fn resolve_at(&self, frame: SemiflatFrame, rays: &[Ray]) -> Result<Solution> {
        let grids = grids_like(&self.rays.grids, rays)?;
        let sol = iterate(&frame, grids, &self.options, Some(self.rays.upsilon.clone()))?;
        Solution::new(frame, sol, self.options.clone())
    }

    pub fn grids(&self) -> &[QuadratureGrid] {
        &self.rays.grids
    }

    /// Index of the ray within δ of arg ζ, if any.
    pub fn ray_near(&self, zeta: C64) -> Option<usize> {
        self.rays
            .grids
            .iter()
            .position(|g| (zeta / g.ray.direction).arg().abs() < self.options.delta)
    }

    /// Υ_γ(ζ) off the rays, or its continuation from `side` of ray `k`.
    pub fn upsilon(&self, gamma: &Charge, zeta: C64, side: Option<(usize, Side)>) -> C64 {
        upsilon_from_sources(&self.frame, &self.rays.grids, &self.logs, gamma, zeta, side)
    }

    /// X_γ(ζ) for ζ away from every BPS ray.
    pub fn evaluate(&self, gamma: &Charge, zeta: C64) -> Result<CoordinateValue> {
        self.frame.lattice.check(gamma)?;
        if zeta.norm() == 0.0 || !zeta.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "ζ = {zeta} must be finite and nonzero"
            )));
        }
        if let Some(k) = self.ray_near(zeta) {
            return Err(Error::DirectedLimitRequired(format!(
                "ζ = {zeta} is within δ of the ray at angle {:.6}",
                self.rays.grids[k].ray.angle()
            )));
        }
        let log = self.frame.log_xsf(gamma, zeta) + self.upsilon(gamma, zeta, None);
        Ok(CoordinateValue::from_log(gamma.clone(), zeta, log))
    }

    /// Boundary value of X_γ at ζ = direction·e^s on ray `k` from `side`
    /// (`Plus` is counterclockwise). The analytic boundary value is checked
    /// against a two-point Richardson extrapolation of off-ray values.
    pub fn side_limit(&self, gamma: &Charge, ray: usize, s: f64, side: Side) -> Result<CoordinateValue> {
        self.frame.lattice.check(gamma)?;
        let g = self
            .rays
            .grids
            .get(ray)
            .ok_or_else(|| Error::InvalidParameter(format!("no ray {ray}")))?;
        if side == Side::Auto {
            return Err(Error::InvalidParameter("side limit needs a side".into()));
        }
        let zeta = g.ray.direction * s.exp();
        let log = self.frame.log_xsf(gamma, zeta) + self.upsilon(gamma, zeta, Some((ray, side)));
        let d = self.options.delta;
        let at = |eps: f64| {
            let z = zeta * C64::from_polar(1.0, side.sign() * eps);
            self.frame.log_xsf(gamma, z) + self.upsilon(gamma, z, None)
        };
        let extrapolated = 2.0 * at(0.5 * d) - at(d);
        let residual = (extrapolated - log).norm();
        let tolerance = 1e-4 * (1.0 + log.norm()) + 10.0 * d * d * (1.0 + log.norm());
        if residual > tolerance {
            return Err(Error::Extrapolation { residual, tolerance });
        }
        Ok(CoordinateValue::from_log(gamma.clone(), zeta, log))
    }

    /// Largest change of the node data under one more application of the
    /// integral operator.
    pub fn fixed_point_defect(&self) -> Result<f64> {
        let next = apply_operator(&self.frame, &self.rays.grids, &self.rays.upsilon)?;
        Ok(max_change(&next, &self.rays.upsilon))
    }
}
