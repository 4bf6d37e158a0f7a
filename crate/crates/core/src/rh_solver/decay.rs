//! Decay of the corrections log(X/X^sf) with R at a fixed point.

use num::complex::Complex64 as C64;

use super::{solve, Solution, SolverOptions};
use crate::charge_lattice::{bps_rays, Charge};
use crate::error::{Error, Result};
use crate::model_library::ModelDefinition;
use crate::quadrature::Side;
use crate::semiflat::{ModelPoint, SemiflatFrame};

/// Largest |Υ_γ| over basis charges on the unit circle: `samples` off-ray
/// points and both side limits at |ζ| = 1 on every BPS ray.
pub fn max_correction_on_circle(sol: &Solution, samples: usize) -> f64 {
    let n = sol.frame.lattice.rank_total();
    let basis: Vec<Charge> = (0..n).map(|i| sol.frame.lattice.basis(i)).collect();
    let mut worst = 0.0f64;
    for k in 0..samples {
        let z = C64::from_polar(1.0, std::f64::consts::TAU * k as f64 / samples as f64);
        if sol.ray_near(z).is_some() {
            continue;
        }
        for g in &basis {
            worst = worst.max(sol.upsilon(g, z, None).norm());
        }
    }
    for (k, grid) in sol.grids().iter().enumerate() {
        for side in [Side::Plus, Side::Minus] {
            for g in &basis {
                worst = worst.max(sol.upsilon(g, grid.ray.direction, Some((k, side))).norm());
            }
        }
    }
    worst
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecayRow {
    pub r: f64,
    pub max_correction: f64,
    pub iterations: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecayReport {
    pub rows: Vec<DecayRow>,
    /// Least-squares slope of ln(max correction) against R.
    pub slope: f64,
    /// −2π·min|Z| over the active charges.
    pub expected: f64,
}

impl DecayReport {
    pub fn relative_error(&self) -> f64 {
        (self.slope / self.expected - 1.0).abs()
    }
}

/// Solve at each R in `r_list` and fit the exponential decay rate.
pub fn decay_scan(
    model: &ModelDefinition,
    u: C64,
    theta: &[f64],
    r_list: &[f64],
    opts: &SolverOptions,
    samples: usize,
) -> Result<DecayReport> {
    if r_list.len() < 2 {
        return Err(Error::InvalidParameter(
            "decay scan needs at least two values of R".into(),
        ));
    }
    let mut rows = Vec::with_capacity(r_list.len());
    let mut zmin = f64::INFINITY;
    for &r in r_list {
        let point = ModelPoint::new(u, r, theta.to_vec())?;
        let frame = SemiflatFrame::new(&model.lattice, &model.central, &point)?;
        let rays = bps_rays(&model.spectrum, &model.central, u, r, opts.eps_spec)?;
        zmin = rays.iter().map(|ray| ray.min_abs_z()).fold(zmin, f64::min);
        let sol = solve(frame, &rays, opts)?;
        rows.push(DecayRow {
            r,
            max_correction: max_correction_on_circle(&sol, samples),
            iterations: sol.rays.iterations,
        });
    }
    if !zmin.is_finite() {
        return Err(Error::InvalidParameter("no active charges at this point".into()));
    }
    let n = rows.len() as f64;
    let mx = rows.iter().map(|r| r.r).sum::<f64>() / n;
    let my = rows.iter().map(|r| r.max_correction.ln()).sum::<f64>() / n;
    let sxy: f64 = rows.iter().map(|r| (r.r - mx) * (r.max_correction.ln() - my)).sum();
    let sxx: f64 = rows.iter().map(|r| (r.r - mx) * (r.r - mx)).sum();
    Ok(DecayReport {
        rows,
        slope: sxy / sxx,
        expected: -2.0 * std::f64::consts::PI * zmin,
    })
}
