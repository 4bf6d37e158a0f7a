//! Continuity of X across a wall of marginal stability.
//!
//! Two points u_in, u_out on either side of the wall are solved with the
//! spectra of their own chambers, and X is compared at fixed ζ while the
//! separation is halved about the midpoint.

use num::complex::Complex64 as C64;
use rayon::prelude::*;

use super::{solve, SolverOptions};
use crate::charge_lattice::{rays_from_basis, Charge};
use crate::error::Result;
use crate::model_library::ModelDefinition;
use crate::semiflat::{ModelPoint, SemiflatFrame};

/// Spectra used at the two points.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpectrumChoice {
    /// Each point uses the spectrum of its own chamber.
    Chamber,
    /// Both points use the spectrum of the chamber containing u_in.
    InnerOnBoth,
}

#[derive(Clone, Debug, PartialEq)]
pub struct WallStep {
    pub u_in: C64,
    pub u_out: C64,
    pub separation: f64,
    /// max over basis charges and ζ of |log(X/X^sf)(u_in) − log(X/X^sf)(u_out)|.
    pub discrepancy: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct WallReport {
    pub steps: Vec<WallStep>,
    /// log₂ of successive discrepancy ratios.
    pub orders: Vec<f64>,
}

impl WallReport {
    /// Smallest observed order over the halving sequence.
    pub fn observed_order(&self) -> f64 {
        self.orders.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Discrepancy divided by separation at the last step.
    pub fn slope(&self) -> f64 {
        self.steps.last().map_or(0.0, |s| s.discrepancy / s.separation)
    }
}

fn solve_at(
    model: &ModelDefinition,
    u: C64,
    spectrum_u: C64,
    r: f64,
    theta: &[f64],
    opts: &SolverOptions,
) -> Result<super::Solution> {
    let point = ModelPoint::new(u, r, theta.to_vec())?;
    let frame = SemiflatFrame::new(&model.lattice, &model.central, &point)?;
    let active = model.spectrum.active(spectrum_u)?;
    let rays = rays_from_basis(&active, &frame.z, r, opts.eps_spec)?;
    solve(frame, &rays, opts)
}

/// Discrepancy of the corrections log(X/X^sf) for one pair of points.
/// X^sf is continuous in u, so this isolates the jump of X.
#[allow(clippy::too_many_arguments)]
pub fn wall_discrepancy(
    model: &ModelDefinition,
    u_in: C64,
    u_out: C64,
    r: f64,
    theta: &[f64],
    zetas: &[C64],
    opts: &SolverOptions,
    choice: SpectrumChoice,
) -> Result<f64> {
    let out_spec = match choice {
        SpectrumChoice::Chamber => u_out,
        SpectrumChoice::InnerOnBoth => u_in,
    };
    let (a, b) = rayon::join(
        || solve_at(model, u_in, u_in, r, theta, opts),
        || solve_at(model, u_out, out_spec, r, theta, opts),
    );
    let (a, b) = (a?, b?);
    let basis: Vec<Charge> = (0..model.lattice.rank_total())
        .map(|i| model.lattice.basis(i))
        .collect();
    let mut worst = 0.0f64;
    for z in zetas {
        for g in &basis {
            a.evaluate(g, *z)?;
            b.evaluate(g, *z)?;
            let ya = a.upsilon(g, *z, None);
            let yb = b.upsilon(g, *z, None);
            worst = worst.max((ya - yb).norm());
        }
    }
    Ok(worst)
}

/// Halve the separation of (u_in, u_out) about their midpoint `halvings`
/// times and record the discrepancy at each step.
#[allow(clippy::too_many_arguments)]
pub fn check_wall_continuity(
    model: &ModelDefinition,
    u_in: C64,
    u_out: C64,
    r: f64,
    theta: &[f64],
    zetas: &[C64],
    opts: &SolverOptions,
    halvings: usize,
    choice: SpectrumChoice,
) -> Result<WallReport> {
    let mid = 0.5 * (u_in + u_out);
    let half = 0.5 * (u_out - u_in);
    let steps = (0..=halvings)
        .into_par_iter()
        .map(|k| {
            let f = 0.5f64.powi(k as i32);
            let (a, b) = (mid - half * f, mid + half * f);
            let d = wall_discrepancy(model, a, b, r, theta, zetas, opts, choice)?;
            Ok(WallStep {
                u_in: a,
                u_out: b,
                separation: (b - a).norm(),
                discrepancy: d,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let orders = steps
        .windows(2)
        .map(|w| (w[0].discrepancy / w[1].discrepancy).log2())
        .collect();
    Ok(WallReport { steps, orders })
}
