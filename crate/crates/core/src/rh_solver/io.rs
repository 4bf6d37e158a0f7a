//! Plain-text solution files: a header with the content hash of model and
//! parameters, then one node table per ray and charge.

use std::fmt::Write as _;

use num::complex::Complex64 as C64;
use sha2::{Digest, Sha256};

use super::{QuadratureGrid, RaySolution, Solution, SolverOptions};
use crate::charge_lattice::{bps_rays, Charge};
use crate::error::{Error, Result};
use crate::model_library::config::ModelConfig;
use crate::model_library::ModelDefinition;
use crate::quadrature::PanelRule;
use crate::semiflat::{ModelPoint, SemiflatFrame};

const MAGIC: &str = "hkforge-solution 1";

/// Parameters identifying a solution.
#[derive(Clone, Debug, PartialEq)]
pub struct SolutionHeader {
    pub hash: String,
    pub model: String,
    pub point: ModelPoint,
    pub options: SolverOptions,
    pub iterations: usize,
    pub residual: f64,
}

/// Solution file contents before they are tied back to a model.
#[derive(Clone, Debug, PartialEq)]
pub struct StoredSolution {
    pub header: SolutionHeader,
    rays: Vec<StoredRay>,
}

#[derive(Clone, Debug, PartialEq)]
struct StoredRay {
    direction: C64,
    s_max: f64,
    panels: usize,
    per_panel: usize,
    charges: Vec<(Charge, Vec<C64>)>,
}

fn options_line(o: &SolverOptions) -> String {
    format!(
        "{} {} {} {} {} {} {} {}",
        o.eps_quad, o.panels, o.per_panel, o.tol_iter, o.max_iter, o.eps_spec, o.delta, o.x_ceiling
    )
}

fn point_lines(p: &ModelPoint) -> String {
    let theta: Vec<String> = p.theta.iter().map(|t| t.to_string()).collect();
    format!("u {} {}\nr {}\ntheta {}\n", p.u.re, p.u.im, p.r, theta.join(" "))
}

/// sha256 of the canonical model text, the point and the solver options.
pub fn solution_hash(model: &ModelConfig, point: &ModelPoint, options: &SolverOptions) -> String {
    let mut h = Sha256::new();
    h.update(model.to_toml().as_bytes());
    h.update(point_lines(point).as_bytes());
    h.update(options_line(options).as_bytes());
    hex::encode(h.finalize())
}

fn charge_text(c: &Charge) -> String {
    c.coeffs().iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

/// Serialize a converged solution.
pub fn write_solution(model: &ModelConfig, sol: &Solution) -> String {
    let p = &sol.frame.point;
    let mut out = String::new();
    let _ = writeln!(out, "{MAGIC}");
    let _ = writeln!(out, "hash {}", solution_hash(model, p, &sol.options));
    let _ = writeln!(out, "model {}", model.model_id);
    out.push_str(&point_lines(p));
    let _ = writeln!(out, "options {}", options_line(&sol.options));
    let _ = writeln!(out, "iterations {} residual {}", sol.rays.iterations, sol.rays.residual);
    let _ = writeln!(out, "rays {}", sol.rays.grids.len());
    for (g, ups) in sol.rays.grids.iter().zip(&sol.rays.upsilon) {
        let d = g.ray.direction;
        let _ = writeln!(
            out,
            "ray {} {} {} {} {} {}",
            d.re,
            d.im,
            g.rule.s_max,
            g.rule.panels,
            g.rule.per_panel,
            g.ray.charges.len()
        );
        for (rc, u) in g.ray.charges.iter().zip(ups) {
            let _ = writeln!(out, "charge {} {}", charge_text(&rc.charge), rc.omega);
            for ((s, w), y) in g.rule.nodes.iter().zip(&g.rule.weights).zip(u) {
                let _ = writeln!(out, "{s} {w} {} {}", y.re, y.im);
            }
        }
    }
    out
}

struct Lines<'a> {
    it: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    fn next(&mut self, key: &str) -> Result<Vec<&'a str>> {
        let (n, line) = self
            .it
            .next()
            .ok_or_else(|| Error::Parse(format!("unexpected end of file, expected '{key}'")))?;
        let mut words: Vec<&str> = line.split_whitespace().collect();
        if !key.is_empty() {
            if words.first() != Some(&key) {
                return Err(Error::Parse(format!("line {}: expected '{key}'", n + 1)));
            }
            words.remove(0);
        }
        Ok(words)
    }
}

fn num<T: std::str::FromStr>(s: Option<&&str>) -> Result<T> {
    s.and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::Parse(format!("bad number '{}'", s.copied().unwrap_or(""))))
}

/// Parse a solution file.
pub fn read_solution(text: &str) -> Result<StoredSolution> {
    let mut l = Lines {
        it: text.lines().enumerate(),
    };
    if l.next("")?.join(" ") != MAGIC {
        return Err(Error::Parse("not a solution file".into()));
    }
    let hash = l.next("hash")?.first().map(|s| s.to_string()).unwrap_or_default();
    let model = l.next("model")?.first().map(|s| s.to_string()).unwrap_or_default();
    let u = l.next("u")?;
    let u = C64::new(num(u.first())?, num(u.get(1))?);
    let r: f64 = num(l.next("r")?.first())?;
    let theta = l
        .next("theta")?
        .iter()
        .map(|t| num(Some(t)))
        .collect::<Result<Vec<f64>>>()?;
    let o = l.next("options")?;
    let options = SolverOptions {
        eps_quad: num(o.first())?,
        panels: num(o.get(1))?,
        per_panel: num(o.get(2))?,
        tol_iter: num(o.get(3))?,
        max_iter: num(o.get(4))?,
        eps_spec: num(o.get(5))?,
        delta: num(o.get(6))?,
        x_ceiling: num(o.get(7))?,
    };
    let it = l.next("iterations")?;
    let iterations = num(it.first())?;
    let residual = num(it.get(2))?;
    let n_rays: usize = num(l.next("rays")?.first())?;
    let mut rays = Vec::with_capacity(n_rays);
    for _ in 0..n_rays {
        let w = l.next("ray")?;
        let (panels, per_panel): (usize, usize) = (num(w.get(3))?, num(w.get(4))?);
        let n_charges: usize = num(w.get(5))?;
        let mut charges = Vec::with_capacity(n_charges);
        for _ in 0..n_charges {
            let c = l.next("charge")?;
            let coeffs = c
                .first()
                .ok_or_else(|| Error::Parse("missing charge".into()))?
                .split(',')
                .map(|x| x.parse::<i64>().map_err(|_| Error::Parse(format!("bad charge '{x}'"))))
                .collect::<Result<Vec<_>>>()?;
            let mut values = Vec::with_capacity(panels * per_panel);
            for _ in 0..panels * per_panel {
                let row = l.next("")?;
                values.push(C64::new(num(row.get(2))?, num(row.get(3))?));
            }
            charges.push((Charge::new(coeffs), values));
        }
        rays.push(StoredRay {
            direction: C64::new(num(w.first())?, num(w.get(1))?),
            s_max: num(w.get(2))?,
            panels,
            per_panel,
            charges,
        });
    }
    Ok(StoredSolution {
        header: SolutionHeader {
            hash,
            model,
            point: ModelPoint::new(u, r, theta)?,
            options,
            iterations,
            residual,
        },
        rays,
    })
}

impl StoredSolution {
    /// Rebuild the solution for `model`, refusing files whose hash does not
    /// match the model and the stored parameters.
    pub fn restore(&self, model: &ModelDefinition, config: &ModelConfig) -> Result<Solution> {
        let h = &self.header;
        let expected = solution_hash(config, &h.point, &h.options);
        if expected != h.hash {
            return Err(Error::ModelMismatch(format!(
                "solution hash {} does not match model and parameters ({expected})",
                h.hash
            )));
        }
        let frame = SemiflatFrame::new(&model.lattice, &model.central, &h.point)?;
        let rays = bps_rays(
            &model.spectrum,
            &model.central,
            h.point.u,
            h.point.r,
            h.options.eps_spec,
        )?;
        if rays.len() != self.rays.len() {
            return Err(Error::ModelMismatch(
                "ray count differs from the stored solution".into(),
            ));
        }
        let mut grids = Vec::with_capacity(rays.len());
        let mut upsilon = Vec::with_capacity(rays.len());
        for (ray, stored) in rays.into_iter().zip(&self.rays) {
            let same = (ray.direction - stored.direction).norm() < 1e-9
                && ray.charges.len() == stored.charges.len()
                && ray.charges.iter().zip(&stored.charges).all(|(a, b)| a.charge == b.0);
            if !same {
                return Err(Error::ModelMismatch("ray data differ from the stored solution".into()));
            }
            upsilon.push(stored.charges.iter().map(|c| c.1.clone()).collect());
            grids.push(QuadratureGrid {
                ray,
                rule: PanelRule::new(stored.s_max, stored.panels, stored.per_panel),
            });
        }
        let rays = RaySolution {
            grids,
            upsilon,
            iterations: h.iterations,
            residual: h.residual,
            history: Vec::new(),
        };
        Solution::new(frame, rays, h.options.clone())
    }
}
