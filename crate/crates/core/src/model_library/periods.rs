//! Periods of λ = y dz on the curves y² = z³ − 3Λ²z + u.
//!
//! Work in the normalized variables z = Λw, u = Λ³v, where the curve reads
//! w³ − 3w + v. Branch points are labelled at v = 0 as (−√3, 0, √3) and
//! carried to v by continuation along a fixed path from the origin; the path
//! is the straight segment, except for real v with |v| ≥ 2 which is reached
//! from the upper half plane. This trivializes Γ on the plane cut along the
//! real rays |v| ≥ 2.
//!
//! A cycle encircling the cut between branch points a, b has period
//! 2∫_a^b y dz. With z = m − h cos φ (m midpoint, h half-length) the integrand
//! becomes i h² sin²φ s(φ), s = √(z − e_c), which is smooth on [0, π].

use num::complex::Complex64 as C64;
use num::Zero;

use crate::error::{Error, Result};
use crate::quadrature::gauss_legendre;

const SQRT3: f64 = 1.732_050_807_568_877_2;

/// Branch point data continued to a point v, with the tracked midpoint roots
/// √(m − e_c) for the two cycles.
#[derive(Clone, Debug)]
pub struct TrackedCurve {
    pub roots: [C64; 3],
    pub mid_sqrt: [C64; 2],
}

/// Cycle k uses branch points PAIRS[k] and the remaining root THIRD[k].
/// Cycle 0 collapses at v = +2, cycle 1 at v = −2.
const PAIRS: [(usize, usize); 2] = [(1, 2), (0, 1)];
const THIRD: [usize; 2] = [0, 2];

fn cubic_value(w: C64, v: C64) -> C64 {
    w * w * w - 3.0 * w + v
}

/// All three roots of w³ − 3w + v by Durand-Kerner, polished with Newton.
fn cubic_roots(v: C64) -> [C64; 3] {
    let seed = C64::new(0.4, 0.9);
    let mut r = [C64::new(1.0, 0.0), seed, seed * seed];
    for _ in 0..500 {
        let mut delta = 0.0f64;
        for i in 0..3 {
            let mut den = C64::new(1.0, 0.0);
            for j in 0..3 {
                if i != j {
                    den *= r[i] - r[j];
                }
            }
            let step = cubic_value(r[i], v) / den;
            r[i] -= step;
            delta = delta.max(step.norm());
        }
        if delta < 1e-15 {
            break;
        }
    }
    for ri in r.iter_mut() {
        for _ in 0..3 {
            let d = 3.0 * *ri * *ri - 3.0;
            if d.norm() < 1e-300 {
                break;
            }
            *ri -= cubic_value(*ri, v) / d;
        }
    }
    r
}

const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];

fn min_separation(r: &[C64; 3]) -> f64 {
    (r[0] - r[1]).norm().min((r[0] - r[2]).norm()).min((r[1] - r[2]).norm())
}

fn pair_mid_offset(r: &[C64; 3], k: usize) -> C64 {
    let (a, b) = PAIRS[k];
    0.5 * (r[a] + r[b]) - r[THIRD[k]]
}

fn closest_sign(candidate: C64, previous: C64) -> C64 {
    if (candidate - previous).norm() <= (candidate + previous).norm() {
        candidate
    } else {
        -candidate
    }
}

fn step(state: &TrackedCurve, v_from: C64, v_to: C64, depth: usize) -> Result<TrackedCurve> {
    let fresh = cubic_roots(v_to);
    let sep = min_separation(&state.roots);
    let mut best = (f64::INFINITY, 0usize);
    for (pi, p) in PERMS.iter().enumerate() {
        let d = (0..3)
            .map(|i| (fresh[p[i]] - state.roots[i]).norm())
            .fold(0.0, f64::max);
        if d < best.0 {
            best = (d, pi);
        }
    }
    if best.0 < 0.25 * sep {
        let p = PERMS[best.1];
        let roots = [fresh[p[0]], fresh[p[1]], fresh[p[2]]];
        let mut mid_sqrt = [C64::zero(); 2];
        for k in 0..2 {
            let cand = pair_mid_offset(&roots, k).sqrt();
            mid_sqrt[k] = closest_sign(cand, state.mid_sqrt[k]);
        }
        return Ok(TrackedCurve { roots, mid_sqrt });
    }
    if depth > 40 {
        return Err(Error::DegeneratePoint(format!("branch points collide near v = {v_to}")));
    }
    let mid = 0.5 * (v_from + v_to);
    let half = step(state, v_from, mid, depth + 1)?;
    step(&half, mid, v_to, depth + 1)
}

fn initial_curve() -> TrackedCurve {
    let roots = [C64::new(-SQRT3, 0.0), C64::zero(), C64::new(SQRT3, 0.0)];
    let mid_sqrt = [pair_mid_offset(&roots, 0).sqrt(), pair_mid_offset(&roots, 1).sqrt()];
    TrackedCurve { roots, mid_sqrt }
}

/// Path from the origin used for the trivialization.
pub fn continuation_path(v: C64) -> Vec<C64> {
    if v.im.abs() < 1e-12 && v.re.abs() >= 2.0 {
        let lift = C64::new(0.0, 0.5);
        vec![C64::zero(), lift, C64::new(v.re, 0.0) + lift, C64::new(v.re, 0.0)]
    } else {
        vec![C64::zero(), v]
    }
}

/// Continue the branch points from v = 0 to `v`.
pub fn track(v: C64) -> Result<TrackedCurve> {
    for d in [C64::new(2.0, 0.0), C64::new(-2.0, 0.0)] {
        if (v - d).norm() < 1e-9 {
            return Err(Error::DegeneratePoint(format!("v = {v} lies on the discriminant")));
        }
    }
    let path = continuation_path(v);
    let mut state = initial_curve();
    for leg in path.windows(2) {
        let (a, b) = (leg[0], leg[1]);
        let n = 64;
        for i in 0..n {
            let va = a + (b - a) * (i as f64 / n as f64);
            let vb = a + (b - a) * ((i + 1) as f64 / n as f64);
            state = step(&state, va, vb, 0)?;
        }
    }
    Ok(state)
}

/// Fixed Gauss-Legendre rule on [0, π] for the segment integrals.
#[derive(Clone, Debug)]
pub struct SegmentRule {
    phi: Vec<f64>,
    weights: Vec<f64>,
}

impl SegmentRule {
    pub fn new(n: usize) -> Self {
        let (x, w) = gauss_legendre(n);
        let half = 0.5 * std::f64::consts::PI;
        SegmentRule {
            phi: x.iter().map(|x| half * (x + 1.0)).collect(),
            weights: w.iter().map(|w| half * w).collect(),
        }
    }
}

/// Period (1/π)∮ y dz and its u-derivative (1/π)∮ dz/(2y) for cycle k, in
/// normalized units (Λ = 1).
pub fn normalized_period(curve: &TrackedCurve, k: usize, rule: &SegmentRule) -> Result<(C64, C64)> {
    let (a, b) = PAIRS[k];
    let ea = curve.roots[a];
    let eb = curve.roots[b];
    let h = 0.5 * (eb - ea);
    let offset = pair_mid_offset(&curve.roots, k);
    let kk = h / offset;
    if kk.im.abs() < 1e-9 && kk.re.abs() >= 1.0 - 1e-9 {
        return Err(Error::OutsideChamber(
            "third branch point lies on the integration segment".into(),
        ));
    }
    let s_mid = curve.mid_sqrt[k];
    let mut value = C64::zero();
    let mut deriv = C64::zero();
    for (phi, w) in rule.phi.iter().zip(&rule.weights) {
        let root = (1.0 - kk * phi.cos()).sqrt();
        let sin = phi.sin();
        value += root * (sin * sin * w);
        deriv += (1.0 / root) * *w;
    }
    let i = C64::new(0.0, 1.0);
    let pi = std::f64::consts::PI;
    let z = (2.0 / pi) * i * h * h * s_mid * value;
    let dz = deriv / (pi * i * s_mid);
    Ok((z, dz))
}
