use num::complex::Complex64 as C64;

use super::central::{combine, CentralCharge};
use super::lattice::Charge;
use crate::error::{Error, Result};

/// Directions closer than this (radians) are treated as one ray.
pub const RAY_MERGE_ANGLE: f64 = 1e-9;

/// BPS degeneracies on one chamber.
#[derive(Clone, Debug, PartialEq)]
pub struct ChamberSpectrum {
    pub label: String,
    pub entries: Vec<(Charge, i64)>,
}

/// Ω(γ; u): piecewise constant on the chambers of the model.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    chambers: Vec<ChamberSpectrum>,
    classifier: Option<CentralCharge>,
}

impl Spectrum {
    /// The same degeneracies at every point.
    pub fn fixed(entries: Vec<(Charge, i64)>) -> Self {
        Spectrum {
            chambers: vec![ChamberSpectrum {
                label: "all".into(),
                entries,
            }],
            classifier: None,
        }
    }

    /// One table per chamber, indexed by `central.chamber(u)`.
    pub fn chambered(central: CentralCharge, chambers: Vec<ChamberSpectrum>) -> Self {
        Spectrum {
            chambers,
            classifier: Some(central),
        }
    }

    pub fn empty() -> Self {
        Spectrum::fixed(Vec::new())
    }

    pub fn chambers(&self) -> &[ChamberSpectrum] {
        &self.chambers
    }

    pub fn chamber_index(&self, u: C64) -> Result<usize> {
        match &self.classifier {
            None => Ok(0),
            Some(z) => {
                let c = z.chamber(u)?;
                if c >= self.chambers.len() {
                    return Err(Error::InvalidParameter(format!("no spectrum for chamber {c}")));
                }
                Ok(c)
            }
        }
    }

    /// Charges with nonzero Ω at u.
    pub fn active(&self, u: C64) -> Result<Vec<(Charge, i64)>> {
        let c = self.chamber_index(u)?;
        Ok(self.chambers[c]
            .entries
            .iter()
            .filter(|(_, o)| *o != 0)
            .cloned()
            .collect())
    }

    pub fn omega(&self, gamma: &Charge, u: C64) -> Result<i64> {
        let c = self.chamber_index(u)?;
        Ok(lookup(&self.chambers[c].entries, gamma))
    }

    /// Every charge with possibly nonzero Ω in some chamber.
    pub fn support_bound(&self) -> Vec<Charge> {
        let mut all: Vec<Charge> = self
            .chambers
            .iter()
            .flat_map(|c| c.entries.iter().filter(|(_, o)| *o != 0).map(|(g, _)| g.clone()))
            .collect();
        all.sort();
        all.dedup();
        all
    }
}

pub(crate) fn lookup(entries: &[(Charge, i64)], gamma: &Charge) -> i64 {
    entries.iter().filter(|(g, _)| g == gamma).map(|(_, o)| *o).sum()
}

/// An active charge on a ray, with its degeneracy and central charge.
#[derive(Clone, Debug, PartialEq)]
pub struct RayCharge {
    pub charge: Charge,
    pub omega: i64,
    pub z: C64,
}

/// The ray ℓ = −Z·ℝ₊ in the ζ-plane shared by the listed charges.
#[derive(Clone, Debug, PartialEq)]
pub struct Ray {
    pub direction: C64,
    pub charges: Vec<RayCharge>,
}

impl Ray {
    pub fn angle(&self) -> f64 {
        self.direction.arg()
    }

    /// Smallest |Z| among the charges on the ray.
    pub fn min_abs_z(&self) -> f64 {
        self.charges.iter().map(|c| c.z.norm()).fold(f64::INFINITY, f64::min)
    }
}

/// Active rays at u: charges with Ω ≠ 0 and e^{−2πR|Z|} ≥ eps_spec, grouped by
/// direction and sorted by angle in (−π, π].
pub fn bps_rays(spectrum: &Spectrum, central: &CentralCharge, u: C64, r: f64, eps_spec: f64) -> Result<Vec<Ray>> {
    let basis = central.basis_values(u)?;
    rays_from_basis(&spectrum.active(u)?, &basis, r, eps_spec)
}

/// As [`bps_rays`], from precomputed basis central charges.
pub fn rays_from_basis(active: &[(Charge, i64)], basis: &[C64], r: f64, eps_spec: f64) -> Result<Vec<Ray>> {
    let mut list: Vec<RayCharge> = Vec::new();
    for (g, omega) in active {
        if *omega == 0 {
            continue;
        }
        let z = combine(g, basis);
        if z.norm() == 0.0 {
            return Err(Error::DegeneratePoint(format!("Z vanishes for active charge {g}")));
        }
        if (-2.0 * std::f64::consts::PI * r * z.norm()).exp() < eps_spec {
            continue;
        }
        list.push(RayCharge {
            charge: g.clone(),
            omega: *omega,
            z,
        });
    }
    list.sort_by(|a, b| (-a.z).arg().total_cmp(&(-b.z).arg()));
    let mut rays: Vec<Ray> = Vec::new();
    for rc in list {
        let dir = -rc.z / rc.z.norm();
        if let Some(last) = rays.last_mut() {
            if angle_between(last.direction, dir) < RAY_MERGE_ANGLE {
                check_same_ray(last, &rc)?;
                last.charges.push(rc);
                continue;
            }
        }
        rays.push(Ray {
            direction: dir,
            charges: vec![rc],
        });
    }
    // the first and last ray may meet across the branch of arg
    if rays.len() > 1 {
        let n = rays.len();
        if angle_between(rays[0].direction, rays[n - 1].direction) < RAY_MERGE_ANGLE {
            let last = rays.pop().unwrap();
            for rc in last.charges {
                check_same_ray(&rays[0], &rc)?;
                rays[0].charges.push(rc);
            }
        }
    }
    Ok(rays)
}

fn angle_between(a: C64, b: C64) -> f64 {
    (a * b.conj()).arg().abs()
}

fn check_same_ray(ray: &Ray, rc: &RayCharge) -> Result<()> {
    for other in &ray.charges {
        if !other.charge.is_proportional(&rc.charge) {
            return Err(Error::WallProximity(format!(
                "charges {} and {} have aligned central charges",
                other.charge, rc.charge
            )));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(v: [i64; 2]) -> Charge {
        Charge::new(v)
    }

    #[test]
    fn groups_and_sorts() {
        let basis = [C64::new(1.0, 0.0), C64::new(0.0, 1.0)];
        let active = vec![(c([1, 0]), 1), (c([-1, 0]), 1), (c([2, 0]), -1), (c([0, 1]), 1)];
        let rays = rays_from_basis(&active, &basis, 1.0, 1e-16).unwrap();
        assert_eq!(rays.len(), 3);
        for w in rays.windows(2) {
            assert!(w[0].angle() < w[1].angle());
        }
        let merged = rays.iter().find(|r| r.charges.len() == 2).unwrap();
        assert!((merged.direction - C64::new(-1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn aligned_non_proportional_is_a_wall() {
        let basis = [C64::new(1.0, 0.0), C64::new(2.0, 0.0)];
        let active = vec![(c([1, 0]), 1), (c([0, 1]), 1)];
        assert!(matches!(
            rays_from_basis(&active, &basis, 1.0, 1e-16),
            Err(Error::WallProximity(_))
        ));
    }

    #[test]
    fn cutoff_drops_heavy_charges() {
        let basis = [C64::new(0.1, 0.0), C64::new(0.0, 10.0)];
        let active = vec![(c([1, 0]), 1), (c([0, 1]), 1)];
        let rays = rays_from_basis(&active, &basis, 1.0, 1e-16).unwrap();
        assert_eq!(rays.len(), 1);
    }

    #[test]
    fn fixed_lookup() {
        let s = Spectrum::fixed(vec![(c([1, 0]), 1), (c([-1, 0]), 1)]);
        assert_eq!(s.omega(&c([1, 0]), C64::new(0.3, 0.0)).unwrap(), 1);
        assert_eq!(s.omega(&c([0, 1]), C64::new(0.3, 0.0)).unwrap(), 0);
        assert_eq!(s.support_bound().len(), 2);
    }
}
