use num::rational::Ratio;
use num::{One, Zero};

use crate::charge_lattice::{Charge, Lattice};
use crate::error::{Error, Result};

/// Grading of the twisted torus algebra by a strictly convex cone: a charge
/// in the cone is a non-negative integer combination of the generators and
/// its degree is the sum of those coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConeGrading {
    lattice: Lattice,
    generators: Vec<Charge>,
    inverse: Vec<Vec<Ratio<i64>>>,
}

impl ConeGrading {
    /// `generators` must form a basis of the lattice.
    pub fn new(lattice: Lattice, generators: Vec<Charge>) -> Result<Self> {
        let n = lattice.rank_total();
        if generators.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: generators.len(),
            });
        }
        for g in &generators {
            lattice.check(g)?;
        }
        // columns of G are the generators; invert by Gauss-Jordan
        let mut a: Vec<Vec<Ratio<i64>>> = (0..n)
            .map(|i| {
                let mut row: Vec<Ratio<i64>> = generators.iter().map(|g| Ratio::from_integer(g.0[i])).collect();
                row.extend((0..n).map(|j| if i == j { Ratio::one() } else { Ratio::zero() }));
                row
            })
            .collect();
        for col in 0..n {
            let pivot = (col..n)
                .find(|&r| !a[r][col].is_zero())
                .ok_or_else(|| Error::InvalidParameter("cone generators are linearly dependent".into()))?;
            a.swap(col, pivot);
            let p = a[col][col];
            for x in a[col].iter_mut() {
                *x /= p;
            }
            for r in 0..n {
                if r != col && !a[r][col].is_zero() {
                    let f = a[r][col];
                    for c in 0..2 * n {
                        let v = a[col][c];
                        a[r][c] -= f * v;
                    }
                }
            }
        }
        let inverse = a.into_iter().map(|row| row[n..].to_vec()).collect();
        Ok(ConeGrading {
            lattice,
            generators,
            inverse,
        })
    }

    /// Grading by the lattice basis itself.
    pub fn standard(lattice: Lattice) -> Self {
        let gens = (0..lattice.rank_total()).map(|i| lattice.basis(i)).collect();
        ConeGrading::new(lattice, gens).expect("basis generators are independent")
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn generators(&self) -> &[Charge] {
        &self.generators
    }

    pub fn rank(&self) -> usize {
        self.generators.len()
    }

    /// Coefficients in the generator basis, if they are non-negative integers.
    pub fn coordinates(&self, gamma: &Charge) -> Option<Vec<i64>> {
        if gamma.rank() != self.rank() {
            return None;
        }
        let mut out = Vec::with_capacity(self.rank());
        for row in &self.inverse {
            let v: Ratio<i64> = row
                .iter()
                .zip(gamma.coeffs())
                .fold(Ratio::zero(), |acc, (r, c)| acc + r * Ratio::from_integer(*c));
            if !v.is_integer() || v < Ratio::zero() {
                return None;
            }
            out.push(v.to_integer());
        }
        Some(out)
    }

    pub fn degree(&self, gamma: &Charge) -> Result<usize> {
        self.lattice.check(gamma)?;
        self.coordinates(gamma)
            .map(|m| m.iter().sum::<i64>() as usize)
            .ok_or_else(|| Error::NotInCone(gamma.to_string()))
    }

    /// Charge with the given generator coordinates.
    pub fn charge_of(&self, coords: &[i64]) -> Charge {
        let mut out = Charge::zero(self.rank());
        for (m, g) in coords.iter().zip(&self.generators) {
            out = &out + &g.scale(*m);
        }
        out
    }
}
