use std::fmt;
use std::ops::{Add, Neg, Sub};

use nalgebra::DMatrix;
use num::integer::gcd;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A charge, written in the fixed basis of the lattice.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Charge(pub Vec<i64>);

impl Charge {
    pub fn new(coeffs: impl Into<Vec<i64>>) -> Self {
        Charge(coeffs.into())
    }

    pub fn zero(rank: usize) -> Self {
        Charge(vec![0; rank])
    }

    pub fn basis(rank: usize, i: usize) -> Self {
        let mut c = vec![0; rank];
        c[i] = 1;
        Charge(c)
    }

    pub fn rank(&self) -> usize {
        self.0.len()
    }

    pub fn coeffs(&self) -> &[i64] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    pub fn scale(&self, k: i64) -> Charge {
        Charge(self.0.iter().map(|c| c * k).collect())
    }

    /// Gcd of the coefficients; 0 for the zero charge.
    pub fn divisibility(&self) -> i64 {
        self.0.iter().fold(0i64, |g, &c| gcd(g, c))
    }

    /// Returns γ/n when n divides every coefficient.
    pub fn divide(&self, n: i64) -> Option<Charge> {
        if n == 0 || self.0.iter().any(|c| c % n != 0) {
            return None;
        }
        Some(Charge(self.0.iter().map(|c| c / n).collect()))
    }

    pub fn primitive(&self) -> Charge {
        let g = self.divisibility();
        if g == 0 {
            self.clone()
        } else {
            self.divide(g).unwrap()
        }
    }

    /// Whether the two charges span a rank ≤ 1 sublattice (either sign).
    pub fn is_proportional(&self, other: &Charge) -> bool {
        let n = self.rank().min(other.rank());
        for i in 0..n {
            for j in (i + 1)..n {
                if self.0[i] * other.0[j] != self.0[j] * other.0[i] {
                    return false;
                }
            }
        }
        true
    }

    /// L1 norm of the coefficient vector.
    pub fn l1(&self) -> i64 {
        self.0.iter().map(|c| c.abs()).sum()
    }
}

impl fmt::Display for Charge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl Add for &Charge {
    type Output = Charge;
    fn add(self, rhs: &Charge) -> Charge {
        assert_eq!(self.rank(), rhs.rank(), "charge rank mismatch");
        Charge(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Add for Charge {
    type Output = Charge;
    fn add(self, rhs: Charge) -> Charge {
        &self + &rhs
    }
}

impl Sub for &Charge {
    type Output = Charge;
    fn sub(self, rhs: &Charge) -> Charge {
        self + &(-rhs)
    }
}

impl Neg for &Charge {
    type Output = Charge;
    fn neg(self) -> Charge {
        Charge(self.0.iter().map(|c| -c).collect())
    }
}

impl Neg for Charge {
    type Output = Charge;
    fn neg(self) -> Charge {
        -&self
    }
}

/// Charge lattice Γ with its antisymmetric integer pairing.
///
/// The flavor sublattice (the radical of the pairing) is spanned by the last
/// `flavor_rank` basis vectors.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lattice {
    rank_total: usize,
    pairing: Vec<Vec<i64>>,
    flavor_rank: usize,
}

impl Lattice {
    pub fn new(pairing: Vec<Vec<i64>>, flavor_rank: usize) -> Result<Self> {
        let n = pairing.len();
        if n == 0 {
            return Err(Error::InvalidLattice("empty pairing matrix".into()));
        }
        if let Some(row) = pairing.iter().find(|r| r.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: row.len(),
            });
        }
        for i in 0..n {
            for j in 0..n {
                if pairing[i][j] != -pairing[j][i] {
                    return Err(Error::InvalidLattice(format!("pairing not antisymmetric at ({i},{j})")));
                }
            }
        }
        if flavor_rank > n || !(n - flavor_rank).is_multiple_of(2) {
            return Err(Error::InvalidLattice(format!(
                "gauge rank {} must be even",
                n as i64 - flavor_rank as i64
            )));
        }
        let g = n - flavor_rank;
        for i in g..n {
            if pairing[i].iter().any(|&x| x != 0) {
                return Err(Error::InvalidLattice(format!(
                    "flavor basis vector {i} is not in the radical"
                )));
            }
        }
        let lattice = Lattice {
            rank_total: n,
            pairing,
            flavor_rank,
        };
        if lattice.gauge_block().determinant().abs() < 0.5 {
            return Err(Error::InvalidLattice("pairing degenerate on the gauge quotient".into()));
        }
        Ok(lattice)
    }

    pub fn rank_total(&self) -> usize {
        self.rank_total
    }

    pub fn flavor_rank(&self) -> usize {
        self.flavor_rank
    }

    pub fn gauge_rank(&self) -> usize {
        self.rank_total - self.flavor_rank
    }

    pub fn pairing_matrix(&self) -> &[Vec<i64>] {
        &self.pairing
    }

    pub fn basis(&self, i: usize) -> Charge {
        Charge::basis(self.rank_total, i)
    }

    pub fn check(&self, a: &Charge) -> Result<()> {
        if a.rank() != self.rank_total {
            return Err(Error::DimensionMismatch {
                expected: self.rank_total,
                got: a.rank(),
            });
        }
        Ok(())
    }

    /// ⟨a, b⟩ = aᵀ·P·b.
    pub fn pair(&self, a: &Charge, b: &Charge) -> Result<i64> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.pair_unchecked(a, b))
    }

    pub(crate) fn pair_unchecked(&self, a: &Charge, b: &Charge) -> i64 {
        let mut s = 0;
        for (i, ai) in a.0.iter().enumerate() {
            if *ai == 0 {
                continue;
            }
            for (j, bj) in b.0.iter().enumerate() {
                s += ai * self.pairing[i][j] * bj;
            }
        }
        s
    }

    fn gauge_block(&self) -> DMatrix<f64> {
        let g = self.gauge_rank();
        DMatrix::from_fn(g, g, |i, j| self.pairing[i][j] as f64)
    }

    /// Pairing on the dual of the gauge lattice: the transpose of the inverse
    /// of the gauge block. This orientation makes ⟨dZ ∧ dZ̄⟩ positive on the
    /// bundled models.
    pub fn dual_pairing(&self) -> DMatrix<f64> {
        self.gauge_block()
            .try_inverse()
            .expect("gauge block checked nondegenerate")
            .transpose()
    }

    /// Quadratic refinement q(γ) = Σ_{i<j} γⁱγʲ⟨eᵢ,eⱼ⟩ mod 2.
    pub fn quadratic_refinement(&self, a: &Charge) -> i64 {
        let mut q = 0i64;
        for i in 0..self.rank_total {
            for j in (i + 1)..self.rank_total {
                q += a.0[i] * a.0[j] * self.pairing[i][j];
            }
        }
        q.rem_euclid(2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pentagon() -> Lattice {
        Lattice::new(vec![vec![0, 1], vec![-1, 0]], 0).unwrap()
    }

    #[test]
    fn self_pairing_vanishes() {
        let l = pentagon();
        let g = Charge::new([3, -2]);
        assert_eq!(l.pair(&g, &g).unwrap(), 0);
    }

    #[test]
    fn pentagon_basis_pairs_to_one() {
        let l = pentagon();
        assert_eq!(l.pair(&l.basis(0), &l.basis(1)).unwrap(), 1);
    }

    #[test]
    fn bilinear_expansion() {
        let l = pentagon();
        let g1 = l.basis(0);
        let g2 = l.basis(1);
        let a = &g1.scale(2) + &g2;
        assert_eq!(l.pair(&a, &g1).unwrap(), -1);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let l = pentagon();
        assert!(matches!(
            l.pair(&Charge::new([1, 0, 0]), &l.basis(0)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn rejects_bad_matrices() {
        assert!(Lattice::new(vec![vec![0, 1], vec![1, 0]], 0).is_err());
        assert!(Lattice::new(vec![vec![0, 0], vec![0, 0]], 0).is_err());
        // flavor vector outside the radical
        assert!(Lattice::new(vec![vec![0, 1, 0], vec![-1, 0, 1], vec![0, -1, 0]], 1).is_err());
        let with_flavor = Lattice::new(vec![vec![0, 1, 0], vec![-1, 0, 0], vec![0, 0, 0]], 1).unwrap();
        assert_eq!(with_flavor.gauge_rank(), 2);
    }

    #[test]
    fn divisibility_and_proportionality() {
        let a = Charge::new([2, 4]);
        assert_eq!(a.divisibility(), 2);
        assert_eq!(a.primitive(), Charge::new([1, 2]));
        assert!(a.is_proportional(&Charge::new([-1, -2])));
        assert!(!a.is_proportional(&Charge::new([1, 1])));
        assert_eq!(a.divide(3), None);
    }
}
