use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::Arc;

use num::{BigInt, BigRational, One, Signed, Zero};

use super::grading::ConeGrading;
use crate::charge_lattice::Charge;
use crate::error::{Error, Result};

/// Truncated series Σ c_γ X_γ over charges in the grading cone, with
/// X_a·X_b = (−1)^⟨a,b⟩ X_{a+b} and exact rational coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct TwistedSeries {
    terms: BTreeMap<Charge, BigRational>,
    grading: Arc<ConeGrading>,
    order: usize,
}

pub(crate) fn twist_sign(p: i64) -> BigRational {
    if p.rem_euclid(2) == 0 {
        BigRational::one()
    } else {
        -BigRational::one()
    }
}

impl TwistedSeries {
    pub fn zero(grading: Arc<ConeGrading>, order: usize) -> Self {
        TwistedSeries {
            terms: BTreeMap::new(),
            grading,
            order,
        }
    }

    pub fn one(grading: Arc<ConeGrading>, order: usize) -> Self {
        let rank = grading.rank();
        let mut s = TwistedSeries::zero(grading, order);
        s.terms.insert(Charge::zero(rank), BigRational::one());
        s
    }

    /// c·X_γ, or zero when the degree of γ exceeds the order.
    pub fn monomial(grading: Arc<ConeGrading>, order: usize, gamma: Charge, c: BigRational) -> Result<Self> {
        let d = grading.degree(&gamma)?;
        let mut s = TwistedSeries::zero(grading, order);
        if d <= order && !c.is_zero() {
            s.terms.insert(gamma, c);
        }
        Ok(s)
    }

    pub fn grading(&self) -> &Arc<ConeGrading> {
        &self.grading
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn terms(&self) -> &BTreeMap<Charge, BigRational> {
        &self.terms
    }

    pub fn coefficient(&self, gamma: &Charge) -> BigRational {
        self.terms.get(gamma).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree_of(&self, gamma: &Charge) -> usize {
        self.grading.degree(gamma).expect("stored charges lie in the cone")
    }

    /// Smallest degree carrying a nonzero term.
    pub fn min_degree(&self) -> Option<usize> {
        self.terms.keys().map(|g| self.degree_of(g)).min()
    }

    pub fn check_compatible(&self, other: &TwistedSeries) -> Result<()> {
        if self.order != other.order {
            return Err(Error::GradingMismatch(format!(
                "truncation orders {} and {}",
                self.order, other.order
            )));
        }
        if !Arc::ptr_eq(&self.grading, &other.grading) && *self.grading != *other.grading {
            return Err(Error::GradingMismatch("different cone gradings".into()));
        }
        Ok(())
    }

    fn add_term(&mut self, gamma: Charge, c: BigRational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(gamma) {
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
            Entry::Vacant(v) => {
                v.insert(c);
            }
        }
    }

    pub fn add(&self, other: &TwistedSeries) -> Result<TwistedSeries> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (g, c) in &other.terms {
            out.add_term(g.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &TwistedSeries) -> Result<TwistedSeries> {
        self.add(&other.scale(&-BigRational::one()))
    }

    pub fn scale(&self, c: &BigRational) -> TwistedSeries {
        let mut out = TwistedSeries::zero(self.grading.clone(), self.order);
        if c.is_zero() {
            return out;
        }
        for (g, v) in &self.terms {
            out.terms.insert(g.clone(), v * c);
        }
        out
    }

    /// Twisted product, truncated at the order.
    pub fn mul(&self, other: &TwistedSeries) -> Result<TwistedSeries> {
        self.check_compatible(other)?;
        let lattice = self.grading.lattice();
        let mut out = TwistedSeries::zero(self.grading.clone(), self.order);
        for (a, ca) in &self.terms {
            let da = self.degree_of(a);
            for (b, cb) in &other.terms {
                if da + self.degree_of(b) > self.order {
                    continue;
                }
                let s = twist_sign(lattice.pair_unchecked(a, b));
                out.add_term(a + b, ca * cb * s);
            }
        }
        Ok(out)
    }

    pub fn pow(&self, k: u32) -> Result<TwistedSeries> {
        let mut out = TwistedSeries::one(self.grading.clone(), self.order);
        for _ in 0..k {
            out = out.mul(self)?;
        }
        Ok(out)
    }

    /// Bilinear extension of {X_a, X_b} = ⟨a,b⟩ X_a X_b.
    pub fn poisson_bracket(&self, other: &TwistedSeries) -> Result<TwistedSeries> {
        self.check_compatible(other)?;
        let lattice = self.grading.lattice();
        let mut out = TwistedSeries::zero(self.grading.clone(), self.order);
        for (a, ca) in &self.terms {
            let da = self.degree_of(a);
            for (b, cb) in &other.terms {
                let p = lattice.pair_unchecked(a, b);
                if p == 0 || da + self.degree_of(b) > self.order {
                    continue;
                }
                let c = ca * cb * twist_sign(p) * BigRational::from_integer(BigInt::from(p));
                out.add_term(a + b, c);
            }
        }
        Ok(out)
    }

    /// Terms as `(coeffs...) : numerator/denominator`, sorted by degree then
    /// by charge.
    pub fn dump(&self) -> String {
        let mut keys: Vec<(&Charge, &BigRational)> = self.terms.iter().collect();
        keys.sort_by(|x, y| self.degree_of(x.0).cmp(&self.degree_of(y.0)).then_with(|| x.0.cmp(y.0)));
        let mut s = String::new();
        for (g, c) in keys {
            let _ = writeln!(s, "{g} : {}/{}", c.numer(), c.denom());
        }
        s
    }
}

/// Generalized binomial coefficient C(e, k) for integer e.
pub(crate) fn binomial(e: i64, k: usize) -> BigRational {
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    for j in 0..k {
        num *= BigInt::from(e - j as i64);
        den *= BigInt::from(j as i64 + 1);
    }
    BigRational::new(num, den)
}

/// (1 − X_γ)^e truncated at the order; X_γ^k = X_{kγ} because ⟨γ,γ⟩ = 0.
pub fn one_minus_power(grading: Arc<ConeGrading>, order: usize, gamma: &Charge, e: i64) -> Result<TwistedSeries> {
    let d = grading.degree(gamma)?;
    if d == 0 {
        return Err(Error::ZeroDegree(gamma.to_string()));
    }
    let mut out = TwistedSeries::zero(grading, order);
    let mut k = 0usize;
    while k * d <= order {
        let mut c = binomial(e, k);
        if k % 2 == 1 {
            c = -c;
        }
        if !c.is_zero() {
            out.terms.insert(gamma.scale(k as i64), c);
        }
        if e >= 0 && k as i64 >= e {
            break;
        }
        k += 1;
    }
    Ok(out)
}

impl TwistedSeries {
    /// Largest |coefficient|, as a float, for diagnostics.
    pub fn max_abs_coefficient(&self) -> f64 {
        use num::ToPrimitive;
        self.terms
            .values()
            .map(|c| c.abs().to_f64().unwrap_or(f64::INFINITY))
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::charge_lattice::Lattice;

    fn grading() -> Arc<ConeGrading> {
        Arc::new(ConeGrading::standard(
            Lattice::new(vec![vec![0, 1], vec![-1, 0]], 0).unwrap(),
        ))
    }

    fn x(g: &Arc<ConeGrading>, c: [i64; 2]) -> TwistedSeries {
        TwistedSeries::monomial(g.clone(), 8, Charge::new(c), BigRational::one()).unwrap()
    }

    #[test]
    fn twisted_product() {
        let g = grading();
        let p = x(&g, [1, 0]).mul(&x(&g, [0, 1])).unwrap();
        assert_eq!(p.coefficient(&Charge::new([1, 1])), -BigRational::one());
        let q = x(&g, [0, 1]).mul(&x(&g, [1, 0])).unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn bracket_examples() {
        let g = grading();
        let b = x(&g, [1, 0]).poisson_bracket(&x(&g, [0, 1])).unwrap();
        // ⟨γ₁,γ₂⟩ X_{γ₁} X_{γ₂} = −X_{γ₁+γ₂}
        assert_eq!(b.coefficient(&Charge::new([1, 1])), -BigRational::one());
        assert!(x(&g, [1, 0]).poisson_bracket(&x(&g, [1, 0])).unwrap().is_zero());
    }

    #[test]
    fn geometric_series() {
        let g = grading();
        let s = one_minus_power(g.clone(), 8, &Charge::new([0, 1]), -1).unwrap();
        for k in 0..=8 {
            assert_eq!(s.coefficient(&Charge::new([0, k])), BigRational::one());
        }
        let t = one_minus_power(g.clone(), 8, &Charge::new([0, 1]), 1).unwrap();
        assert_eq!(s.mul(&t).unwrap(), TwistedSeries::one(g, 8));
    }

    #[test]
    fn truncation_drops_high_degree() {
        let g = grading();
        let a = TwistedSeries::monomial(g.clone(), 3, Charge::new([2, 0]), BigRational::one()).unwrap();
        let b = TwistedSeries::monomial(g, 3, Charge::new([0, 2]), BigRational::one()).unwrap();
        assert!(a.mul(&b).unwrap().is_zero());
    }

    #[test]
    fn mismatched_orders_rejected() {
        let g = grading();
        let a = TwistedSeries::one(g.clone(), 3);
        let b = TwistedSeries::one(g, 4);
        assert!(matches!(a.add(&b), Err(Error::GradingMismatch(_))));
    }
}
