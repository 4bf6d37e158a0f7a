use std::sync::Arc;

use num::complex::Complex64 as C64;
use num::{BigRational, One};

use super::grading::ConeGrading;
use super::series::{one_minus_power, twist_sign, TwistedSeries};
use crate::charge_lattice::Charge;
use crate::error::{Error, Result};

/// Unipotent automorphism of the truncated twisted torus algebra, stored by
/// the images of the generator monomials X_{g_i}.
#[derive(Clone, Debug, PartialEq)]
pub struct TorusAutomorphism {
    images: Vec<TwistedSeries>,
    grading: Arc<ConeGrading>,
    order: usize,
}

impl TorusAutomorphism {
    pub fn identity(grading: Arc<ConeGrading>, order: usize) -> Self {
        let images = grading
            .generators()
            .iter()
            .map(|g| TwistedSeries::monomial(grading.clone(), order, g.clone(), BigRational::one()).unwrap())
            .collect();
        TorusAutomorphism { images, grading, order }
    }

    pub fn images(&self) -> &[TwistedSeries] {
        &self.images
    }

    pub fn grading(&self) -> &Arc<ConeGrading> {
        &self.grading
    }

    pub fn order(&self) -> usize {
        self.order
    }

    fn check_compatible(&self, other: &TorusAutomorphism) -> Result<()> {
        if self.order != other.order {
            return Err(Error::GradingMismatch(format!(
                "truncation orders {} and {}",
                self.order, other.order
            )));
        }
        if *self.grading != *other.grading {
            return Err(Error::GradingMismatch("different cone gradings".into()));
        }
        Ok(())
    }

    /// Image of X_μ for μ in the cone, from X_μ = ε(μ) Π X_{g_i}^{m_i} with
    /// ε(μ) = (−1)^{Σ_{i<j} m_i m_j ⟨g_i, g_j⟩}.
    pub fn image_of(&self, mu: &Charge) -> Result<TwistedSeries> {
        let coords = self
            .grading
            .coordinates(mu)
            .ok_or_else(|| Error::NotInCone(mu.to_string()))?;
        let gens = self.grading.generators();
        let lattice = self.grading.lattice();
        let mut exponent = 0i64;
        for i in 0..coords.len() {
            for j in (i + 1)..coords.len() {
                exponent += coords[i] * coords[j] * lattice.pair_unchecked(&gens[i], &gens[j]);
            }
        }
        let mut out = TwistedSeries::one(self.grading.clone(), self.order).scale(&twist_sign(exponent));
        for (img, m) in self.images.iter().zip(&coords) {
            if *m > 0 {
                out = out.mul(&img.pow(*m as u32)?)?;
            }
        }
        Ok(out)
    }

    /// Pullback of a series.
    pub fn apply(&self, f: &TwistedSeries) -> Result<TwistedSeries> {
        let mut out = TwistedSeries::zero(self.grading.clone(), self.order);
        for (mu, c) in f.terms() {
            out = out.add(&self.image_of(mu)?.scale(c))?;
        }
        Ok(out)
    }

    /// Lowest degree at which generator images differ, if any.
    pub fn first_discrepancy(&self, other: &TorusAutomorphism) -> Result<Option<usize>> {
        self.check_compatible(other)?;
        let mut best: Option<usize> = None;
        for (a, b) in self.images.iter().zip(&other.images) {
            if let Some(d) = a.sub(b)?.min_degree() {
                best = Some(best.map_or(d, |x: usize| x.min(d)));
            }
        }
        Ok(best)
    }
}

/// K_γ^k: X_{γ'} ↦ X_{γ'} (1 − X_γ)^{k⟨γ,γ'⟩} on the generators.
pub fn ks_transform(grading: Arc<ConeGrading>, gamma: &Charge, power: i64, order: usize) -> Result<TorusAutomorphism> {
    if grading.degree(gamma)? == 0 {
        return Err(Error::ZeroDegree(gamma.to_string()));
    }
    let lattice = grading.lattice().clone();
    let mut images = Vec::with_capacity(grading.rank());
    for g in grading.generators() {
        let e = power * lattice.pair_unchecked(gamma, g);
        let x = TwistedSeries::monomial(grading.clone(), order, g.clone(), BigRational::one())?;
        images.push(x.mul(&one_minus_power(grading.clone(), order, gamma, e)?)?);
    }
    Ok(TorusAutomorphism { images, grading, order })
}

/// (a∘b)^* X = b^*(a^* X).
pub fn compose(a: &TorusAutomorphism, b: &TorusAutomorphism) -> Result<TorusAutomorphism> {
    a.check_compatible(b)?;
    let images = a.images.iter().map(|img| b.apply(img)).collect::<Result<Vec<_>>>()?;
    Ok(TorusAutomorphism {
        images,
        grading: a.grading.clone(),
        order: a.order,
    })
}

/// Product F₁F₂⋯F_k acting on functions: f ↦ F₁^*(F₂^*(⋯F_k^*(f))).
///
/// This is the reading under which K_{γ₁}K_{γ₂} = K_{γ₂}K_{γ₁+γ₂}K_{γ₁}
/// holds for ⟨γ₁,γ₂⟩ = 1.
pub fn product(grading: Arc<ConeGrading>, order: usize, factors: &[TorusAutomorphism]) -> Result<TorusAutomorphism> {
    let mut out = TorusAutomorphism::identity(grading, order);
    for f in factors {
        out = compose(f, &out)?;
    }
    Ok(out)
}

/// Whether two automorphisms agree up to the truncation order, with the
/// lowest degree of disagreement otherwise.
pub fn check_wcf(lhs: &TorusAutomorphism, rhs: &TorusAutomorphism) -> Result<(bool, Option<usize>)> {
    let d = lhs.first_discrepancy(rhs)?;
    Ok((d.is_none(), d))
}

/// Scale for rounding central charges before exact phase comparison.
const PHASE_SCALE: f64 = (1u64 << 40) as f64;

fn quantize(z: C64) -> (i128, i128) {
    (
        (z.re * PHASE_SCALE).round() as i128,
        (z.im * PHASE_SCALE).round() as i128,
    )
}

/// A_V: product of K_γ^{Ω} over the given active charges, ordered by
/// increasing arg Z_γ. The charges must lie in one strictly convex sector,
/// so the order is decided exactly by cross products of the rounded values.
pub fn spectrum_generator(
    grading: Arc<ConeGrading>,
    order: usize,
    charges: &[(Charge, i64, C64)],
) -> Result<TorusAutomorphism> {
    let mut items: Vec<(Charge, i64, (i128, i128))> = charges
        .iter()
        .filter(|c| c.1 != 0)
        .map(|(g, o, z)| (g.clone(), *o, quantize(*z)))
        .collect();
    let cross = |a: (i128, i128), b: (i128, i128)| a.0 * b.1 - a.1 * b.0;
    for i in 0..items.len() {
        for j in (i + 1)..items.len() {
            let (a, b) = (items[i].2, items[j].2);
            if cross(a, b) == 0 && a.0 * b.0 + a.1 * b.1 > 0 && !items[i].0.is_proportional(&items[j].0) {
                return Err(Error::WallProximity(format!(
                    "charges {} and {} have equal phase",
                    items[i].0, items[j].0
                )));
            }
        }
    }
    items.sort_by(|a, b| 0i128.cmp(&cross(a.2, b.2)));
    let factors = items
        .iter()
        .map(|(g, o, _)| ks_transform(grading.clone(), g, *o, order))
        .collect::<Result<Vec<_>>>()?;
    product(grading, order, &factors)
}
