//! Bundled models: the Ooguri-Vafa model and the pentagon model.

pub mod config;
pub mod ov;
pub mod pentagon;
pub mod periods;

use num::complex::Complex64 as C64;

use crate::charge_lattice::{CentralCharge, ChamberSpectrum, Charge, Lattice, ModelId, Spectrum};
use crate::error::Result;

/// Integer change of labels between two trivializations:
/// Z^{to}_γ = Z^{from}_{T(γ)}, with T given by the images of the basis.
#[derive(Clone, Debug, PartialEq)]
pub struct LabelTransition {
    pub description: String,
    pub images: Vec<Charge>,
}

impl LabelTransition {
    pub fn apply(&self, gamma: &Charge) -> Charge {
        let mut out = Charge::zero(gamma.rank());
        for (c, img) in gamma.coeffs().iter().zip(&self.images) {
            out = &out + &img.scale(*c);
        }
        out
    }
}

/// Data of one integrable-system model.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelDefinition {
    pub id: ModelId,
    pub lattice: Lattice,
    pub central: CentralCharge,
    pub spectrum: Spectrum,
    pub domain: &'static str,
    pub discriminant: Vec<C64>,
    pub walls: &'static str,
    pub transitions: Vec<LabelTransition>,
}

fn unit_spectrum(charges: &[[i64; 2]]) -> Vec<(Charge, i64)> {
    charges.iter().map(|c| (Charge::new(*c), 1)).collect()
}

/// Ooguri-Vafa data on |u| < |Λ|, basis (γ_e, γ_m), ⟨γ_m, γ_e⟩ = 1.
pub fn ov_model(lambda: C64) -> Result<ModelDefinition> {
    let lattice = Lattice::new(vec![vec![0, -1], vec![1, 0]], 0)?;
    let central = CentralCharge::new(ModelId::OoguriVafa, lambda)?;
    let spectrum = Spectrum::chambered(
        central,
        vec![ChamberSpectrum {
            label: "disc".into(),
            entries: unit_spectrum(&[[1, 0], [-1, 0]]),
        }],
    );
    Ok(ModelDefinition {
        id: ModelId::OoguriVafa,
        lattice,
        central,
        spectrum,
        domain: "0 < |u| < |Λ|, cut along u/Λ ∈ ℝ₋",
        discriminant: vec![C64::new(0.0, 0.0)],
        walls: "none",
        transitions: vec![LabelTransition {
            description: "counterclockwise around u = 0".into(),
            images: vec![Charge::new([1, 0]), Charge::new([1, 1])],
        }],
    })
}

/// Pentagon data on the u-plane, basis (γ₁, γ₂), ⟨γ₁, γ₂⟩ = 1.
pub fn pentagon_model(lambda: C64) -> Result<ModelDefinition> {
    let lattice = Lattice::new(vec![vec![0, 1], vec![-1, 0]], 0)?;
    let central = CentralCharge::new(ModelId::Pentagon, lambda)?;
    let base = [[1, 0], [-1, 0], [0, 1], [0, -1]];
    let with = |extra: [[i64; 2]; 2]| {
        let mut v = base.to_vec();
        v.extend(extra);
        unit_spectrum(&v)
    };
    let spectrum = Spectrum::chambered(
        central,
        vec![
            ChamberSpectrum {
                label: "in".into(),
                entries: unit_spectrum(&base),
            },
            ChamberSpectrum {
                label: "out+".into(),
                entries: with([[1, 1], [-1, -1]]),
            },
            ChamberSpectrum {
                label: "out-".into(),
                entries: with([[1, -1], [-1, 1]]),
            },
        ],
    );
    let l3 = lambda * lambda * lambda;
    Ok(ModelDefinition {
        id: ModelId::Pentagon,
        lattice,
        central,
        spectrum,
        domain: "u ∈ ℂ, cut along u/Λ³ ∈ (−∞, −2] ∪ [2, ∞) (upper-side labels on the cut)",
        discriminant: vec![-2.0 * l3, 2.0 * l3],
        walls: "closed curve through ±2Λ³ where Z_{γ₁}/Z_{γ₂} is real",
        transitions: vec![
            LabelTransition {
                description: "across the cut at +2Λ³, upper to lower side".into(),
                images: vec![Charge::new([1, 1]), Charge::new([0, 1])],
            },
            LabelTransition {
                description: "across the cut at −2Λ³, upper to lower side".into(),
                images: vec![Charge::new([1, 0]), Charge::new([1, 1])],
            },
        ],
    })
}

/// Builtin model by identifier with Λ.
pub fn builtin(id: ModelId, lambda: C64) -> Result<ModelDefinition> {
    match id {
        ModelId::OoguriVafa => ov_model(lambda),
        ModelId::Pentagon => pentagon_model(lambda),
    }
}

impl ModelDefinition {
    pub fn chamber_labels(&self) -> Vec<&str> {
        self.spectrum.chambers().iter().map(|c| c.label.as_str()).collect()
    }

    /// Sample points of chamber `chamber` on an n × n polar grid.
    pub fn chamber_grid(&self, chamber: usize, n: usize) -> Result<Vec<C64>> {
        let n = n.max(2);
        let lambda = self.central.lambda();
        let lin = |a: f64, b: f64, i: usize| a + (b - a) * i as f64 / (n - 1) as f64;
        let mut pts = Vec::with_capacity(n * n);
        match self.id {
            ModelId::OoguriVafa => {
                let pi = std::f64::consts::PI;
                for i in 0..n {
                    for j in 0..n {
                        let r = lin(0.1, 0.9, i);
                        let phi = lin(-pi + 0.2, pi - 0.2, j);
                        pts.push(lambda * C64::from_polar(r, phi));
                    }
                }
            }
            ModelId::Pentagon => {
                let pi = std::f64::consts::PI;
                let rot = lambda * lambda * lambda / (lambda * lambda * lambda).norm();
                let (phis, scales): ((f64, f64), (f64, f64)) = match chamber {
                    // asymmetric so that no phase lands on the wall point v = 2
                    0 => ((-pi + 0.1, pi - 0.15), (0.05, 0.85)),
                    1 => ((0.2, pi - 0.2), (1.2, 2.5)),
                    _ => ((-pi + 0.2, -0.2), (1.2, 2.5)),
                };
                for j in 0..n {
                    let phi = lin(phis.0, phis.1, j);
                    let w = pentagon::wall_point(lambda, phi + rot.arg())?;
                    for i in 0..n {
                        pts.push(w * lin(scales.0, scales.1, i));
                    }
                }
            }
        }
        Ok(pts)
    }
}
