//! Exact twisted torus algebra truncated by cone degree, Kontsevich-Soibelman
//! transformations and wall-crossing identity checks.

mod automorphism;
mod grading;
mod series;

pub use automorphism::{check_wcf, compose, ks_transform, product, spectrum_generator, TorusAutomorphism};
pub use grading::ConeGrading;
pub use series::{one_minus_power, TwistedSeries};
