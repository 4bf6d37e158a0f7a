//! Hyperkähler metrics on complex integrable systems from ray-jump
//! Riemann-Hilbert data.
//!
//! The crate is organised around the objects that feed the construction:
//! the charge lattice with its central charge and BPS spectrum, the formal
//! Kontsevich-Soibelman algebra, the semiflat coordinates, the integral
//! equation solver, its tree expansion, and the metric extraction.

// index loops mirror the matrix formulas
#![allow(clippy::needless_range_loop)]

pub mod charge_lattice;
pub mod error;
pub mod formal_ks;
pub mod metric_geometry;
pub mod model_library;
pub mod quadrature;
pub mod rh_solver;
pub mod semiflat;
pub mod tree_series;

pub use error::{Error, Result};
pub use model_library::config::{load_model, ModelConfig};
pub use num::complex::Complex64 as C64;
