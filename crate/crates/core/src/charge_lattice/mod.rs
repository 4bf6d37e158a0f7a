//! Charge lattice, central charge, BPS spectrum and the structural checks
//! on integrable-system data.

mod central;
mod conditions;
mod lattice;
mod spectrum;

pub use central::{combine, CentralCharge, ModelId};
pub use conditions::{validate_conditions, ConditionReport, PointResiduals};
pub use lattice::{Charge, Lattice};
pub use spectrum::{bps_rays, rays_from_basis, ChamberSpectrum, Ray, RayCharge, Spectrum, RAY_MERGE_ANGLE};
