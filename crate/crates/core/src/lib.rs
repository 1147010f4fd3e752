//! Simulation and analysis of strongly coupled photon-magnon systems in
//! dielectric ferrimagnetic spheres.
//!
//! * [`model`]: closed-form coupling relations (cooperativity, `g/omega`,
//!   effective susceptibility, permeability tensor).
//! * [`coupled`]: coupled-mode eigenfrequencies and `S21` transmission maps.
//! * [`sphere`]: analytic dielectric sphere resonances, fields, filling
//!   factors and permittivity extraction.
//! * [`fitting`]: peak finding, Fano fits, ridge extraction and
//!   avoided-crossing fits.
//!
//! The closed-form parts are generic over [`Real`] (`f32` or `f64`); the
//! aliases below fix the scalar to `f64`.

pub mod coupled;
pub mod dataset;
pub mod error;
pub mod fitting;
pub mod map_io;
pub mod model;
pub mod scalar;
pub mod sphere;

pub use error::{FitError, ModelError, SphereError};
pub use scalar::Real;

pub type PhotonMode = model::PhotonMode<f64>;
pub type MagnonBranch = model::MagnonBranch<f64>;
pub type PermeabilityParams = model::PermeabilityParams<f64>;
pub type DerivedModeReport = model::DerivedModeReport<f64>;
pub type CoupledSystem = coupled::CoupledSystem<f64>;
pub type TransmissionMap = coupled::TransmissionMap<f64>;
pub type PeakList = fitting::PeakList<f64>;

pub type PhotonMode32 = model::PhotonMode<f32>;
pub type MagnonBranch32 = model::MagnonBranch<f32>;
pub type CoupledSystem32 = coupled::CoupledSystem<f32>;
pub type TransmissionMap32 = coupled::TransmissionMap<f32>;
