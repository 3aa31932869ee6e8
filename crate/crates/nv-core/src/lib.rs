//! Periodic-grid numerics for the Novikov-Veselov equation at fixed positive
//! energy.
//!
//! The layers, bottom up:
//!
//! * [`grid`]: square periodic grids, complex fields, spectral derivatives
//!   and the `dz`/`dzbar` calculus every other module is written in.
//! * [`special`]: the order-zero Hankel function of the first kind and the
//!   outgoing Helmholtz kernel built from it.
//! * [`potential`]: potential families, sampling with localization checks,
//!   decay-rate estimation, traveling-wave residuals.
//! * [`nv`]: the constraint solver and the integrating-factor RK4 flow.
//!
//! All numerics are generic over the working precision through
//! [`scalar::Real`].

pub mod error;
pub mod grid;
pub mod identities;
pub mod kdv;
pub mod nv;
pub mod potential;
pub mod scalar;
pub mod scattering;
pub mod special;

pub use error::{Error, ErrorCategory, Result};
pub use scalar::Real;

pub type Grid2D64 = grid::Grid2D<f64>;
pub type Field2D64 = grid::Field2D<f64>;
pub type PotentialSpec64 = potential::PotentialSpec<f64>;
pub type Potential64 = potential::Potential<f64>;
pub type NVState64 = nv::NVState<f64>;
pub type Grid1D64 = kdv::Grid1D<f64>;
pub type KdVProfile64 = kdv::KdVProfile<f64>;
pub type IncidentWave64 = scattering::IncidentWave<f64>;
pub type ScatteringSolution64 = scattering::ScatteringSolution<f64>;
pub type ScatteringAmplitude64 = scattering::ScatteringAmplitude<f64>;
pub type TorusPoint64 = identities::TorusPoint<f64>;
pub type Verdict64 = identities::Verdict<f64>;
pub type Report64 = identities::Report<f64>;

pub type Grid2D32 = grid::Grid2D<f32>;
pub type Field2D32 = grid::Field2D<f32>;
pub type NVState32 = nv::NVState<f32>;
