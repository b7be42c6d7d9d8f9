//! Center-manifold reductions of elliptic problems on strips, reduced planar dynamics,
//! two-layer conjugate flows and reconstructed bore fields.

pub mod apps;
pub mod conjugate;
pub mod dopri;
pub mod error;
pub mod hierarchy;
pub mod numerics;
pub mod orbit;
pub mod reduced;
pub mod series;
pub mod spectrum;
pub mod tridiag;
pub mod verify;
pub mod waterwave;
pub mod wavefield;
pub mod xpoly;

pub use error::{Error, Result};
