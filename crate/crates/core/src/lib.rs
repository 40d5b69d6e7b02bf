//! Fixed-point solver and verification tools for power-mixture functional
//! equations of Laplace–Stieltjes transforms.

pub mod cli;
pub mod config;
pub mod error;
pub mod grid;
pub mod interp;
pub mod law;
pub mod mixing;
pub mod moments;
pub mod quadrature;
pub mod simulate;
pub mod solver;
pub mod transforms;
pub mod zeta;

pub use error::{Error, Result};
pub use grid::{GridSpec, GridTransform};
pub use mixing::{MixingDistribution, MixingLaw};
pub use transforms::{CatalogEntry, Transform};
