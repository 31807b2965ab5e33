pub mod cli;
pub mod curvature;
pub mod defect;
pub mod deformation;
pub mod error;
pub mod manifold;
pub mod scanner;
pub mod simplex;
pub mod verify;

pub use error::{GeoError, Result};
