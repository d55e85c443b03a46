//! Residual-minimizing meshfree solvers for strong-form elliptic problems
//! in two dimensions, with sampling-stability tools and a-posteriori error
//! certificates.

pub mod basis;
pub mod cli;
pub mod config;
pub mod discretize;
pub mod error;
pub mod geometry;
mod linalg;
pub mod methods;
pub mod operators;
pub mod solve;
pub mod stability;

pub use error::{Error, Result};

pub use geometry::{Domain, Point2, PointSet};
pub use methods::{Certificate, MethodOutput};
pub use operators::{manufactured, InteriorOp, ManufacturedCase};
