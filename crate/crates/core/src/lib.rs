//! Lifted distributional Gauss curvature of Regge metrics on triangle meshes.
//!
//! A metric is interpolated into the Regge space of degree `k`, its
//! distributional densitized Gauss curvature (element curvature, geodesic
//! curvature jumps on edges, angle deficits at vertices) is assembled as a
//! functional on a Lagrange space, and the functional is lifted to a
//! Lagrange field by a metric-weighted mass solve. The `study` module runs
//! convergence studies against the closed-form benchmark in `analytic`.

// tensor index loops read closer to the formulas than iterator chains
#![allow(clippy::needless_range_loop)]

pub mod analytic;
pub mod curvature;
pub mod error;
pub mod fe;
pub mod linalg;
pub mod mesh;
pub mod metric;
pub mod norms;
mod par;
mod poly;
pub mod quadrature;
pub mod study;

pub use error::{Error, Result};
