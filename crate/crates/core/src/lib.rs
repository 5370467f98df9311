//! Numerical certification of convexity and Hermite-Hadamard
//! inequality chains for functions on intervals, rectangles and boxes.
//!
//! The numerical core is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix it to `f64`, which is what the CLI uses.

pub mod chains;
pub mod convexity;
pub mod corpus;
pub mod error;
pub mod expr;
pub mod hmap;
pub mod quad;
pub mod scalar;

pub use error::{Error, Result};
pub use expr::{parse, Evaluable, Expr, Function, Point3};
pub use quad::{Axis, BoxNd, Estimate, QuadSpec, Rule};
pub use scalar::Scalar;

pub type Box64 = quad::BoxNd<f64>;
pub type Point64 = expr::Point3<f64>;
pub type Estimate64 = quad::Estimate<f64>;

pub type Tolerances64 = chains::Tolerances<f64>;
pub type ChainReport64 = chains::ChainReport<f64>;
pub type Certificate64 = convexity::ConvexityCertificate<f64>;
pub type HGrid64 = hmap::HGrid<f64>;
