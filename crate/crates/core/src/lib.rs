//! Capacitated packing of geometric regions and points.
//!
//! The generic types live in their modules and are parameterized by the
//! scalar type; the crate root re-exports `f64` aliases for everyday use.

pub mod error;
pub mod fattri;
pub mod generate;
pub mod geometry;
pub mod hypergraph;
pub mod localsearch;
pub mod lp;
pub mod oracle;
pub mod rect;
pub mod rng;
pub mod rounding;
pub mod scalar;

pub use error::{Error, Result};
pub use hypergraph::{Conflict, Hyperedge, MinCapacity};
pub use scalar::{Field, Rational, Scalar};

pub type Hypergraph = hypergraph::Hypergraph<f64>;
pub type PackingSolution = hypergraph::PackingSolution<f64>;
pub type FractionalSolution = lp::FractionalSolution<f64>;
pub type GeometricInstance = geometry::GeometricInstance<f64>;
pub type Region = geometry::Region<f64>;
