//! Numerical laboratory for surface superconductivity in two-dimensional
//! domains with corners.
//!
//! * [`effective1d`]: the half-line effective problem, its minimizer `f★`,
//!   the optimal shift `α★`, the energy `E★`, and the threshold `Θ₀`.
//! * [`geometry`]: corner domains, boundary coordinates, boundary layer and
//!   corner cells.
//! * [`gl2d`]: the gauge-covariant discrete Ginzburg-Landau energy, its
//!   minimizer, the gauge phase and the trial state.
//! * [`analysis`]: asymptotic checks built from the pieces above.
//!
//! The numerical core is generic over [`Real`] (`f32` or `f64`); the aliases
//! at the crate root fix `f64`, which is what the solvers are tuned for.

pub mod analysis;
pub mod effective1d;
pub mod error;
pub mod geometry;
pub mod gl2d;
pub mod numerics;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Grid1D = effective1d::Grid1D<f64>;
pub type Profile1D = effective1d::Profile1D<f64>;
pub type EffectiveSolution = effective1d::EffectiveSolution<f64>;
pub type CostTable = effective1d::CostTable<f64>;
pub type CurvilinearPolygon = geometry::CurvilinearPolygon<f64>;
pub type BoundaryParam = geometry::BoundaryParam<f64>;
pub type LayerSpec = geometry::LayerSpec<f64>;
pub type RegionMask = geometry::RegionMask<f64>;
pub type Grid2D = gl2d::Grid2D<f64>;
pub type ComplexField2D = gl2d::ComplexField2D<f64>;
pub type VectorPotential2D = gl2d::VectorPotential2D<f64>;
pub type GLConfig = gl2d::GLConfig<f64>;
pub type GLResult = gl2d::GLResult<f64>;
