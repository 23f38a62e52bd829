//! Numerical differential geometry of null hypersurfaces in Lorentzian
//! spacetimes: null geodesics, screen frames, Weingarten/Raychaudhuri
//! flows, graph mean-curvature operators and maximum-principle harnesses.

pub mod cli;
pub mod congruence;
pub mod error;
pub mod graphop;
pub mod linalg;
pub mod maxprin;
pub mod ode;
pub mod real;
pub mod geodesic;
pub mod spacetime;

pub use error::{Error, Result};
pub use real::Real;

/// Concrete f64 aliases for the common case.
pub type Model64 = spacetime::MetricModel<f64>;
pub type Point64 = spacetime::SpacetimePoint<f64>;
pub type Tangent64 = spacetime::TangentVector<f64>;
pub type Mat64 = linalg::Mat<f64>;
