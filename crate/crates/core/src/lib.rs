//! Minkowski-type integral identities, rigidity diagnostics and stability
//! quantities for hypersurfaces inside Euclidean cones `{t x : x in omega}`.
//!
//! Geometry is computed from truncated Taylor expansions of charts, so
//! curvatures and vector-field divergences are exact up to rounding; only
//! integration over the surface and its boundary is discretised.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop, clippy::suspicious_arithmetic_impl)]

pub mod cone;
pub mod error;
pub mod geometry;
pub mod identities;
pub mod quadrature;
pub mod spectral;
pub mod stability;
pub mod surface;
pub mod taylor;

pub use cone::{ConeGeometry, LateralPoint, SphericalDomain};
pub use error::{Error, Result};
pub use geometry::{chart_jet, curvature, Chart, ChartJet, CurvaturePoint, Orientation};
pub use identities::{IdentityReport, Mink2Report, RigidityReport, TangentField};
pub use quadrature::{QuadratureRule, Resolution};
pub use spectral::{SpectralResult, SpectralStudy, SurfaceMesh};
pub use stability::{EigenvalueBound, StabilityReport};
pub use surface::{build_polar_graph, spherical_sector, PolarGraph, RadialProfile, Surface};
pub use taylor::Taylor;
