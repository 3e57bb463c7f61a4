//! Fixtures shared by the benchmarks.

use std::sync::Arc;

use cone_minkowski::{build_polar_graph, ConeGeometry, PolarGraph, RadialProfile, SphericalDomain};

/// Bump-perturbed graph in the cap of opening `alpha`.
pub fn bump_graph(alpha: f64) -> PolarGraph {
    let cone = Arc::new(ConeGeometry::new(SphericalDomain::cap(alpha).expect("valid cap")).expect("valid cone"));
    build_polar_graph(cone, RadialProfile::bump(1.0, 0.1, 3)).expect("valid profile")
}
