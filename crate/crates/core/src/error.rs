use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("chart is degenerate at u = {u:?} (Gram determinant {gram:e})")]
    ChartDegenerate { u: Vec<f64>, gram: f64 },

    #[error("parameter {u:?} lies outside the chart domain")]
    OutOfDomain { u: Vec<f64> },

    #[error("metric is singular (determinant {det:e})")]
    SingularMetric { det: f64 },

    #[error("operation requires dimension {required}, got N = {got}")]
    UnsupportedDimension { required: &'static str, got: usize },

    #[error("point {x:?} is not on the lateral cone boundary (defect {defect:e})")]
    NotOnLateralBoundary { x: Vec<f64>, defect: f64 },

    #[error("point lies at the cone vertex")]
    AtVertex,

    #[error("radial profile is not positive (rho = {rho}) at u = {u:?}")]
    NonPositiveProfile { u: Vec<f64>, rho: f64 },

    #[error("offset distance {t} exceeds the focal bound (area weight {area_weight:e})")]
    FocalViolation { t: f64, area_weight: f64 },

    #[error("integrand is not finite at node {node}")]
    NonFiniteIntegrand { node: usize },

    #[error("vector field is not tangent to the surface (normal component {normal_component:e})")]
    NonTangentField { normal_component: f64 },

    #[error("eigen iteration did not converge after {iterations} iterations")]
    NoConvergence { iterations: usize },

    #[error("mesh is degenerate: {0}")]
    DegenerateMesh(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
