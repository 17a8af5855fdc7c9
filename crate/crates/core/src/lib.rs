//! Suction-cup gripping point search on triangle-mesh workpieces.
//!
//! The pipeline runs per workpiece: lattice seeds ([`mesh::raster_sample`]),
//! a normal-direction prefilter, and a per-seed patch test
//! ([`patch::evaluate_candidate`]). Accepted points are combined into
//! constellations that satisfy spacing, non-collinearity and tip-over rules
//! ([`constraints`]), and [`search::solve_common`] looks for one
//! constellation that grips a whole family of workpieces within tolerances.
//! When the family needs an adjustable gripper, [`workspace::plan_workspace`]
//! derives the per-arm adjustment ranges.
//!
//! All geometry is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix the scalar to `f64`.

pub mod constraints;
pub mod mesh;
pub mod params;
pub mod patch;
pub mod pipeline;
pub mod scalar;
pub mod search;
pub mod shapes;
pub mod workspace;

pub use scalar::Scalar;

pub type Mesh = mesh::TriangleMesh<f64>;
pub type Seed = mesh::SeedPoint<f64>;
pub type Patch = patch::SurfacePatch<f64>;
pub type Flatness = patch::FlatnessReport<f64>;
pub type GripPoint = patch::GrippingPoint<f64>;
pub type Params = params::AnalysisParams<f64>;
pub type Tolerances = params::ToleranceSpec<f64>;
pub type Constraints = constraints::ConstellationConstraints<f64>;
pub type Gripper = search::Constellation<f64>;
pub type Match = search::MatchResult<f64>;
pub type Workspace = workspace::WorkspaceSpec<f64>;
pub type Analysis = pipeline::WorkpieceAnalysis<f64>;
