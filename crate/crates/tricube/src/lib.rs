//! Trivariate T-spline modeling kernel over generalized poly-cube domains.
//!
//! The crate converts annotated triangle-mesh solids into semi-standard
//! trivariate T-splines: surface and volumetric parameterization onto cuboid
//! charts, hierarchical least-squares fitting, local refinement by cell
//! subdivision, and cuboid merging that preserves partition of unity and
//! boundary restriction.

pub mod archive;
pub mod bspline;
pub mod control_grid;
pub mod fitting;
pub mod gpc;
pub mod merging;
pub mod mesh_io;
pub mod param;
pub mod rat;
pub mod spline_eval;
