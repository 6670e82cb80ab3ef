//! Numerical engine for Hermitian manifolds with torsion.
//!
//! Given a metric `g` and complex structure `J` on a coordinate chart, the
//! engine builds the Levi-Civita, Bismut and Chern connections, their
//! curvature and traces, and checks pointwise curvature identities,
//! structure classes and the string equations on sampled points.

pub mod catalog;
pub mod classify;
pub mod connections;
pub mod curvature;
pub mod error;
pub mod identities;
pub mod report;
pub mod sampling;
pub mod string_eq;
pub mod tensor;

pub use classify::{classify, StructureFlags};
pub use catalog::{conformal_rescale, get_manifold, HermitianManifold, CATALOG};
pub use connections::{ConnectionField, Flavor, Geometry};
pub use curvature::{curvature_pack, CurvaturePack};
pub use error::{GeometryError, Result};
pub use report::{run, RunConfig, RunReport, Suites};
pub use string_eq::{string_residual, Dilaton, StringReport};
pub use tensor::{ChartDomain, Frame, Point, PointTensor, TensorField};
