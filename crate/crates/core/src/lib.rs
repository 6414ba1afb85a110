//! Equivariant extension of subbundles of a trivial bundle over a graph.
//!
//! - [`algebra`]: algebras by structure constants, regular trace,
//!   separability idempotents
//! - [`rectifier`]: Newton-type correction of almost-multiplicative maps
//! - [`equivariance`]: finite group actions and averaging of map families
//! - [`bundle`]: base complexes, Shepard extension, neighborhood search and
//!   the algebra and frame pipelines

pub mod algebra;
pub mod bundle;
pub mod embedding;
pub mod equivariance;
pub mod error;
pub mod linalg;
pub mod numfmt;
pub mod random;
pub mod rectifier;

pub use algebra::{Algebra, DivisionRing, GroundField, SeparabilityIdempotent};
pub use bundle::{BaseComplex, ExtensionOptions, ExtensionResult};
pub use equivariance::{GroupAction, MapFamily};
pub use error::{Error, Result};
pub use linalg::{Matrix, Vector};
pub use rectifier::{FiberMap, RectifyResult, RectifyStatus};

pub type Scalar = num_complex::Complex64;
