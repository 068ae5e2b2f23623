//! Remeshing of deforming triangle surface meshes with transfer of the
//! initial (undeformed) configuration onto the new mesh.

pub mod error;
pub mod deformation;
pub mod geometry;
pub mod harness;
pub mod membrane;
pub mod mesh;
pub mod remesh;
pub mod search;
pub mod shapes;
pub mod stats;
pub mod transfer;

pub use deformation::AnalyticDeformation;
pub use error::{MeshError, Result};
pub use geometry::Vec3;
pub use membrane::{MembraneSimState, SkalakParams, StrainState};
pub use mesh::{Configuration, DimensionMode, ElementBasis, SurfaceMesh};
pub use remesh::{remesh, RemeshConfig, RemeshTrigger};
pub use search::{ElementLocator, SearchCase, SearchResult, DEFAULT_TOLERANCE};
pub use stats::Summary;
pub use transfer::{map_to_initial, transfer_initial_configuration, BasisCoefficients, TransferReport};
