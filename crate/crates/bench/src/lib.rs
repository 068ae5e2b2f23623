//! Shared fixtures for the benchmarks.

use histmesh::deformation::AnalyticDeformation;
use histmesh::harness::{deform, CYLINDER_HEIGHT, CYLINDER_RADIUS};
use histmesh::shapes::{cylinder_mesh, square_mesh};
use histmesh::SurfaceMesh;

/// Square of side 3 under (x², y²) at edge length `h`.
pub fn deformed_square(h: f64, seed: u64) -> SurfaceMesh {
    deform(&square_mesh(3.0, h, seed).expect("square meshes"), &AnalyticDeformation::SquareQuadratic)
        .expect("square deforms")
}

/// Open cylinder under (x + sin z, 1.5y, z) at edge length `h`.
pub fn deformed_cylinder(h: f64) -> SurfaceMesh {
    deform(
        &cylinder_mesh(CYLINDER_RADIUS, CYLINDER_HEIGHT, h).expect("cylinder meshes"),
        &AnalyticDeformation::CylinderSinusoidal,
    )
    .expect("cylinder deforms")
}
