//! Synthetic test geometries.

use std::f64::consts::PI;

use nalgebra::Vector2;

use crate::error::{MeshError, Result};
use crate::geometry::Vec3;
use crate::mesh::{DimensionMode, SurfaceMesh};
use crate::remesh::{generate_planar, remesh_onto, SurfaceProjector};

pub fn square_polygon(side: f64) -> Vec<Vector2<f64>> {
    vec![
        Vector2::new(0.0, 0.0),
        Vector2::new(side, 0.0),
        Vector2::new(side, side),
        Vector2::new(0.0, side),
    ]
}

/// Unstructured planar mesh of `[0, side]²`.
pub fn square_mesh(side: f64, edge_length: f64, seed: u64) -> Result<SurfaceMesh> {
    generate_planar(&square_polygon(side), edge_length, seed)
}

/// One ring of a surface of revolution about the z axis.
#[derive(Debug, Clone, Copy)]
struct Ring {
    radius: f64,
    z: f64,
    count: usize,
    /// Angular phase as a fraction of one segment.
    phase: f64,
}

impl Ring {
    fn angle(&self, i: usize) -> f64 {
        2.0 * PI * (i as f64 + self.phase) / self.count as f64
    }

    fn point(&self, i: usize) -> Vec3 {
        let t = self.angle(i % self.count);
        Vec3::new(self.radius * t.cos(), self.radius * t.sin(), self.z)
    }
}

/// Triangulates the band between two rings (`lower` below `upper`) by
/// advancing around both in angle order. Outward-facing winding.
fn stitch(lower: (&Ring, usize), upper: (&Ring, usize), tris: &mut Vec<[usize; 3]>) {
    let (a, a0) = lower;
    let (b, b0) = upper;
    let ia = |i: usize| a0 + i % a.count;
    let ib = |j: usize| b0 + j % b.count;
    let (mut i, mut j) = (0, 0);
    while i < a.count || j < b.count {
        let advance_a = j == b.count || (i < a.count && a.angle(i + 1) <= b.angle(j + 1));
        if advance_a {
            tris.push([ia(i), ia(i + 1), ib(j)]);
            i += 1;
        } else {
            tris.push([ia(i), ib(j + 1), ib(j)]);
            j += 1;
        }
    }
}

fn surface_of_revolution(
    rings: &[Ring],
    south: Option<f64>,
    north: Option<f64>,
) -> Result<SurfaceMesh> {
    let mut pts = Vec::new();
    let mut tris = Vec::new();
    let mut starts = Vec::with_capacity(rings.len());
    for r in rings {
        starts.push(pts.len());
        pts.extend((0..r.count).map(|i| r.point(i)));
    }
    for k in 0..rings.len().saturating_sub(1) {
        stitch((&rings[k], starts[k]), (&rings[k + 1], starts[k + 1]), &mut tris);
    }
    if let (Some(z), Some(first)) = (south, rings.first()) {
        let p = pts.len();
        pts.push(Vec3::new(0.0, 0.0, z));
        for j in 0..first.count {
            tris.push([p, starts[0] + (j + 1) % first.count, starts[0] + j]);
        }
    }
    if let (Some(z), Some(last)) = (north, rings.last()) {
        let p = pts.len();
        let s = starts[rings.len() - 1];
        pts.push(Vec3::new(0.0, 0.0, z));
        for i in 0..last.count {
            tris.push([s + i, s + (i + 1) % last.count, p]);
        }
    }
    SurfaceMesh::new(pts, tris, DimensionMode::Surface)
}

/// Open cylinder of the given radius around the z axis, `z ∈ [0, height]`,
/// built from staggered rings so triangles are close to equilateral.
pub fn cylinder_mesh(radius: f64, height: f64, edge_length: f64) -> Result<SurfaceMesh> {
    if !(radius > 0.0 && height > 0.0 && edge_length > 0.0) {
        return Err(MeshError::Argument("cylinder dimensions must be positive".into()));
    }
    let count = ((2.0 * PI * radius / edge_length).round() as usize).max(3);
    let arc = 2.0 * PI * radius / count as f64;
    let layers = ((height / (arc * 3f64.sqrt() / 2.0)).round() as usize).max(1);
    let rings: Vec<Ring> = (0..=layers)
        .map(|k| Ring {
            radius,
            z: height * k as f64 / layers as f64,
            count,
            phase: if k % 2 == 0 { 0.0 } else { 0.5 },
        })
        .collect();
    surface_of_revolution(&rings, None, None)
}

/// Closed capsule: a cylinder of the given radius and straight length
/// along z (centred at the origin) capped by hemispheres, remeshed to an
/// isotropic triangulation. Normals point outwards.
pub fn capsule_mesh(radius: f64, length: f64, edge_length: f64) -> Result<SurfaceMesh> {
    if !(radius > 0.0 && length >= 0.0 && edge_length > 0.0) {
        return Err(MeshError::Argument("capsule dimensions must be positive".into()));
    }
    // profile by arc length from the south pole
    let cap = 0.5 * PI * radius;
    let total = 2.0 * cap + length;
    let profile = |s: f64| -> (f64, f64) {
        if s < cap {
            let phi = s / radius;
            (radius * phi.sin(), -0.5 * length - radius * phi.cos())
        } else if s <= cap + length {
            (radius, -0.5 * length + (s - cap))
        } else {
            let phi = (total - s) / radius;
            (radius * phi.sin(), 0.5 * length + radius * phi.cos())
        }
    };
    let layers = ((total / (edge_length * 3f64.sqrt() / 2.0)).round() as usize).max(2);
    let rings: Vec<Ring> = (1..layers)
        .map(|k| {
            let (r, z) = profile(total * k as f64 / layers as f64);
            Ring {
                radius: r,
                z,
                count: ((2.0 * PI * r / edge_length).round() as usize).max(3),
                phase: if k % 2 == 0 { 0.0 } else { 0.5 },
            }
        })
        .collect();
    let half = 0.5 * length + radius;
    let stitched = surface_of_revolution(&rings, Some(-half), Some(half))?;
    let reference = SurfaceProjector::new(&stitched);
    remesh_onto(&stitched, &reference, edge_length, 10)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::Configuration;

    fn outward(mesh: &SurfaceMesh) -> bool {
        (0..mesh.element_count()).all(|e| {
            let b = mesh.element_basis(e, Configuration::Current).unwrap();
            let c = mesh.centroid(e, Configuration::Current);
            // radial direction away from the z axis, or away from the cap centre
            let axis_point = Vec3::new(0.0, 0.0, c.z.clamp(-1.0, 1.0));
            b.normal.dot(&(c - axis_point)) > 0.0
        })
    }

    #[test]
    fn cylinder_is_open_with_two_loops() {
        let mesh = cylinder_mesh(1.0, 2.0 * PI, 0.4).unwrap();
        let loops = mesh.boundary_loops().unwrap();
        assert_eq!(loops.len(), 2);
        assert!(outward(&mesh));
        let q = mesh.quality_summary(Configuration::Current);
        assert!(q.median > 0.95, "median AR {}", q.median);
        let lateral = 2.0 * PI * 2.0 * PI;
        assert!((mesh.total_area(Configuration::Current) - lateral).abs() < 0.05 * lateral);
    }

    #[test]
    fn capsule_is_closed_and_outward() {
        let mesh = capsule_mesh(1.0, 2.0, 0.3).unwrap();
        assert!(mesh.is_closed());
        assert!(outward(&mesh));
        let q = mesh.quality_summary(Configuration::Current);
        assert!(q.median >= 0.85, "median AR {}", q.median);
        let area = 4.0 * PI + 2.0 * PI * 2.0;
        assert!((mesh.total_area(Configuration::Current) - area).abs() < 0.05 * area);
    }

    #[test]
    fn square_mesh_covers_domain() {
        let mesh = square_mesh(3.0, 0.5, 0).unwrap();
        assert!((mesh.total_area(Configuration::Current) - 9.0).abs() < 1e-9);
    }
}
