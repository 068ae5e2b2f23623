//! Planar mesh generation: boundary resampling, a jittered-phase hexagonal
//! lattice inside, constrained Delaunay triangulation and a few rounds of
//! Laplacian smoothing.

use nalgebra::Vector2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spade::{ConstrainedDelaunayTriangulation, Point2, Triangulation};

use crate::error::{MeshError, Result};
use crate::geometry::Vec3;
use crate::mesh::{Configuration, DimensionMode, SurfaceMesh};

type P2 = Vector2<f64>;

/// Interior lattice points closer than this fraction of the target to the
/// boundary are dropped.
const BOUNDARY_CLEARANCE: f64 = 0.5;
const SMOOTHING_ROUNDS: usize = 4;

/// Twice the signed area (positive for counter-clockwise loops).
fn signed_area2(poly: &[P2]) -> f64 {
    (0..poly.len())
        .map(|i| {
            let (a, b) = (poly[i], poly[(i + 1) % poly.len()]);
            a.x * b.y - a.y * b.x
        })
        .sum()
}

pub fn polygon_area(poly: &[P2]) -> f64 {
    0.5 * signed_area2(poly).abs()
}

pub fn point_in_polygon(poly: &[P2], p: &P2) -> bool {
    let mut inside = false;
    let n = poly.len();
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (poly[i], poly[j]);
        if (a.y > p.y) != (b.y > p.y) && p.x < (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x {
            inside = !inside;
        }
        j = i;
    }
    inside
}

fn cross(a: &P2, b: &P2) -> f64 {
    a.x * b.y - a.y * b.x
}

fn segment_distance(p: &P2, a: &P2, b: &P2) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_squared();
    let t = if len2 > 0.0 { ((p - a).dot(&ab) / len2).clamp(0.0, 1.0) } else { 0.0 };
    (p - (a + ab * t)).norm()
}

fn segments_cross(a: &P2, b: &P2, c: &P2, d: &P2) -> bool {
    let d1 = cross(&(b - a), &(c - a));
    let d2 = cross(&(b - a), &(d - a));
    let d3 = cross(&(d - c), &(a - c));
    let d4 = cross(&(d - c), &(b - c));
    let proper = ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0));
    let touches = |o: f64, p: &P2, q: &P2, r: &P2| {
        o == 0.0 && r.x >= p.x.min(q.x) && r.x <= p.x.max(q.x) && r.y >= p.y.min(q.y) && r.y <= p.y.max(q.y)
    };
    proper || touches(d1, a, b, c) || touches(d2, a, b, d) || touches(d3, c, d, a) || touches(d4, c, d, b)
}

/// Errors if two non-adjacent edges of the closed polygon intersect.
pub fn check_simple(poly: &[P2]) -> Result<()> {
    let n = poly.len();
    if n < 3 {
        return Err(MeshError::Geometry(format!("boundary has only {n} vertices")));
    }
    for i in 0..n {
        for j in i + 1..n {
            if j == i + 1 || (i == 0 && j == n - 1) {
                continue;
            }
            if segments_cross(&poly[i], &poly[(i + 1) % n], &poly[j], &poly[(j + 1) % n]) {
                return Err(MeshError::Geometry(format!(
                    "boundary self-intersects (edges {i} and {j})"
                )));
            }
        }
    }
    Ok(())
}

/// Vertices where the boundary turns (not collinear with both neighbours).
fn corner_flags(poly: &[P2]) -> Vec<bool> {
    let n = poly.len();
    (0..n)
        .map(|i| {
            let (prev, cur, next) = (poly[(i + n - 1) % n], poly[i], poly[(i + 1) % n]);
            let (u, v) = (cur - prev, next - cur);
            cross(&u, &v).abs() > 1e-9 * u.norm() * v.norm() || u.dot(&v) < 0.0
        })
        .collect()
}

/// Resamples the polygon at spacing close to `h`, keeping every corner so
/// the enclosed region is unchanged.
fn resample_boundary(poly: &[P2], h: f64) -> Vec<P2> {
    let n = poly.len();
    let corners = corner_flags(poly);
    let Some(start) = corners.iter().position(|&c| c) else {
        return poly.to_vec();
    };
    let mut out = Vec::new();
    let mut i = start;
    loop {
        // chain from corner i to the next corner
        let mut chain = vec![poly[i]];
        let mut j = (i + 1) % n;
        while !corners[j] {
            chain.push(poly[j]);
            j = (j + 1) % n;
        }
        chain.push(poly[j]);
        let lengths: Vec<f64> = chain.windows(2).map(|w| (w[1] - w[0]).norm()).collect();
        let total: f64 = lengths.iter().sum();
        let segments = ((total / h).round() as usize).max(1);
        out.push(chain[0]);
        let mut seg = 0;
        let mut walked = 0.0;
        for k in 1..segments {
            let s = total * k as f64 / segments as f64;
            while seg + 1 < lengths.len() && walked + lengths[seg] < s {
                walked += lengths[seg];
                seg += 1;
            }
            let t = if lengths[seg] > 0.0 { ((s - walked) / lengths[seg]).clamp(0.0, 1.0) } else { 0.0 };
            out.push(chain[seg] + (chain[seg + 1] - chain[seg]) * t);
        }
        i = j;
        if i == start {
            break;
        }
    }
    out
}

fn hex_lattice(poly: &[P2], boundary: &[P2], h: f64, rng: &mut ChaCha8Rng) -> Vec<P2> {
    let (mut lo, mut hi) = (P2::repeat(f64::INFINITY), P2::repeat(f64::NEG_INFINITY));
    for p in poly {
        lo = lo.inf(p);
        hi = hi.sup(p);
    }
    let dy = h * 3f64.sqrt() / 2.0;
    let phase = P2::new(rng.random_range(0.0..h), rng.random_range(0.0..dy));
    let clearance = BOUNDARY_CLEARANCE * h;
    let rows = ((hi.y - lo.y) / dy).ceil() as i64 + 1;
    let cols = ((hi.x - lo.x) / h).ceil() as i64 + 1;
    let mut points = Vec::new();
    for r in 0..rows {
        let shift = if r % 2 == 0 { 0.0 } else { 0.5 * h };
        for c in 0..cols {
            let p = lo + phase + P2::new(c as f64 * h + shift - h, r as f64 * dy - dy);
            if point_in_polygon(poly, &p) && distance_to_loop(boundary, &p) >= clearance {
                points.push(p);
            }
        }
    }
    points
}

fn distance_to_loop(poly: &[P2], p: &P2) -> f64 {
    let n = poly.len();
    (0..n)
        .map(|i| segment_distance(p, &poly[i], &poly[(i + 1) % n]))
        .fold(f64::INFINITY, f64::min)
}

/// Constrained Delaunay triangulation of boundary loop + interior points,
/// keeping only faces inside the polygon. Boundary points come first.
fn triangulate(boundary: &[P2], interior: &[P2], poly: &[P2]) -> Result<Vec<[usize; 3]>> {
    let nb = boundary.len();
    let vertices: Vec<Point2<f64>> = boundary
        .iter()
        .chain(interior)
        .map(|p| Point2::new(p.x, p.y))
        .collect();
    let count = vertices.len();
    let edges: Vec<[usize; 2]> = (0..nb).map(|i| [i, (i + 1) % nb]).collect();
    let mut conflict = false;
    let cdt = ConstrainedDelaunayTriangulation::<Point2<f64>>::try_bulk_load_cdt(vertices, edges, |_| conflict = true)
        .map_err(|e| MeshError::Geometry(format!("triangulation failed: {e:?}")))?;
    if conflict || cdt.num_vertices() != count {
        return Err(MeshError::Geometry("boundary constraints conflict or points coincide".into()));
    }
    let mut tris = Vec::new();
    for face in cdt.inner_faces() {
        let [a, b, c] = face.vertices().map(|v| v.fix().index());
        let [pa, pb, pc] = face.positions();
        let centroid = P2::new((pa.x + pb.x + pc.x) / 3.0, (pa.y + pb.y + pc.y) / 3.0);
        if point_in_polygon(poly, &centroid) {
            tris.push([a, b, c]);
        }
    }
    Ok(tris)
}

/// Generates a planar mesh of a simple polygon at target edge length `h`.
/// Every polygon corner is a mesh vertex, so the meshed area equals the
/// polygon area.
pub fn generate_planar(polygon: &[P2], h: f64, seed: u64) -> Result<SurfaceMesh> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(MeshError::Argument(format!("target edge length must be positive, got {h}")));
    }
    check_simple(polygon)?;
    let mut poly = polygon.to_vec();
    if signed_area2(&poly) < 0.0 {
        poly.reverse();
    }
    let diameter = poly
        .iter()
        .flat_map(|a| poly.iter().map(move |b| (a - b).norm()))
        .fold(0.0, f64::max);
    if h > diameter {
        log::warn!("target edge length {h} exceeds the domain diameter {diameter:.3}; returning a minimal mesh");
    }

    let boundary = resample_boundary(&poly, h);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut interior = hex_lattice(&poly, &boundary, h, &mut rng);
    let nb = boundary.len();

    let mut tris = triangulate(&boundary, &interior, &poly)?;
    for _ in 0..SMOOTHING_ROUNDS {
        if interior.is_empty() {
            break;
        }
        let mut sum = vec![P2::zeros(); interior.len()];
        let mut count = vec![0usize; interior.len()];
        for t in &tris {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                let pa = if a < nb { boundary[a] } else { interior[a - nb] };
                let pb = if b < nb { boundary[b] } else { interior[b - nb] };
                // each undirected interior edge is seen from both sides
                if a >= nb {
                    sum[a - nb] += pb;
                    count[a - nb] += 1;
                }
                if b >= nb {
                    sum[b - nb] += pa;
                    count[b - nb] += 1;
                }
            }
        }
        let clearance = 0.25 * h;
        let moved: Vec<P2> = interior
            .iter()
            .enumerate()
            .map(|(i, p)| {
                if count[i] == 0 {
                    return *p;
                }
                let q = sum[i] / count[i] as f64;
                if point_in_polygon(&poly, &q) && distance_to_loop(&boundary, &q) >= clearance {
                    q
                } else {
                    *p
                }
            })
            .collect();
        interior = moved;
        tris = triangulate(&boundary, &interior, &poly)?;
    }

    let positions: Vec<Vec3> = boundary
        .iter()
        .chain(&interior)
        .map(|p| Vec3::new(p.x, p.y, 0.0))
        .collect();
    // drop lattice points that ended up outside every kept face
    let mut used = vec![false; positions.len()];
    for t in &tris {
        for &v in t {
            used[v] = true;
        }
    }
    let mut remap = vec![usize::MAX; positions.len()];
    let mut kept = Vec::with_capacity(positions.len());
    for (i, p) in positions.into_iter().enumerate() {
        if used[i] {
            remap[i] = kept.len();
            kept.push(p);
        }
    }
    let tris = tris.into_iter().map(|t| t.map(|v| remap[v])).collect();
    SurfaceMesh::new(kept, tris, DimensionMode::Planar)
}

/// Outer boundary of a planar mesh's current configuration as a polygon.
pub fn boundary_polygon(mesh: &SurfaceMesh) -> Result<Vec<P2>> {
    let loops = mesh.boundary_loops()?;
    match loops.as_slice() {
        [single] => Ok(single
            .iter()
            .map(|&v| {
                let p = mesh.nodes()[v].position(Configuration::Current);
                P2::new(p.x, p.y)
            })
            .collect()),
        [] => Err(MeshError::Geometry("planar mesh has no boundary".into())),
        _ => Err(MeshError::Geometry(format!(
            "planar remeshing needs a single boundary loop, found {}",
            loops.len()
        ))),
    }
}

/// Fresh triangulation of the region covered by a planar mesh's current
/// configuration. Initial positions of the result equal its current ones
/// until a transfer assigns them.
pub fn remesh_planar(old: &SurfaceMesh, target_edge_length: f64, seed: u64) -> Result<SurfaceMesh> {
    if old.mode() != DimensionMode::Planar {
        return Err(MeshError::Argument("planar remeshing needs a planar mesh".into()));
    }
    generate_planar(&boundary_polygon(old)?, target_edge_length, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::Configuration;

    fn square(side: f64) -> Vec<P2> {
        vec![P2::new(0.0, 0.0), P2::new(side, 0.0), P2::new(side, side), P2::new(0.0, side)]
    }

    fn on_square_boundary(p: &Vec3, side: f64) -> bool {
        let tol = 1e-9;
        let on = |v: f64| v.abs() < tol || (v - side).abs() < tol;
        (on(p.x) && (-tol..=side + tol).contains(&p.y)) || (on(p.y) && (-tol..=side + tol).contains(&p.x))
    }

    #[test]
    fn square_mesh_quality() {
        let mesh = generate_planar(&square(3.0), 0.5, 1).unwrap();
        let q = mesh.quality_summary(Configuration::Current);
        assert!(q.median >= 0.9, "median AR {}", q.median);
        let median_edge = mesh.median_edge_length(Configuration::Current);
        assert!((median_edge - 0.5).abs() <= 0.125, "median edge {median_edge}");
        assert!((mesh.total_area(Configuration::Current) - 9.0).abs() < 9e-6);
        for [a, _] in mesh.boundary_half_edges() {
            assert!(on_square_boundary(&mesh.nodes()[a].current, 3.0));
        }
    }

    #[test]
    fn oversized_target_still_meshes() {
        let mesh = generate_planar(&square(3.0), 50.0, 1).unwrap();
        assert!(mesh.element_count() >= 2);
        assert!((mesh.total_area(Configuration::Current) - 9.0).abs() < 1e-9);
    }

    #[test]
    fn same_seed_same_mesh() {
        let a = generate_planar(&square(3.0), 0.3, 9).unwrap();
        let b = generate_planar(&square(3.0), 0.3, 9).unwrap();
        assert_eq!(a.positions(Configuration::Current), b.positions(Configuration::Current));
        assert_eq!(a.triangles(), b.triangles());
    }

    #[test]
    fn self_intersecting_boundary_is_rejected() {
        let bowtie = vec![P2::new(0.0, 0.0), P2::new(1.0, 1.0), P2::new(1.0, 0.0), P2::new(0.0, 1.0)];
        assert!(matches!(generate_planar(&bowtie, 0.1, 0), Err(MeshError::Geometry(_))));
    }

    #[test]
    fn non_convex_polygon_keeps_its_area() {
        let l_shape = vec![
            P2::new(0.0, 0.0),
            P2::new(2.0, 0.0),
            P2::new(2.0, 1.0),
            P2::new(1.0, 1.0),
            P2::new(1.0, 2.0),
            P2::new(0.0, 2.0),
        ];
        let mesh = generate_planar(&l_shape, 0.2, 3).unwrap();
        assert!((mesh.total_area(Configuration::Current) - 3.0).abs() < 3e-6);
        assert!(mesh.quality_summary(Configuration::Current).median >= 0.9);
    }

    #[test]
    fn remesh_of_deformed_square_follows_its_boundary() {
        let m0 = generate_planar(&square(3.0), 0.5, 1).unwrap();
        let mut m = m0.clone();
        let deformed: Vec<Vec3> = m0
            .positions(Configuration::Initial)
            .iter()
            .map(|p| Vec3::new(p.x * p.x, p.y * p.y, 0.0))
            .collect();
        m.set_current_positions(&deformed).unwrap();
        let fresh = remesh_planar(&m, 0.2, 5).unwrap();
        assert!((fresh.total_area(Configuration::Current) - 81.0).abs() < 81e-6);
        assert!(fresh.quality_summary(Configuration::Current).median >= 0.9);
        for [a, _] in fresh.boundary_half_edges() {
            assert!(on_square_boundary(&fresh.nodes()[a].current, 9.0));
        }
    }
}
