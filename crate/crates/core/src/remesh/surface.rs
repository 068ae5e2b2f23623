//! Isotropic remeshing of triangulated surfaces: repeated rounds of long
//! edge splits, short edge collapses, valence-improving flips and
//! tangential smoothing, with every vertex projected back onto a fixed
//! reference surface.

use crate::error::{MeshError, Result};
use crate::geometry::{self, Aabb, Vec3};
use crate::mesh::{Configuration, DimensionMode, SurfaceMesh};
use crate::search::UniformGrid;

const SPLIT_RATIO: f64 = 4.0 / 3.0;
const COLLAPSE_RATIO: f64 = 4.0 / 5.0;
/// Boundary vertices turning by more than this (radians) stay fixed.
const FEATURE_ANGLE: f64 = 0.5;
const MAX_ROUNDS: usize = 64;
/// Minimum cosine between a face normal before and after an edit.
const NORMAL_GUARD: f64 = 0.3;

/// Closest-point queries against a frozen triangle mesh and its boundary.
pub struct SurfaceProjector {
    positions: Vec<Vec3>,
    triangles: Vec<[usize; 3]>,
    faces: UniformGrid,
    segments: Vec<[usize; 2]>,
    boundary: Option<UniformGrid>,
}

impl SurfaceProjector {
    pub fn new(mesh: &SurfaceMesh) -> Self {
        let positions = mesh.positions(Configuration::Current);
        let triangles = mesh.triangles();
        let cell = mesh.mean_edge_length(Configuration::Current);
        let boxes: Vec<Aabb> = triangles
            .iter()
            .map(|t| Aabb::from_points(t.iter().map(|&v| &positions[v])))
            .collect();
        let faces = UniformGrid::new(&boxes, cell);
        let segments = mesh.boundary_half_edges();
        let boundary = (!segments.is_empty()).then(|| {
            let boxes: Vec<Aabb> = segments
                .iter()
                .map(|s| Aabb::from_points(s.iter().map(|&v| &positions[v])))
                .collect();
            UniformGrid::new(&boxes, cell)
        });
        SurfaceProjector {
            positions,
            triangles,
            faces,
            segments,
            boundary,
        }
    }

    /// Closest point on the surface and the triangle it lies on.
    pub fn project(&self, p: &Vec3) -> (Vec3, usize) {
        let tri = |t: usize| self.triangles[t].map(|v| self.positions[v]);
        let (t, _) = self
            .faces
            .nearest(p, |t| {
                let [a, b, c] = tri(t);
                geometry::triangle_distance_sq(p, &a, &b, &c)
            })
            .expect("reference mesh is non-empty");
        let [a, b, c] = tri(t);
        (geometry::closest_point_on_triangle(p, &a, &b, &c), t)
    }

    pub fn distance(&self, p: &Vec3) -> f64 {
        (self.project(p).0 - p).norm()
    }

    /// Closest point on the boundary polylines; identity on closed surfaces.
    pub fn project_boundary(&self, p: &Vec3) -> Vec3 {
        let Some(grid) = &self.boundary else {
            return *p;
        };
        let seg = |s: usize| self.segments[s].map(|v| self.positions[v]);
        let (s, _) = grid
            .nearest(p, |s| {
                let [a, b] = seg(s);
                geometry::segment_distance_sq(p, &a, &b)
            })
            .expect("boundary is non-empty");
        let [a, b] = seg(s);
        geometry::closest_point_on_segment(p, &a, &b)
    }

    pub fn normal(&self, triangle: usize) -> Vec3 {
        let [a, b, c] = self.triangles[triangle].map(|v| self.positions[v]);
        geometry::triangle_normal(&a, &b, &c).unwrap_or_else(Vec3::zeros)
    }
}

/// Undirected edge with its one or two incident faces.
#[derive(Debug, Clone, Copy)]
struct Edge {
    a: usize,
    b: usize,
    faces: [usize; 2],
    count: usize,
}

struct Work<'r> {
    pos: Vec<Vec3>,
    tris: Vec<[usize; 3]>,
    feature: Vec<bool>,
    target: f64,
    reference: &'r SurfaceProjector,
}

fn face_normal(pos: &[Vec3], t: &[usize; 3]) -> Option<Vec3> {
    geometry::triangle_normal(&pos[t[0]], &pos[t[1]], &pos[t[2]])
}

fn third(t: &[usize; 3], a: usize, b: usize) -> usize {
    t.iter().copied().find(|&v| v != a && v != b).expect("triangle has three distinct vertices")
}

/// Whether face `t` contains the directed edge a -> b.
fn has_directed(t: &[usize; 3], a: usize, b: usize) -> bool {
    (0..3).any(|k| t[k] == a && t[(k + 1) % 3] == b)
}

impl<'r> Work<'r> {
    /// Sorted, deterministic edge list.
    fn edges(&self) -> Result<Vec<Edge>> {
        let mut half: Vec<(usize, usize, usize)> = Vec::with_capacity(self.tris.len() * 3);
        for (f, t) in self.tris.iter().enumerate() {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                half.push((a.min(b), a.max(b), f));
            }
        }
        half.sort_unstable();
        let mut edges: Vec<Edge> = Vec::with_capacity(half.len() / 2 + 1);
        for (a, b, f) in half {
            match edges.last_mut() {
                Some(e) if e.a == a && e.b == b => {
                    if e.count == 2 {
                        return Err(MeshError::NonManifoldEdge { a, b });
                    }
                    e.faces[1] = f;
                    e.count = 2;
                }
                _ => edges.push(Edge {
                    a,
                    b,
                    faces: [f, usize::MAX],
                    count: 1,
                }),
            }
        }
        Ok(edges)
    }

    fn boundary_vertices(&self, edges: &[Edge]) -> Vec<bool> {
        let mut flags = vec![false; self.pos.len()];
        for e in edges.iter().filter(|e| e.count == 1) {
            flags[e.a] = true;
            flags[e.b] = true;
        }
        flags
    }

    fn neighbours(&self, edges: &[Edge]) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.pos.len()];
        for e in edges {
            adj[e.a].push(e.b);
            adj[e.b].push(e.a);
        }
        adj
    }

    fn vertex_faces(&self) -> Vec<Vec<usize>> {
        let mut vf = vec![Vec::new(); self.pos.len()];
        for (f, t) in self.tris.iter().enumerate() {
            for &v in t {
                vf[v].push(f);
            }
        }
        vf
    }

    fn len(&self, a: usize, b: usize) -> f64 {
        (self.pos[a] - self.pos[b]).norm()
    }

    fn project(&self, p: &Vec3, on_boundary: bool) -> Vec3 {
        if on_boundary {
            self.reference.project_boundary(p)
        } else {
            self.reference.project(p).0
        }
    }

    fn split_long_edges(&mut self) -> Result<usize> {
        let mut total = 0;
        for _ in 0..MAX_ROUNDS {
            let edges = self.edges()?;
            let limit = SPLIT_RATIO * self.target;
            let mut long: Vec<(f64, Edge)> = edges
                .iter()
                .map(|e| (self.len(e.a, e.b), *e))
                .filter(|(l, _)| *l > limit)
                .collect();
            if long.is_empty() {
                break;
            }
            long.sort_by(|x, y| y.0.total_cmp(&x.0).then((x.1.a, x.1.b).cmp(&(y.1.a, y.1.b))));
            let mut touched = vec![false; self.tris.len()];
            let mut done = 0;
            for (_, e) in long {
                let faces = &e.faces[..e.count];
                if faces.iter().any(|&f| touched[f]) {
                    continue;
                }
                let boundary = e.count == 1;
                let mid = (self.pos[e.a] + self.pos[e.b]) * 0.5;
                let m = self.pos.len();
                self.pos.push(self.project(&mid, boundary));
                self.feature.push(false);
                for &f in faces {
                    let t = self.tris[f];
                    let (a, b) = if has_directed(&t, e.a, e.b) { (e.a, e.b) } else { (e.b, e.a) };
                    let c = third(&t, a, b);
                    self.tris[f] = [a, m, c];
                    self.tris.push([m, b, c]);
                    touched[f] = true;
                }
                done += 1;
            }
            total += done;
        }
        Ok(total)
    }

    fn collapse_short_edges(&mut self) -> Result<usize> {
        let mut total = 0;
        for _ in 0..MAX_ROUNDS {
            let edges = self.edges()?;
            let on_boundary = self.boundary_vertices(&edges);
            let adj = self.neighbours(&edges);
            let vf = self.vertex_faces();
            let low = COLLAPSE_RATIO * self.target;
            let high = SPLIT_RATIO * self.target;

            let mut short: Vec<(f64, Edge)> = edges
                .iter()
                .map(|e| (self.len(e.a, e.b), *e))
                .filter(|(l, _)| *l < low)
                .collect();
            if short.is_empty() {
                break;
            }
            short.sort_by(|x, y| x.0.total_cmp(&y.0).then((x.1.a, x.1.b).cmp(&(y.1.a, y.1.b))));

            let mut locked = vec![false; self.pos.len()];
            let mut dead = vec![false; self.tris.len()];
            let mut done = 0;
            for (_, e) in short {
                let (a, b) = (e.a, e.b);
                if locked[a] || locked[b] {
                    continue;
                }
                let edge_boundary = e.count == 1;
                let (ba, bb) = (on_boundary[a], on_boundary[b]);
                if ba && bb && !edge_boundary {
                    continue;
                }
                if self.feature[a] && self.feature[b] {
                    continue;
                }
                // keep `k`, remove `r`, move `k` to `p`
                let (k, r, p) = if self.feature[a] || (ba && !bb) {
                    (a, b, self.pos[a])
                } else if self.feature[b] || (bb && !ba) {
                    (b, a, self.pos[b])
                } else {
                    let mid = (self.pos[a] + self.pos[b]) * 0.5;
                    (a, b, self.project(&mid, edge_boundary))
                };

                // link condition
                let opposite: Vec<usize> = e.faces[..e.count].iter().map(|&f| third(&self.tris[f], a, b)).collect();
                let common = adj[a].iter().filter(|v| adj[b].contains(v)).count();
                if common != opposite.len() {
                    continue;
                }
                if opposite.iter().any(|&o| locked[o] || adj[o].len() <= if on_boundary[o] { 2 } else { 3 }) {
                    continue;
                }
                if adj[r].iter().chain(&adj[k]).any(|&n| n != a && n != b && (self.pos[n] - p).norm() > high) {
                    continue;
                }

                let edge_faces = &e.faces[..e.count];
                let mut ok = true;
                let mut updates = Vec::new();
                for &f in vf[a].iter().chain(&vf[b]) {
                    if edge_faces.contains(&f) || updates.iter().any(|(g, _)| *g == f) {
                        continue;
                    }
                    let old = self.tris[f];
                    let new = old.map(|v| if v == r { k } else { v });
                    let [x, y, z] = new.map(|v| if v == k { p } else { self.pos[v] });
                    let before = face_normal(&self.pos, &old);
                    let after = geometry::triangle_normal(&x, &y, &z);
                    match (before, after) {
                        (Some(n0), Some(n1)) if n0.dot(&n1) > NORMAL_GUARD => {
                            if geometry::aspect_ratio(&x, &y, &z) < 0.05 {
                                ok = false;
                                break;
                            }
                            updates.push((f, new));
                        }
                        _ => {
                            ok = false;
                            break;
                        }
                    }
                }
                if !ok {
                    continue;
                }
                for (f, new) in updates {
                    self.tris[f] = new;
                }
                for &f in edge_faces {
                    dead[f] = true;
                }
                self.pos[k] = p;
                self.feature[k] = self.feature[a] || self.feature[b];
                for v in adj[a].iter().chain(&adj[b]) {
                    locked[*v] = true;
                }
                locked[a] = true;
                locked[b] = true;
                done += 1;
            }
            if done == 0 {
                break;
            }
            let mut f = 0;
            self.tris.retain(|_| {
                let keep = !dead[f];
                f += 1;
                keep
            });
            self.compact();
            total += done;
        }
        Ok(total)
    }

    fn flip_edges(&mut self) -> Result<usize> {
        let mut total = 0;
        for _ in 0..8 {
            let edges = self.edges()?;
            let on_boundary = self.boundary_vertices(&edges);
            let adj = self.neighbours(&edges);
            let mut valence: Vec<i64> = adj.iter().map(|n| n.len() as i64).collect();
            let target = |v: usize| if on_boundary[v] { 4 } else { 6 };
            let mut touched = vec![false; self.tris.len()];
            let mut done = 0;
            for e in edges.iter().filter(|e| e.count == 2) {
                let [f1, f2] = e.faces;
                if touched[f1] || touched[f2] {
                    continue;
                }
                let (t1, t2) = (self.tris[f1], self.tris[f2]);
                let (a, b) = if has_directed(&t1, e.a, e.b) { (e.a, e.b) } else { (e.b, e.a) };
                let c = third(&t1, a, b);
                let d = third(&t2, a, b);
                if c == d || adj[c].contains(&d) {
                    continue;
                }
                let dev = |va: i64, vb: i64, vc: i64, vd: i64| {
                    (va - target(a)).pow(2) + (vb - target(b)).pow(2) + (vc - target(c)).pow(2) + (vd - target(d)).pow(2)
                };
                let (va, vb, vc, vd) = (valence[a], valence[b], valence[c], valence[d]);
                if dev(va - 1, vb - 1, vc + 1, vd + 1) >= dev(va, vb, vc, vd) {
                    continue;
                }
                let n1 = [c, a, d];
                let n2 = [d, b, c];
                let (Some(o1), Some(o2)) = (face_normal(&self.pos, &t1), face_normal(&self.pos, &t2)) else {
                    continue;
                };
                let (Some(m1), Some(m2)) = (face_normal(&self.pos, &n1), face_normal(&self.pos, &n2)) else {
                    continue;
                };
                let mean = o1 + o2;
                if m1.dot(&m2) < NORMAL_GUARD || m1.dot(&mean) <= 0.0 || m2.dot(&mean) <= 0.0 {
                    continue;
                }
                let ar = |t: &[usize; 3]| geometry::aspect_ratio(&self.pos[t[0]], &self.pos[t[1]], &self.pos[t[2]]);
                if ar(&n1).min(ar(&n2)) < 0.5 * ar(&t1).min(ar(&t2)) {
                    continue;
                }
                self.tris[f1] = n1;
                self.tris[f2] = n2;
                touched[f1] = true;
                touched[f2] = true;
                valence[a] -= 1;
                valence[b] -= 1;
                valence[c] += 1;
                valence[d] += 1;
                done += 1;
            }
            total += done;
            if done == 0 {
                break;
            }
        }
        Ok(total)
    }

    fn smooth(&mut self) -> Result<()> {
        let edges = self.edges()?;
        let on_boundary = self.boundary_vertices(&edges);
        let adj = self.neighbours(&edges);
        let mut normals = vec![Vec3::zeros(); self.pos.len()];
        for t in &self.tris {
            let [a, b, c] = t.map(|v| self.pos[v]);
            let n = (b - a).cross(&(c - a));
            for &v in t {
                normals[v] += n;
            }
        }
        let mut boundary_adj = vec![Vec::new(); self.pos.len()];
        for e in edges.iter().filter(|e| e.count == 1) {
            boundary_adj[e.a].push(e.b);
            boundary_adj[e.b].push(e.a);
        }

        let next: Vec<Vec3> = (0..self.pos.len())
            .map(|v| {
                let p = self.pos[v];
                if self.feature[v] || adj[v].is_empty() {
                    return p;
                }
                if on_boundary[v] {
                    let nb = &boundary_adj[v];
                    if nb.len() != 2 {
                        return p;
                    }
                    let c = (self.pos[nb[0]] + self.pos[nb[1]]) * 0.5;
                    return self.reference.project_boundary(&(p + (c - p) * 0.5));
                }
                let c = adj[v].iter().map(|&n| self.pos[n]).sum::<Vec3>() / adj[v].len() as f64;
                let n = normals[v].try_normalize(0.0).unwrap_or_else(Vec3::zeros);
                let d = c - p;
                let tangential = d - n * n.dot(&d);
                self.reference.project(&(p + tangential)).0
            })
            .collect();

        // keep the old position of any vertex whose move would flip a face
        let mut accepted = next;
        for _ in 0..4 {
            let mut rejected = false;
            for t in &self.tris {
                let before = face_normal(&self.pos, t);
                let after = face_normal(&accepted, t);
                let flipped = match (before, after) {
                    (Some(n0), Some(n1)) => n0.dot(&n1) <= NORMAL_GUARD,
                    _ => true,
                };
                if flipped {
                    for &v in t {
                        if accepted[v] != self.pos[v] {
                            accepted[v] = self.pos[v];
                            rejected = true;
                        }
                    }
                }
            }
            if !rejected {
                break;
            }
        }
        self.pos = accepted;
        Ok(())
    }

    /// Removes unreferenced vertices.
    fn compact(&mut self) {
        let mut used = vec![false; self.pos.len()];
        for t in &self.tris {
            for &v in t {
                used[v] = true;
            }
        }
        let mut remap = vec![usize::MAX; self.pos.len()];
        let mut pos = Vec::with_capacity(self.pos.len());
        let mut feature = Vec::with_capacity(self.pos.len());
        for v in 0..self.pos.len() {
            if used[v] {
                remap[v] = pos.len();
                pos.push(self.pos[v]);
                feature.push(self.feature[v]);
            }
        }
        for t in &mut self.tris {
            *t = t.map(|v| remap[v]);
        }
        self.pos = pos;
        self.feature = feature;
    }
}

fn feature_flags(mesh: &SurfaceMesh) -> Vec<bool> {
    let mut flags = vec![false; mesh.node_count()];
    let half = mesh.boundary_half_edges();
    let mut next = vec![usize::MAX; mesh.node_count()];
    let mut prev = vec![usize::MAX; mesh.node_count()];
    for [a, b] in &half {
        next[*a] = *b;
        prev[*b] = *a;
    }
    for v in 0..mesh.node_count() {
        if next[v] == usize::MAX || prev[v] == usize::MAX {
            continue;
        }
        let p = mesh.nodes()[v].current;
        let u = p - mesh.nodes()[prev[v]].current;
        let w = mesh.nodes()[next[v]].current - p;
        let cos = u.dot(&w) / (u.norm() * w.norm());
        flags[v] = cos.clamp(-1.0, 1.0).acos() > FEATURE_ANGLE;
    }
    flags
}

/// Remeshes `start` (current configuration) at `target` edge length, keeping
/// vertices on the surface described by `reference`.
pub(crate) fn remesh_onto(
    start: &SurfaceMesh,
    reference: &SurfaceProjector,
    target: f64,
    iterations: usize,
) -> Result<SurfaceMesh> {
    if !(target > 0.0 && target.is_finite()) {
        return Err(MeshError::Argument(format!("target edge length must be positive, got {target}")));
    }
    let mut work = Work {
        pos: start.positions(Configuration::Current),
        tris: start.triangles(),
        feature: feature_flags(start),
        target,
        reference,
    };
    for it in 0..iterations {
        let split = work.split_long_edges()?;
        let collapsed = work.collapse_short_edges()?;
        let flipped = work.flip_edges()?;
        work.smooth()?;
        log::trace!("remesh iteration {it}: {split} splits, {collapsed} collapses, {flipped} flips");
    }
    work.compact();
    SurfaceMesh::new(work.pos, work.tris, DimensionMode::Surface)
}

/// Fresh isotropic triangulation of a surface mesh's current configuration.
pub fn remesh_surface(old: &SurfaceMesh, target_edge_length: f64, iterations: usize) -> Result<SurfaceMesh> {
    let reference = SurfaceProjector::new(old);
    remesh_onto(old, &reference, target_edge_length, iterations)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    /// Latitude-longitude sphere (poor triangles near the poles).
    fn uv_sphere(rings: usize, segments: usize) -> SurfaceMesh {
        let mut pts = vec![Vec3::new(0.0, 0.0, 1.0)];
        for i in 1..rings {
            let phi = PI * i as f64 / rings as f64;
            for j in 0..segments {
                let theta = 2.0 * PI * j as f64 / segments as f64;
                pts.push(Vec3::new(phi.sin() * theta.cos(), phi.sin() * theta.sin(), phi.cos()));
            }
        }
        pts.push(Vec3::new(0.0, 0.0, -1.0));
        let south = pts.len() - 1;
        let ring = |i: usize, j: usize| 1 + (i - 1) * segments + j % segments;
        let mut tris = Vec::new();
        for j in 0..segments {
            tris.push([0, ring(1, j), ring(1, j + 1)]);
            tris.push([south, ring(rings - 1, j + 1), ring(rings - 1, j)]);
        }
        for i in 1..rings - 1 {
            for j in 0..segments {
                tris.push([ring(i, j), ring(i + 1, j), ring(i + 1, j + 1)]);
                tris.push([ring(i, j), ring(i + 1, j + 1), ring(i, j + 1)]);
            }
        }
        SurfaceMesh::new(pts, tris, DimensionMode::Surface).unwrap()
    }

    #[test]
    fn sphere_vertices_stay_on_surface() {
        let old = uv_sphere(12, 24);
        let target = 0.35;
        let fresh = remesh_surface(&old, target, 8).unwrap();
        let projector = SurfaceProjector::new(&old);
        for n in fresh.nodes() {
            assert!(projector.distance(&n.current) <= 0.1 * target);
        }
        assert!(fresh.is_closed());
        let q = fresh.quality_summary(Configuration::Current);
        assert!(q.median >= 0.85, "median AR {}", q.median);
    }

    #[test]
    fn remeshing_at_current_spacing_keeps_size() {
        let old = uv_sphere(10, 20);
        let h = old.median_edge_length(Configuration::Current);
        let fresh = remesh_surface(&old, h, 6).unwrap();
        let ratio = fresh.element_count() as f64 / old.element_count() as f64;
        assert!((0.5..=2.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn outward_orientation_survives() {
        let old = uv_sphere(8, 16);
        let fresh = remesh_surface(&old, 0.3, 5).unwrap();
        let outward = (0..fresh.element_count())
            .filter(|&e| {
                let b = fresh.element_basis(e, Configuration::Current).unwrap();
                b.normal.dot(&fresh.centroid(e, Configuration::Current)) > 0.0
            })
            .count();
        assert_eq!(outward, fresh.element_count());
    }

    #[test]
    fn non_positive_target_is_rejected() {
        let old = uv_sphere(6, 8);
        assert!(remesh_surface(&old, 0.0, 3).is_err());
    }
}
