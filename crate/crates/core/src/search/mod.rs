//! Nearest-element search: for a point near the current configuration of a
//! mesh, pick the element whose linear deformation should be used to map
//! it back to the initial configuration.
//!
//! The cascade has three stages:
//!
//! 1. the element with the nearest centroid, if the point lies in its
//!    prism (the triangle extruded along its normal in both directions);
//! 2. otherwise the nearest edge: a boundary edge returns its only element,
//!    and a point inside exactly one of the two adjacent prisms returns
//!    that element;
//! 3. a point inside both or neither prism is assigned by the side of the
//!    plane through the edge and the mean of the two element normals.

mod grid;

use std::fmt;
use std::fmt::Write as _;

use crate::error::{MeshError, Result};
use crate::geometry::{self, Aabb, Vec3};
use crate::mesh::{Configuration, SurfaceMesh};

pub use grid::UniformGrid;

/// Barycentric slack for prism containment.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

/// Below this length the mean of two unit normals is treated as zero.
const FOLD_BACK_EPS: f64 = 1e-8;

const CURRENT: Configuration = Configuration::Current;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SearchCase {
    Case1,
    Case2,
    Case3,
    BoundaryEdge,
}

impl SearchCase {
    pub fn as_str(&self) -> &'static str {
        match self {
            SearchCase::Case1 => "case1",
            SearchCase::Case2 => "case2",
            SearchCase::Case3 => "case3",
            SearchCase::BoundaryEdge => "boundary_edge",
        }
    }
}

impl fmt::Display for SearchCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SearchDiagnostics {
    pub centroid_distance: f64,
    pub edge: Option<usize>,
    pub edge_distance: Option<f64>,
    /// Signed distance to the dividing plane (Case 3 only).
    pub plane_distance: Option<f64>,
    /// Case 3 fell back to triangle distances because the normals cancel.
    pub fold_back: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchResult {
    pub element: usize,
    pub case: SearchCase,
    pub diagnostics: SearchDiagnostics,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DividingPlane {
    pub point: Vec3,
    /// Unit normal, oriented toward the first element of the edge.
    pub normal: Vec3,
}

impl DividingPlane {
    pub fn signed_distance(&self, p: &Vec3) -> f64 {
        (p - self.point).dot(&self.normal)
    }
}

/// Whether the projection of `point` onto the element's plane lies inside
/// the triangle, with barycentric slack `tolerance`.
pub fn point_in_prism(mesh: &SurfaceMesh, element: usize, point: &Vec3, tolerance: f64) -> Result<bool> {
    let [a, b, c] = mesh.vertices(element, CURRENT);
    let w = geometry::projected_barycentric(point, &a, &b, &c).ok_or(MeshError::Degenerate { element })?;
    Ok(w.iter().all(|&x| x >= -tolerance))
}

/// Plane through an interior edge containing the mean of the two adjacent
/// element normals.
pub fn dividing_plane(mesh: &SurfaceMesh, edge: usize) -> Result<DividingPlane> {
    let record = mesh.edges()[edge];
    let second = record.second.ok_or(MeshError::BoundaryEdge { edge })?;
    let n1 = mesh.element_basis(record.first, CURRENT)?.normal;
    let n2 = mesh.element_basis(second, CURRENT)?.normal;
    let mean = (n1 + n2) * 0.5;
    if mean.norm() < FOLD_BACK_EPS {
        return Err(MeshError::FoldBack { edge });
    }
    let [p, q] = record.nodes.map(|v| mesh.nodes()[v].current);
    let direction = q - p;
    let mut normal = direction
        .cross(&mean)
        .try_normalize(0.0)
        .ok_or(MeshError::Degenerate { element: record.first })?;
    if (mesh.centroid(record.first, CURRENT) - p).dot(&normal) < 0.0 {
        normal = -normal;
    }
    Ok(DividingPlane { point: p, normal })
}

fn centroid_distance_sq(centroids: &[Vec3], p: &Vec3, e: usize) -> f64 {
    (p - centroids[e]).norm_squared()
}

fn edge_distance_sq(mesh: &SurfaceMesh, p: &Vec3, edge: usize) -> f64 {
    let [a, b] = mesh.edges()[edge].nodes;
    geometry::segment_distance_sq(p, &mesh.nodes()[a].current, &mesh.nodes()[b].current)
}

pub fn element_distance_sq(mesh: &SurfaceMesh, p: &Vec3, element: usize) -> f64 {
    let [a, b, c] = mesh.vertices(element, CURRENT);
    geometry::triangle_distance_sq(p, &a, &b, &c)
}

/// Pre-computed centroids and (optionally) spatial hashes over the current
/// configuration of a mesh. Answers are identical with and without the
/// hashes.
#[derive(Debug, Clone)]
pub struct ElementLocator<'m> {
    mesh: &'m SurfaceMesh,
    centroids: Vec<Vec3>,
    index: Option<(UniformGrid, UniformGrid)>,
}

impl<'m> ElementLocator<'m> {
    /// Locator backed by spatial hashes over centroids and edges.
    pub fn new(mesh: &'m SurfaceMesh) -> Self {
        let mut locator = Self::exhaustive(mesh);
        let cell = 1.5 * mesh.mean_edge_length(CURRENT);
        let centroid_boxes: Vec<Aabb> = locator.centroids.iter().map(|c| Aabb { min: *c, max: *c }).collect();
        let edge_boxes: Vec<Aabb> = mesh
            .edges()
            .iter()
            .map(|e| Aabb::from_points(e.nodes.iter().map(|&v| &mesh.nodes()[v].current)))
            .collect();
        locator.index = Some((
            UniformGrid::new(&centroid_boxes, cell),
            UniformGrid::new(&edge_boxes, cell),
        ));
        locator
    }

    /// Locator answering every query with a linear scan.
    pub fn exhaustive(mesh: &'m SurfaceMesh) -> Self {
        let centroids = (0..mesh.element_count()).map(|e| mesh.centroid(e, CURRENT)).collect();
        ElementLocator {
            mesh,
            centroids,
            index: None,
        }
    }

    pub fn mesh(&self) -> &'m SurfaceMesh {
        self.mesh
    }

    /// Element whose current centroid is closest; ties go to the lowest id.
    pub fn nearest_centroid_element(&self, p: &Vec3) -> (usize, f64) {
        let dist = |e: usize| centroid_distance_sq(&self.centroids, p, e);
        match &self.index {
            Some((centroids, _)) => centroids.nearest(p, dist).expect("mesh is non-empty"),
            None => linear_argmin(self.centroids.len(), dist),
        }
    }

    /// Edge closest to `p` by point-to-segment distance; ties go to the
    /// lowest id.
    pub fn nearest_edge(&self, p: &Vec3) -> (usize, f64) {
        let dist = |e: usize| edge_distance_sq(self.mesh, p, e);
        match &self.index {
            Some((_, edges)) => edges.nearest(p, dist).expect("mesh is non-empty"),
            None => linear_argmin(self.mesh.edges().len(), dist),
        }
    }

    pub fn find_nearest_element(&self, p: &Vec3, tolerance: f64) -> Result<SearchResult> {
        self.cascade(p, tolerance).map_err(|source| MeshError::Search {
            x: p.x,
            y: p.y,
            z: p.z,
            source: Box::new(source),
        })
    }

    fn cascade(&self, p: &Vec3, tolerance: f64) -> Result<SearchResult> {
        let mesh = self.mesh;
        let (nearest, centroid_d2) = self.nearest_centroid_element(p);
        let mut diagnostics = SearchDiagnostics {
            centroid_distance: centroid_d2.sqrt(),
            ..Default::default()
        };
        if point_in_prism(mesh, nearest, p, tolerance)? {
            return Ok(SearchResult {
                element: nearest,
                case: SearchCase::Case1,
                diagnostics,
            });
        }

        let (edge, edge_d2) = self.nearest_edge(p);
        diagnostics.edge = Some(edge);
        diagnostics.edge_distance = Some(edge_d2.sqrt());
        let record = mesh.edges()[edge];
        let Some(second) = record.second else {
            return Ok(SearchResult {
                element: record.first,
                case: SearchCase::BoundaryEdge,
                diagnostics,
            });
        };

        let in_first = point_in_prism(mesh, record.first, p, tolerance)?;
        let in_second = point_in_prism(mesh, second, p, tolerance)?;
        if in_first != in_second {
            return Ok(SearchResult {
                element: if in_first { record.first } else { second },
                case: SearchCase::Case2,
                diagnostics,
            });
        }

        let element = match dividing_plane(mesh, edge) {
            Ok(plane) => {
                let side = plane.signed_distance(p);
                diagnostics.plane_distance = Some(side);
                if side > 0.0 {
                    record.first
                } else {
                    second
                }
            }
            Err(MeshError::FoldBack { .. }) => {
                diagnostics.fold_back = true;
                let d1 = element_distance_sq(mesh, p, record.first);
                let d2 = element_distance_sq(mesh, p, second);
                if d2 < d1 {
                    second
                } else {
                    record.first
                }
            }
            Err(e) => return Err(e),
        };
        Ok(SearchResult {
            element,
            case: SearchCase::Case3,
            diagnostics,
        })
    }
}

fn linear_argmin(len: usize, dist: impl Fn(usize) -> f64) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for i in 0..len {
        let d = dist(i);
        if d < best.1 {
            best = (i, d);
        }
    }
    best
}

/// One-shot search with a linear scan; build an [`ElementLocator`] for
/// repeated queries.
pub fn find_nearest_element(mesh: &SurfaceMesh, p: &Vec3, tolerance: f64) -> Result<SearchResult> {
    ElementLocator::exhaustive(mesh).find_nearest_element(p, tolerance)
}

/// CSV rows `x,y,z,element,case` for debugging a batch of queries.
pub fn diagnostics_csv(rows: &[(Vec3, SearchResult)]) -> String {
    let mut out = String::from("x,y,z,element,case\n");
    for (p, r) in rows {
        let _ = writeln!(out, "{},{},{},{},{}", p.x, p.y, p.z, r.element, r.case);
    }
    out
}
