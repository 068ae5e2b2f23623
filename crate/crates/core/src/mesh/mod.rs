//! Triangle surface meshes that carry two configurations per node: the
//! initial (reference) position and the current (deformed) position.

mod io;
mod quality;

use std::collections::HashMap;

use crate::error::{MeshError, Result};
use crate::geometry::{self, Vec3};

pub use io::{
    parse_obj, parse_off, read_history_pair, read_mesh, write_mesh, write_obj, write_off,
    MeshFormat, RawMesh,
};
pub use quality::QualitySummary;

/// Which of the two node positions an operation reads.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Configuration {
    Initial,
    Current,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DimensionMode {
    /// z is identically zero in both configurations.
    Planar,
    Surface,
}

impl DimensionMode {
    pub fn detect<'a>(positions: impl IntoIterator<Item = &'a Vec3>) -> Self {
        if positions.into_iter().all(|p| p.z == 0.0) {
            DimensionMode::Planar
        } else {
            DimensionMode::Surface
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeRecord {
    pub initial: Vec3,
    pub current: Vec3,
}

impl NodeRecord {
    #[inline]
    pub fn position(&self, config: Configuration) -> &Vec3 {
        match config {
            Configuration::Initial => &self.initial,
            Configuration::Current => &self.current,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ElementRecord {
    pub vertices: [usize; 3],
}

/// An undirected edge with its one (boundary) or two (interior) incident
/// elements, lower element id first.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EdgeRecord {
    pub nodes: [usize; 2],
    pub first: usize,
    pub second: Option<usize>,
}

impl EdgeRecord {
    pub fn is_boundary(&self) -> bool {
        self.second.is_none()
    }

    pub fn elements(&self) -> impl Iterator<Item = usize> {
        std::iter::once(self.first).chain(self.second)
    }

    pub fn incidence(&self) -> usize {
        1 + usize::from(self.second.is_some())
    }
}

/// Per-element frame: origin at the first vertex, the two edge vectors
/// leaving it, and the unit normal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElementBasis {
    pub origin: Vec3,
    pub u1: Vec3,
    pub u2: Vec3,
    pub normal: Vec3,
}

impl ElementBasis {
    pub fn from_vertices(element: usize, a: &Vec3, b: &Vec3, c: &Vec3) -> Result<Self> {
        let normal = geometry::triangle_normal(a, b, c).ok_or(MeshError::Degenerate { element })?;
        Ok(ElementBasis {
            origin: *a,
            u1: b - a,
            u2: c - a,
            normal,
        })
    }

    pub fn point(&self, c1: f64, c2: f64, c3: f64) -> Vec3 {
        self.origin + self.u1 * c1 + self.u2 * c2 + self.normal * c3
    }
}

#[derive(Debug, Clone)]
pub struct SurfaceMesh {
    nodes: Vec<NodeRecord>,
    elements: Vec<ElementRecord>,
    edges: Vec<EdgeRecord>,
    element_edges: Vec<[usize; 3]>,
    mode: DimensionMode,
}

impl SurfaceMesh {
    /// Builds a mesh whose initial and current configurations coincide.
    pub fn new(positions: Vec<Vec3>, triangles: Vec<[usize; 3]>, mode: DimensionMode) -> Result<Self> {
        let nodes = positions
            .into_iter()
            .map(|p| NodeRecord {
                initial: p,
                current: p,
            })
            .collect();
        Self::from_nodes(nodes, triangles, mode)
    }

    /// Builds a mesh from separate initial and current positions sharing
    /// one connectivity.
    pub fn with_history(
        initial: Vec<Vec3>,
        current: Vec<Vec3>,
        triangles: Vec<[usize; 3]>,
        mode: DimensionMode,
    ) -> Result<Self> {
        if initial.len() != current.len() {
            return Err(MeshError::ConnectivityMismatch(format!(
                "{} initial nodes vs {} current nodes",
                initial.len(),
                current.len()
            )));
        }
        let nodes = initial
            .into_iter()
            .zip(current)
            .map(|(initial, current)| NodeRecord { initial, current })
            .collect();
        Self::from_nodes(nodes, triangles, mode)
    }

    pub fn from_nodes(
        nodes: Vec<NodeRecord>,
        triangles: Vec<[usize; 3]>,
        mode: DimensionMode,
    ) -> Result<Self> {
        if triangles.is_empty() {
            return Err(MeshError::Empty);
        }
        for (i, n) in nodes.iter().enumerate() {
            let finite = n.initial.iter().chain(n.current.iter()).all(|v| v.is_finite());
            let planar_ok = mode == DimensionMode::Surface || (n.initial.z == 0.0 && n.current.z == 0.0);
            if !finite || !planar_ok {
                return Err(MeshError::InvalidPosition { node: i });
            }
        }

        let mut seen: HashMap<[usize; 3], usize> = HashMap::with_capacity(triangles.len());
        for (t, tri) in triangles.iter().enumerate() {
            for &v in tri {
                if v >= nodes.len() {
                    return Err(MeshError::IndexOutOfRange {
                        triangle: t,
                        node: v,
                        node_count: nodes.len(),
                    });
                }
            }
            if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                return Err(MeshError::RepeatedVertex { triangle: t });
            }
            let mut key = *tri;
            key.sort_unstable();
            if let Some(&original) = seen.get(&key) {
                return Err(MeshError::DuplicateTriangle { triangle: t, original });
            }
            seen.insert(key, t);
            for config in [Configuration::Initial, Configuration::Current] {
                let [a, b, c] = tri.map(|v| *nodes[v].position(config));
                if geometry::is_degenerate(&a, &b, &c) {
                    return Err(MeshError::Degenerate { element: t });
                }
            }
        }

        let (edges, element_edges) = build_edges(&triangles)?;
        Ok(SurfaceMesh {
            nodes,
            elements: triangles.into_iter().map(|vertices| ElementRecord { vertices }).collect(),
            edges,
            element_edges,
            mode,
        })
    }

    pub fn mode(&self) -> DimensionMode {
        self.mode
    }

    pub fn nodes(&self) -> &[NodeRecord] {
        &self.nodes
    }

    pub fn elements(&self) -> &[ElementRecord] {
        &self.elements
    }

    pub fn edges(&self) -> &[EdgeRecord] {
        &self.edges
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn element_count(&self) -> usize {
        self.elements.len()
    }

    pub fn triangles(&self) -> Vec<[usize; 3]> {
        self.elements.iter().map(|e| e.vertices).collect()
    }

    /// Edge ids of an element, in the order (v0,v1), (v1,v2), (v2,v0).
    pub fn element_edges(&self, element: usize) -> [usize; 3] {
        self.element_edges[element]
    }

    pub fn positions(&self, config: Configuration) -> Vec<Vec3> {
        self.nodes.iter().map(|n| *n.position(config)).collect()
    }

    pub fn vertices(&self, element: usize, config: Configuration) -> [Vec3; 3] {
        self.elements[element].vertices.map(|v| *self.nodes[v].position(config))
    }

    pub fn centroid(&self, element: usize, config: Configuration) -> Vec3 {
        let [a, b, c] = self.vertices(element, config);
        (a + b + c) / 3.0
    }

    pub fn area(&self, element: usize, config: Configuration) -> f64 {
        let [a, b, c] = self.vertices(element, config);
        geometry::triangle_area(&a, &b, &c)
    }

    pub fn total_area(&self, config: Configuration) -> f64 {
        (0..self.element_count()).map(|e| self.area(e, config)).sum()
    }

    pub fn element_basis(&self, element: usize, config: Configuration) -> Result<ElementBasis> {
        let [a, b, c] = self.vertices(element, config);
        ElementBasis::from_vertices(element, &a, &b, &c)
    }

    pub fn edge_length(&self, edge: usize, config: Configuration) -> f64 {
        let [a, b] = self.edges[edge].nodes;
        (self.nodes[a].position(config) - self.nodes[b].position(config)).norm()
    }

    pub fn median_edge_length(&self, config: Configuration) -> f64 {
        crate::stats::median((0..self.edges.len()).map(|e| self.edge_length(e, config)))
            .unwrap_or(0.0)
    }

    pub fn mean_edge_length(&self, config: Configuration) -> f64 {
        let total: f64 = (0..self.edges.len()).map(|e| self.edge_length(e, config)).sum();
        total / self.edges.len() as f64
    }

    pub fn is_closed(&self) -> bool {
        self.edges.iter().all(|e| !e.is_boundary())
    }

    /// Boundary edges as directed node pairs following element winding.
    pub fn boundary_half_edges(&self) -> Vec<[usize; 2]> {
        self.edges
            .iter()
            .filter(|e| e.is_boundary())
            .map(|e| {
                let tri = self.elements[e.first].vertices;
                let [a, b] = e.nodes;
                let forward = (0..3).any(|k| tri[k] == a && tri[(k + 1) % 3] == b);
                if forward {
                    [a, b]
                } else {
                    [b, a]
                }
            })
            .collect()
    }

    /// Closed boundary loops, each listed in winding order.
    pub fn boundary_loops(&self) -> Result<Vec<Vec<usize>>> {
        let half_edges = self.boundary_half_edges();
        let mut next: HashMap<usize, usize> = HashMap::with_capacity(half_edges.len());
        for [a, b] in &half_edges {
            if next.insert(*a, *b).is_some() {
                return Err(MeshError::Geometry(format!(
                    "boundary node {a} is pinched (two outgoing boundary edges)"
                )));
            }
        }
        let mut starts: Vec<usize> = next.keys().copied().collect();
        starts.sort_unstable();
        let mut visited = std::collections::HashSet::new();
        let mut loops = Vec::new();
        for start in starts {
            if visited.contains(&start) {
                continue;
            }
            let mut ring = vec![start];
            visited.insert(start);
            let mut cur = next[&start];
            while cur != start {
                if !visited.insert(cur) {
                    return Err(MeshError::Geometry("boundary loops intersect".into()));
                }
                ring.push(cur);
                cur = *next
                    .get(&cur)
                    .ok_or_else(|| MeshError::Geometry("open boundary chain".into()))?;
            }
            loops.push(ring);
        }
        Ok(loops)
    }

    /// Replaces the initial configuration, keeping connectivity.
    pub fn set_initial_positions(&mut self, positions: &[Vec3]) -> Result<()> {
        self.check_len(positions)?;
        for (n, p) in self.nodes.iter_mut().zip(positions) {
            n.initial = *p;
        }
        Ok(())
    }

    pub fn set_current_positions(&mut self, positions: &[Vec3]) -> Result<()> {
        self.check_len(positions)?;
        for (n, p) in self.nodes.iter_mut().zip(positions) {
            n.current = *p;
        }
        Ok(())
    }

    /// Checks that no element is degenerate in either configuration.
    pub fn validate_elements(&self) -> Result<()> {
        for e in 0..self.element_count() {
            for config in [Configuration::Initial, Configuration::Current] {
                let [a, b, c] = self.vertices(e, config);
                if geometry::is_degenerate(&a, &b, &c) {
                    return Err(MeshError::Degenerate { element: e });
                }
            }
        }
        Ok(())
    }

    fn check_len(&self, positions: &[Vec3]) -> Result<()> {
        if positions.len() != self.nodes.len() {
            return Err(MeshError::Argument(format!(
                "expected {} positions, got {}",
                self.nodes.len(),
                positions.len()
            )));
        }
        if let Some(node) = positions.iter().position(|p| !p.iter().all(|v| v.is_finite())) {
            return Err(MeshError::InvalidPosition { node });
        }
        Ok(())
    }
}

fn build_edges(triangles: &[[usize; 3]]) -> Result<(Vec<EdgeRecord>, Vec<[usize; 3]>)> {
    let mut index: HashMap<[usize; 2], usize> = HashMap::with_capacity(triangles.len() * 2);
    let mut edges: Vec<EdgeRecord> = Vec::with_capacity(triangles.len() * 2);
    let mut directed: HashMap<[usize; 2], usize> = HashMap::with_capacity(triangles.len() * 3);
    let mut element_edges = Vec::with_capacity(triangles.len());

    for (t, tri) in triangles.iter().enumerate() {
        let mut ids = [0usize; 3];
        for k in 0..3 {
            let (a, b) = (tri[k], tri[(k + 1) % 3]);
            if directed.insert([a, b], t).is_some() {
                // Same directed edge twice: either the neighbours disagree on
                // orientation or the edge is used by a third triangle.
                let key = [a.min(b), a.max(b)];
                let e = &edges[index[&key]];
                return Err(if e.second.is_some() {
                    MeshError::NonManifoldEdge { a: key[0], b: key[1] }
                } else {
                    MeshError::InconsistentWinding { a: key[0], b: key[1] }
                });
            }
            let key = [a.min(b), a.max(b)];
            let id = match index.get(&key) {
                Some(&id) => {
                    let edge = &mut edges[id];
                    if edge.second.is_some() {
                        return Err(MeshError::NonManifoldEdge { a: key[0], b: key[1] });
                    }
                    edge.second = Some(t);
                    id
                }
                None => {
                    edges.push(EdgeRecord {
                        nodes: key,
                        first: t,
                        second: None,
                    });
                    index.insert(key, edges.len() - 1);
                    edges.len() - 1
                }
            };
            ids[k] = id;
        }
        element_edges.push(ids);
    }
    Ok((edges, element_edges))
}
