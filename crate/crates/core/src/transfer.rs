//! Transfer of the initial configuration from an old mesh to a new one.
//!
//! A new node is written in the current frame of its nearest old element
//! (origin at the first vertex, the two edge vectors and the unit normal),
//! and the same coefficients are then applied to that element's initial
//! frame. Within one element this is the inverse of the element's affine
//! deformation, extended off the surface along the normal.

use std::fmt::Write as _;

use nalgebra::Matrix3;
use rayon::prelude::*;

use crate::error::{MeshError, Result};
use crate::geometry::Vec3;
use crate::mesh::{Configuration, ElementBasis, SurfaceMesh};
use crate::search::{ElementLocator, SearchCase, SearchResult};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasisCoefficients {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
}

impl BasisCoefficients {
    pub fn apply(&self, basis: &ElementBasis) -> Vec3 {
        basis.point(self.c1, self.c2, self.c3)
    }
}

/// Solves `[u1 | u2 | n] c = point - origin`.
pub fn basis_coefficients(basis: &ElementBasis, point: &Vec3) -> Result<BasisCoefficients> {
    let m = Matrix3::from_columns(&[basis.u1, basis.u2, basis.normal]);
    let rhs = point - basis.origin;
    let c = m
        .lu()
        .solve(&rhs)
        .filter(|c| c.iter().all(|x| x.is_finite()))
        .ok_or(MeshError::Singular("element frame"))?;
    Ok(BasisCoefficients {
        c1: c.x,
        c2: c.y,
        c3: c.z,
    })
}

/// Result of mapping one point back to the initial configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MappedPoint {
    pub initial: Vec3,
    pub coefficients: BasisCoefficients,
    pub search: SearchResult,
}

/// Maps `point` (near the current surface of the locator's mesh) to the
/// initial configuration through its nearest element.
pub fn map_to_initial(locator: &ElementLocator<'_>, point: &Vec3, tolerance: f64) -> Result<MappedPoint> {
    let search = locator.find_nearest_element(point, tolerance)?;
    let initial = map_through_element(locator.mesh(), search.element, point)?;
    Ok(MappedPoint {
        initial: initial.0,
        coefficients: initial.1,
        search,
    })
}

/// Maps `point` through a given element, skipping the search.
pub fn map_through_element(
    mesh: &SurfaceMesh,
    element: usize,
    point: &Vec3,
) -> Result<(Vec3, BasisCoefficients)> {
    let current = mesh.element_basis(element, Configuration::Current)?;
    let initial = mesh.element_basis(element, Configuration::Initial)?;
    let c = basis_coefficients(&current, point)?;
    Ok((c.apply(&initial), c))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferEntry {
    pub element: usize,
    pub case: SearchCase,
    pub c3: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TransferReport {
    pub entries: Vec<TransferEntry>,
}

impl TransferReport {
    pub fn count(&self, case: SearchCase) -> usize {
        self.entries.iter().filter(|e| e.case == case).count()
    }

    pub fn max_abs_c3(&self) -> f64 {
        self.entries.iter().map(|e| e.c3).fold(0.0, f64::max)
    }

    /// Rows `node,element,case,c3`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("node,element,case,c3\n");
        for (node, e) in self.entries.iter().enumerate() {
            let _ = writeln!(out, "{node},{},{},{}", e.element, e.case, e.c3);
        }
        out
    }
}

/// Assigns every node of `new_mesh` an initial position mapped through
/// `old_mesh`. The first node that fails aborts the whole transfer.
pub fn transfer_initial_configuration(
    old_mesh: &SurfaceMesh,
    new_mesh: &SurfaceMesh,
    tolerance: f64,
) -> Result<(SurfaceMesh, TransferReport)> {
    let locator = ElementLocator::new(old_mesh);
    let mapped: Vec<Result<MappedPoint>> = new_mesh
        .nodes()
        .par_iter()
        .map(|n| map_to_initial(&locator, &n.current, tolerance))
        .collect();

    let mut initial = Vec::with_capacity(mapped.len());
    let mut entries = Vec::with_capacity(mapped.len());
    for (node, m) in mapped.into_iter().enumerate() {
        let m = m.map_err(|source| MeshError::Transfer {
            node,
            source: Box::new(source),
        })?;
        initial.push(m.initial);
        entries.push(TransferEntry {
            element: m.search.element,
            case: m.search.case,
            c3: m.coefficients.c3.abs(),
        });
    }

    let mut out = new_mesh.clone();
    out.set_initial_positions(&initial)?;
    let report = TransferReport { entries };
    log::debug!(
        "transferred {} nodes (case1 {}, case2 {}, case3 {}, boundary {})",
        report.entries.len(),
        report.count(SearchCase::Case1),
        report.count(SearchCase::Case2),
        report.count(SearchCase::Case3),
        report.count(SearchCase::BoundaryEdge),
    );
    Ok((out, report))
}
