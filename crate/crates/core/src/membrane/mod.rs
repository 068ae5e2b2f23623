//! Skalak membrane mechanics on linear triangles.
//!
//! Strain is measured per element against its initial configuration. The
//! energy of an element is `A₀ Ψ(I₁, I₂)` with
//! `Ψ = κs/12 (I₁² + 2I₁ − 2I₂) + κα/12 I₂²`.

mod sim;

use nalgebra::{Matrix2, Vector2};
use rayon::prelude::*;

use crate::deformation::AnalyticDeformation;
use crate::error::{MeshError, Result};
use crate::geometry::{self, Vec3};
use crate::mesh::{Configuration, SurfaceMesh};

pub use sim::MembraneSimState;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SkalakParams {
    pub kappa_s: f64,
    pub kappa_alpha: f64,
}

impl SkalakParams {
    pub fn new(kappa_s: f64, kappa_alpha: f64) -> Result<Self> {
        if !(kappa_s >= 0.0 && kappa_alpha >= 0.0) || !kappa_s.is_finite() || !kappa_alpha.is_finite() {
            return Err(MeshError::Config(format!(
                "moduli must be finite and non-negative (kappa_s = {kappa_s}, kappa_alpha = {kappa_alpha})"
            )));
        }
        Ok(SkalakParams { kappa_s, kappa_alpha })
    }

    pub fn energy_density(&self, i1: f64, i2: f64) -> f64 {
        self.kappa_s / 12.0 * (i1 * i1 + 2.0 * i1 - 2.0 * i2) + self.kappa_alpha / 12.0 * i2 * i2
    }

    /// (∂Ψ/∂I₁, ∂Ψ/∂I₂)
    pub fn energy_derivatives(&self, i1: f64, i2: f64) -> (f64, f64) {
        (
            self.kappa_s / 6.0 * (i1 + 1.0),
            -self.kappa_s / 6.0 + self.kappa_alpha / 6.0 * i2,
        )
    }
}

impl Default for SkalakParams {
    fn default() -> Self {
        SkalakParams {
            kappa_s: 0.01,
            kappa_alpha: 0.01e-4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StrainState {
    pub i1: f64,
    pub i2: f64,
    /// Principal stretches, largest first.
    pub stretches: [f64; 2],
}

impl StrainState {
    pub fn from_stretches(l1: f64, l2: f64) -> Self {
        let (a, b) = if l1 >= l2 { (l1, l2) } else { (l2, l1) };
        StrainState {
            i1: a * a + b * b - 2.0,
            i2: a * a * b * b - 1.0,
            stretches: [a, b],
        }
    }
}

pub fn skalak_energy_density(state: &StrainState, params: &SkalakParams) -> f64 {
    params.energy_density(state.i1, state.i2)
}

/// Singular values of a 2×2 matrix, largest first.
pub fn singular_values(f: &Matrix2<f64>) -> [f64; 2] {
    let norm_sq = f.norm_squared();
    let det = f.determinant().abs();
    let s = (norm_sq + 2.0 * det).max(0.0).sqrt();
    let d = (norm_sq - 2.0 * det).max(0.0).sqrt();
    [(s + d) / 2.0, (s - d) / 2.0]
}

/// Edge vectors of a triangle in its own orthonormal tangent frame, with
/// the first axis along the first edge.
fn tangent_edges(a: &Vec3, b: &Vec3, c: &Vec3) -> Option<Matrix2<f64>> {
    let u1 = b - a;
    let u2 = c - a;
    let normal = geometry::triangle_normal(a, b, c)?;
    let e1 = u1.try_normalize(0.0)?;
    let e2 = normal.cross(&e1);
    Some(Matrix2::new(u1.dot(&e1), u2.dot(&e1), u1.dot(&e2), u2.dot(&e2)))
}

/// In-plane deformation gradient of an element: the 2×2 map taking its
/// initial edge vectors to its current ones, each expressed in the
/// element's own tangent frame.
pub fn deformation_gradient(mesh: &SurfaceMesh, element: usize) -> Result<Matrix2<f64>> {
    let degenerate = MeshError::Degenerate { element };
    let [a0, b0, c0] = mesh.vertices(element, Configuration::Initial);
    let [a, b, c] = mesh.vertices(element, Configuration::Current);
    if geometry::is_degenerate(&a0, &b0, &c0) || geometry::is_degenerate(&a, &b, &c) {
        return Err(degenerate);
    }
    let initial = tangent_edges(&a0, &b0, &c0).ok_or(MeshError::Degenerate { element })?;
    let current = tangent_edges(&a, &b, &c).ok_or(MeshError::Degenerate { element })?;
    let inv = initial.try_inverse().ok_or(degenerate)?;
    Ok(current * inv)
}

pub fn strain_invariants(f: &Matrix2<f64>) -> Result<StrainState> {
    let det = f.determinant();
    if !det.is_finite() || det.abs() <= 1e-14 * f.norm_squared() {
        return Err(MeshError::Singular("deformation gradient"));
    }
    let [l1, l2] = singular_values(f);
    Ok(StrainState {
        i1: f.norm_squared() - 2.0,
        i2: det * det - 1.0,
        stretches: [l1, l2],
    })
}

pub fn element_strain(mesh: &SurfaceMesh, element: usize) -> Result<StrainState> {
    strain_invariants(&deformation_gradient(mesh, element)?)
        .map_err(|_| MeshError::Degenerate { element })
}

/// Exact invariants of an analytic deformation at an initial point of the
/// plane, from the in-plane block of its Jacobian.
pub fn exact_invariants_analytic(deformation: &AnalyticDeformation, initial: &Vector2<f64>) -> Result<StrainState> {
    let j = deformation.jacobian(&Vec3::new(initial.x, initial.y, 0.0));
    strain_invariants(&j.fixed_view::<2, 2>(0, 0).into_owned())
}

/// Closed-form invariants for f(x) = (x², y²) written in terms of a
/// per-axis quantity Δ with stretches `2Δ − 1`. Agreement with the Jacobian
/// route needs Δ = x₀ + 1/2 at the initial centroid x₀.
pub fn closed_form_invariants(delta: &Vector2<f64>) -> StrainState {
    StrainState::from_stretches((2.0 * delta.x - 1.0).abs(), (2.0 * delta.y - 1.0).abs())
}

/// Per-element energy `A₀ Ψ` and its gradient with respect to the current
/// vertex positions, computed from Gram matrices of the edge vectors.
fn element_energy_gradient(mesh: &SurfaceMesh, element: usize, params: &SkalakParams) -> Result<(f64, [Vec3; 3])> {
    let [a0, b0, c0] = mesh.vertices(element, Configuration::Initial);
    let [a, b, c] = mesh.vertices(element, Configuration::Current);
    if geometry::is_degenerate(&a0, &b0, &c0) || geometry::is_degenerate(&a, &b, &c) {
        return Err(MeshError::Degenerate { element });
    }
    let (v1, v2) = (b0 - a0, c0 - a0);
    let (u1, u2) = (b - a, c - a);

    let (h11, h12, h22) = (v1.dot(&v1), v1.dot(&v2), v2.dot(&v2));
    let det0 = h11 * h22 - h12 * h12;
    // inverse of the initial Gram matrix
    let (k11, k12, k22) = (h22 / det0, -h12 / det0, h11 / det0);

    let (g11, g12, g22) = (u1.dot(&u1), u1.dot(&u2), u2.dot(&u2));
    let det = g11 * g22 - g12 * g12;

    let i1 = k11 * g11 + 2.0 * k12 * g12 + k22 * g22 - 2.0;
    let i2 = det / det0 - 1.0;
    let area0 = 0.5 * det0.sqrt();

    let (psi1, psi2) = params.energy_derivatives(i1, i2);
    let di1_du1 = (u1 * k11 + u2 * k12) * 2.0;
    let di1_du2 = (u1 * k12 + u2 * k22) * 2.0;
    let di2_du1 = (u1 * g22 - u2 * g12) * (2.0 / det0);
    let di2_du2 = (u2 * g11 - u1 * g12) * (2.0 / det0);

    let g_b = (di1_du1 * psi1 + di2_du1 * psi2) * area0;
    let g_c = (di1_du2 * psi1 + di2_du2 * psi2) * area0;
    let energy = area0 * params.energy_density(i1, i2);
    Ok((energy, [-(g_b + g_c), g_b, g_c]))
}

/// Σ over elements of `A₀ Ψ`.
pub fn total_energy(mesh: &SurfaceMesh, params: &SkalakParams) -> Result<f64> {
    let energies: Vec<f64> = (0..mesh.element_count())
        .into_par_iter()
        .map(|e| element_energy_gradient(mesh, e, params).map(|(w, _)| w))
        .collect::<Result<_>>()?;
    Ok(energies.iter().sum())
}

/// Negative gradient of [`total_energy`] with respect to current node
/// positions. Per-element terms are summed in element order, so results do
/// not depend on the thread count.
pub fn elastic_nodal_forces(mesh: &SurfaceMesh, params: &SkalakParams) -> Result<Vec<Vec3>> {
    let per_element: Vec<[Vec3; 3]> = (0..mesh.element_count())
        .into_par_iter()
        .map(|e| element_energy_gradient(mesh, e, params).map(|(_, g)| g))
        .collect::<Result<_>>()?;
    let mut forces = vec![Vec3::zeros(); mesh.node_count()];
    for (element, grad) in mesh.elements().iter().zip(&per_element) {
        for (v, g) in element.vertices.iter().zip(grad) {
            forces[*v] -= g;
        }
    }
    Ok(forces)
}

/// `p Aⱼ nⱼ / 3` to each vertex of every element. Open surfaces are
/// rejected unless `allow_open` is set.
pub fn pressure_nodal_forces(mesh: &SurfaceMesh, pressure: f64, allow_open: bool) -> Result<Vec<Vec3>> {
    if !allow_open && !mesh.is_closed() {
        return Err(MeshError::Config("pressure loading needs a closed surface".into()));
    }
    let mut forces = vec![Vec3::zeros(); mesh.node_count()];
    if pressure == 0.0 {
        return Ok(forces);
    }
    for (e, element) in mesh.elements().iter().enumerate() {
        let [a, b, c] = mesh.vertices(e, Configuration::Current);
        let share = (b - a).cross(&(c - a)) * (pressure / 6.0);
        for v in element.vertices {
            forces[v] += share;
        }
    }
    Ok(forces)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::DimensionMode;
    use approx::assert_relative_eq;
    use nalgebra::Rotation3;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn v(x: f64, y: f64, z: f64) -> Vec3 {
        Vec3::new(x, y, z)
    }

    fn single(initial: [Vec3; 3], current: [Vec3; 3]) -> SurfaceMesh {
        SurfaceMesh::with_history(initial.to_vec(), current.to_vec(), vec![[0, 1, 2]], DimensionMode::Surface)
            .unwrap()
    }

    fn unit_right() -> [Vec3; 3] {
        [v(0.0, 0.0, 0.0), v(1.0, 0.0, 0.0), v(0.0, 1.0, 0.0)]
    }

    #[test]
    fn undeformed_gradient_is_identity() {
        let mesh = single(unit_right(), unit_right());
        let f = deformation_gradient(&mesh, 0).unwrap();
        assert_relative_eq!(f, Matrix2::identity(), epsilon = 1e-15);
        let s = strain_invariants(&f).unwrap();
        assert_eq!((s.i1, s.i2), (0.0, 0.0));
    }

    #[test]
    fn isotropic_scale_has_equal_stretches() {
        let mesh = single(unit_right(), unit_right().map(|p| p * 2.0 + v(3.0, -1.0, 0.5)));
        let s = element_strain(&mesh, 0).unwrap();
        assert_relative_eq!(s.stretches[0], 2.0, epsilon = 1e-14);
        assert_relative_eq!(s.stretches[1], 2.0, epsilon = 1e-14);
    }

    #[test]
    fn anisotropic_stretch() {
        let mesh = single(unit_right(), [v(0.0, 0.0, 0.0), v(2.0, 0.0, 0.0), v(0.0, 0.5, 0.0)]);
        let s = element_strain(&mesh, 0).unwrap();
        assert_relative_eq!(s.stretches[0], 2.0, epsilon = 1e-14);
        assert_relative_eq!(s.stretches[1], 0.5, epsilon = 1e-14);
        assert_relative_eq!(s.i1, 2.25, epsilon = 1e-14);
        assert_relative_eq!(s.i2, 0.0, epsilon = 1e-14);
    }

    #[test]
    fn invariants_from_stretches() {
        let r2 = 2f64.sqrt();
        let s = StrainState::from_stretches(r2, r2);
        assert_relative_eq!(s.i1, 2.0, epsilon = 1e-15);
        assert_relative_eq!(s.i2, 3.0, epsilon = 1e-15);
    }

    #[test]
    fn energy_density_values() {
        let p = SkalakParams::new(0.01, 1e-6).unwrap();
        assert_eq!(p.energy_density(0.0, 0.0), 0.0);
        assert_relative_eq!(p.energy_density(2.0, 3.0), 0.01 / 12.0 * 2.0 + 1e-6 / 12.0 * 9.0, epsilon = 1e-18);
        assert_relative_eq!(p.energy_density(2.0, 3.0), 1.66742e-3, max_relative = 1e-5);
        assert_relative_eq!(p.energy_density(2.25, 0.0), 7.96875e-3, epsilon = 1e-17);
        assert!(SkalakParams::new(-1.0, 0.0).is_err());
        assert_eq!(SkalakParams::default(), SkalakParams::new(0.01, 1e-6).unwrap());
    }

    #[test]
    fn analytic_oracle_values() {
        let f = AnalyticDeformation::SquareQuadratic;
        let s = exact_invariants_analytic(&f, &Vector2::new(1.0, 1.0)).unwrap();
        assert_eq!((s.i1, s.i2), (6.0, 15.0));
        let s = exact_invariants_analytic(&f, &Vector2::new(0.5, 1.0)).unwrap();
        assert_eq!((s.i1, s.i2), (3.0, 3.0));
        let s = exact_invariants_analytic(&AnalyticDeformation::Identity, &Vector2::new(0.3, 2.0)).unwrap();
        assert_eq!((s.i1, s.i2), (0.0, 0.0));
        assert!(exact_invariants_analytic(&f, &Vector2::new(0.0, 1.0)).is_err());
    }

    #[test]
    fn closed_form_agrees_with_jacobian_route() {
        let f = AnalyticDeformation::SquareQuadratic;
        for (x, y) in [(0.2, 0.7), (1.0, 1.0), (2.5, 0.4), (2.9, 2.9)] {
            let exact = exact_invariants_analytic(&f, &Vector2::new(x, y)).unwrap();
            let closed = closed_form_invariants(&Vector2::new(x + 0.5, y + 0.5));
            assert_relative_eq!(exact.i1, closed.i1, max_relative = 1e-14);
            assert_relative_eq!(exact.i2, closed.i2, max_relative = 1e-14);
        }
    }

    #[test]
    fn rigid_motion_leaves_invariants_unchanged() {
        let current = [v(0.1, 0.0, 0.0), v(1.3, 0.2, 0.1), v(-0.2, 0.9, 0.3)];
        let base = element_strain(&single(unit_right(), current), 0).unwrap();
        let rot = Rotation3::from_euler_angles(0.3, -1.1, 2.0);
        let moved = current.map(|p| rot * p + v(5.0, -2.0, 1.0));
        let after = element_strain(&single(unit_right(), moved), 0).unwrap();
        assert_relative_eq!(base.i1, after.i1, epsilon = 1e-10);
        assert_relative_eq!(base.i2, after.i2, epsilon = 1e-10);
        let rotated_initial = unit_right().map(|p| rot * p);
        let pre = element_strain(&single(rotated_initial, current), 0).unwrap();
        assert_relative_eq!(base.i1, pre.i1, epsilon = 1e-10);
        assert_relative_eq!(base.i2, pre.i2, epsilon = 1e-10);
    }

    #[test]
    fn gram_route_matches_gradient_route() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let params = SkalakParams::new(0.3, 0.7).unwrap();
        for _ in 0..100 {
            let mut pt = || v(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            let initial = [pt(), pt(), pt()];
            let current = [pt(), pt(), pt()];
            let Ok(mesh) = SurfaceMesh::with_history(initial.to_vec(), current.to_vec(), vec![[0, 1, 2]], DimensionMode::Surface) else {
                continue;
            };
            let s = element_strain(&mesh, 0).unwrap();
            let area0 = mesh.area(0, Configuration::Initial);
            let w = total_energy(&mesh, &params).unwrap();
            assert_relative_eq!(w, area0 * skalak_energy_density(&s, &params), max_relative = 1e-9);
        }
    }

    #[test]
    fn rest_state_has_no_forces() {
        let mesh = single(unit_right(), unit_right());
        for f in elastic_nodal_forces(&mesh, &SkalakParams::default()).unwrap() {
            assert!(f.norm() < 1e-12);
        }
    }

    #[test]
    fn forces_are_translation_invariant() {
        let current = [v(0.0, 0.0, 0.0), v(1.5, 0.1, 0.0), v(0.2, 0.8, 0.2)];
        let p = SkalakParams::default();
        let a = elastic_nodal_forces(&single(unit_right(), current), &p).unwrap();
        let b = elastic_nodal_forces(&single(unit_right(), current.map(|x| x + v(3.0, 4.0, 5.0))), &p).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_relative_eq!(x, y, epsilon = 1e-15);
        }
    }

    #[test]
    fn flat_patch_pressure_sums_to_area() {
        let mesh = SurfaceMesh::new(
            vec![v(0.0, 0.0, 0.0), v(1.0, 0.0, 0.0), v(1.0, 1.0, 0.0), v(0.0, 1.0, 0.0)],
            vec![[0, 1, 2], [0, 2, 3]],
            DimensionMode::Surface,
        )
        .unwrap();
        assert!(matches!(pressure_nodal_forces(&mesh, 1.0, false), Err(MeshError::Config(_))));
        let total: Vec3 = pressure_nodal_forces(&mesh, 1.0, true).unwrap().iter().sum();
        assert_relative_eq!(total, v(0.0, 0.0, 1.0), epsilon = 1e-15);
        let zero = pressure_nodal_forces(&mesh, 0.0, true).unwrap();
        assert!(zero.iter().all(|f| *f == Vec3::zeros()));
    }

    #[test]
    fn closed_surface_pressure_cancels() {
        // octahedron, outward winding
        let pts = vec![
            v(1.0, 0.0, 0.0),
            v(-1.0, 0.0, 0.0),
            v(0.0, 1.0, 0.0),
            v(0.0, -1.0, 0.0),
            v(0.0, 0.0, 1.0),
            v(0.0, 0.0, -1.0),
        ];
        let tris = vec![
            [0, 2, 4],
            [2, 1, 4],
            [1, 3, 4],
            [3, 0, 4],
            [2, 0, 5],
            [1, 2, 5],
            [3, 1, 5],
            [0, 3, 5],
        ];
        let mesh = SurfaceMesh::new(pts, tris, DimensionMode::Surface).unwrap();
        let forces = pressure_nodal_forces(&mesh, 1.0, false).unwrap();
        let net: Vec3 = forces.iter().sum();
        let scale: f64 = forces.iter().map(|f| f.norm()).sum();
        assert!(net.norm() < 1e-6 * scale);
        // outward: node 0 is pushed along +x
        assert!(forces[0].x > 0.0);
    }
}
