use nalgebra::Vector2;
use rayon::prelude::*;

use crate::deformation::AnalyticDeformation;
use crate::error::{MeshError, Result};
use crate::membrane::{element_strain, exact_invariants_analytic, skalak_energy_density, SkalakParams};
use crate::mesh::{Configuration, SurfaceMesh};

/// One error value attached to a node or element id.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorSample {
    pub id: usize,
    pub value: f64,
}

pub fn values(samples: &[ErrorSample]) -> Vec<f64> {
    samples.iter().map(|s| s.value).collect()
}

/// Per node, `|x − d(X₀)|²` between the current position and the analytic
/// image of the (transferred) initial position.
pub fn spatial_error(mesh: &SurfaceMesh, deformation: &AnalyticDeformation) -> Vec<ErrorSample> {
    mesh.nodes()
        .par_iter()
        .enumerate()
        .map(|(id, n)| ErrorSample {
            id,
            value: (n.current - deformation.evaluate(&n.initial)).norm_squared(),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct StrainErrors {
    pub samples: Vec<ErrorSample>,
    /// Elements skipped because the analytic Jacobian is singular at their
    /// initial centroid.
    pub excluded: Vec<usize>,
}

/// Per element, `|Ψ_exact − Ψ_discrete|` with the exact value taken from the
/// analytic Jacobian at the element's initial centroid.
pub fn strain_error(mesh: &SurfaceMesh, params: &SkalakParams, deformation: &AnalyticDeformation) -> Result<StrainErrors> {
    let per_element: Vec<Result<Option<f64>>> = (0..mesh.element_count())
        .into_par_iter()
        .map(|e| {
            let c = mesh.centroid(e, Configuration::Initial);
            let exact = match exact_invariants_analytic(deformation, &Vector2::new(c.x, c.y)) {
                Ok(s) => s,
                Err(MeshError::Singular(_)) => return Ok(None),
                Err(err) => return Err(err),
            };
            let discrete = element_strain(mesh, e)?;
            Ok(Some(
                (skalak_energy_density(&exact, params) - skalak_energy_density(&discrete, params)).abs(),
            ))
        })
        .collect();
    let mut samples = Vec::with_capacity(per_element.len());
    let mut excluded = Vec::new();
    for (id, r) in per_element.into_iter().enumerate() {
        match r? {
            Some(value) => samples.push(ErrorSample { id, value }),
            None => excluded.push(id),
        }
    }
    if !excluded.is_empty() {
        log::warn!("{} elements excluded from the strain error (singular Jacobian)", excluded.len());
    }
    Ok(StrainErrors { samples, excluded })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Vec3;
    use crate::mesh::DimensionMode;
    use crate::shapes::square_mesh;
    use crate::transfer::transfer_initial_configuration;
    use approx::assert_relative_eq;

    fn deformed(mesh: &SurfaceMesh, d: &AnalyticDeformation) -> SurfaceMesh {
        let mut out = mesh.clone();
        let current: Vec<Vec3> = mesh.positions(Configuration::Initial).iter().map(|p| d.evaluate(p)).collect();
        out.set_current_positions(&current).unwrap();
        out
    }

    #[test]
    fn identity_has_no_error() {
        let mesh = square_mesh(3.0, 0.5, 0).unwrap();
        let d = AnalyticDeformation::Identity;
        assert!(spatial_error(&mesh, &d).iter().all(|s| s.value < 1e-18));
        let strain = strain_error(&mesh, &SkalakParams::default(), &d).unwrap();
        assert!(strain.samples.iter().all(|s| s.value < 1e-15));
        assert!(strain.excluded.is_empty());
    }

    #[test]
    fn self_transfer_has_no_spatial_error() {
        let f = AnalyticDeformation::SquareQuadratic;
        let m = deformed(&square_mesh(3.0, 0.5, 0).unwrap(), &f);
        let (t, _) = transfer_initial_configuration(&m, &m, 1e-9).unwrap();
        assert!(spatial_error(&t, &f).iter().all(|s| s.value < 1e-18));
    }

    #[test]
    fn single_element_strain_error_matches_two_paths() {
        let initial = vec![Vec3::new(1.0, 1.0, 0.0), Vec3::new(1.2, 1.0, 0.0), Vec3::new(1.0, 1.2, 0.0)];
        let f = AnalyticDeformation::SquareQuadratic;
        let current = initial.iter().map(|p| f.evaluate(p)).collect();
        let mesh = SurfaceMesh::with_history(initial, current, vec![[0, 1, 2]], DimensionMode::Planar).unwrap();
        let params = SkalakParams::default();
        let got = strain_error(&mesh, &params, &f).unwrap().samples[0].value;

        // exact: stretches (2x, 2y) at the centroid (16/15, 16/15)
        let s = 2.0 * 3.2 / 3.0;
        let exact = params.energy_density(2.0 * s * s - 2.0, s.powi(4) - 1.0);
        // discrete: the element maps (0.2, 0) to (0.44, 0) and (0, 0.2) to (0, 0.44)
        let l = 0.44 / 0.2;
        let discrete = params.energy_density(2.0 * l * l - 2.0, l.powi(4) - 1.0);
        assert_relative_eq!(got, (exact - discrete).abs(), max_relative = 1e-10);
    }

    #[test]
    fn singular_centroid_is_excluded() {
        // centroid on x = 0 where the Jacobian of f loses rank
        let initial = vec![Vec3::new(-0.1, 1.0, 0.0), Vec3::new(0.1, 1.0, 0.0), Vec3::new(0.0, 1.3, 0.0)];
        let mesh = SurfaceMesh::new(initial, vec![[0, 1, 2]], DimensionMode::Planar).unwrap();
        let r = strain_error(&mesh, &SkalakParams::default(), &AnalyticDeformation::SquareQuadratic).unwrap();
        assert_eq!(r.excluded, vec![0]);
        assert!(r.samples.is_empty());
    }
}
