use rayon::prelude::*;

use super::{Configuration, SurfaceMesh};
use crate::geometry;
use crate::stats::Summary;

/// Order statistics of the element aspect ratios of a mesh.
pub type QualitySummary = Summary;

impl SurfaceMesh {
    /// `2 r_in / r_circ` of one element; zero-area elements give 0.
    pub fn aspect_ratio(&self, element: usize, config: Configuration) -> f64 {
        let [a, b, c] = self.vertices(element, config);
        geometry::aspect_ratio(&a, &b, &c)
    }

    pub fn aspect_ratios(&self, config: Configuration) -> Vec<f64> {
        (0..self.element_count())
            .into_par_iter()
            .map(|e| self.aspect_ratio(e, config))
            .collect()
    }

    pub fn quality_summary(&self, config: Configuration) -> QualitySummary {
        Summary::from_values(self.aspect_ratios(config))
            .expect("meshes always have at least one element")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Vec3;
    use crate::mesh::DimensionMode;
    use proptest::prelude::*;

    fn strip(points: Vec<Vec3>) -> SurfaceMesh {
        SurfaceMesh::new(points, vec![[0, 1, 2], [1, 3, 2]], DimensionMode::Surface).unwrap()
    }

    #[test]
    fn equilateral_strip_is_perfect() {
        let h = 3f64.sqrt() / 2.0;
        let mesh = strip(vec![
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(0.5, h, 0.0),
            Vec3::new(1.5, h, 0.0),
        ]);
        let q = mesh.quality_summary(Configuration::Current);
        assert!((q.median - 1.0).abs() < 1e-12);
        assert!(q.iqr().abs() < 1e-12);
    }

    fn arb_triangle() -> impl Strategy<Value = [Vec3; 3]> {
        prop::array::uniform3(prop::array::uniform3(-5.0f64..5.0))
            .prop_map(|pts| pts.map(|[x, y, z]| Vec3::new(x, y, z)))
            .prop_filter("non-degenerate", |[a, b, c]| {
                geometry::triangle_area(a, b, c) > 1e-3 * geometry::longest_edge_sq(a, b, c)
            })
    }

    proptest! {
        #[test]
        fn aspect_ratio_is_scale_invariant(tri in arb_triangle(), s in 1e-3f64..1e3) {
            let [a, b, c] = tri;
            let base = geometry::aspect_ratio(&a, &b, &c);
            let scaled = geometry::aspect_ratio(&(a * s), &(b * s), &(c * s));
            prop_assert!((base - scaled).abs() < 1e-10);
            prop_assert!((0.0..=1.0).contains(&base));
        }

        #[test]
        fn aspect_ratio_is_congruence_invariant(
            tri in arb_triangle(),
            axis in prop::array::uniform3(-1.0f64..1.0),
            angle in 0.0f64..std::f64::consts::TAU,
            shift in prop::array::uniform3(-10.0f64..10.0),
        ) {
            let axis = Vec3::from(axis);
            prop_assume!(axis.norm() > 1e-3);
            let rot = nalgebra::Rotation3::from_axis_angle(&nalgebra::Unit::new_normalize(axis), angle);
            let t = Vec3::from(shift);
            let [a, b, c] = tri;
            let moved = [a, b, c].map(|p| rot * p + t);
            let base = geometry::aspect_ratio(&a, &b, &c);
            let after = geometry::aspect_ratio(&moved[0], &moved[1], &moved[2]);
            prop_assert!((base - after).abs() < 1e-10);
        }
    }
}
