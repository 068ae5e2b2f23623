use histmesh::deformation::AnalyticDeformation;
use histmesh::harness::{deform, spatial_error, values};
use histmesh::remesh::{remesh, RemeshConfig};
use histmesh::search::{ElementLocator, SearchCase, DEFAULT_TOLERANCE};
use histmesh::shapes::{capsule_mesh, cylinder_mesh, square_mesh};
use histmesh::transfer::{basis_coefficients, map_to_initial, transfer_initial_configuration};
use histmesh::{Configuration, DimensionMode, ElementBasis, MeshError, SurfaceMesh, Vec3};
use proptest::prelude::*;

fn close(a: &Vec3, b: &Vec3, tol: f64) -> bool {
    (a - b).norm() <= tol
}

#[test]
fn hand_solved_coefficients() {
    let basis = ElementBasis {
        origin: Vec3::zeros(),
        u1: Vec3::new(2.0, 0.0, 0.0),
        u2: Vec3::new(1.0, 1.0, 0.0),
        normal: Vec3::new(0.0, 0.0, 1.0),
    };
    let c = basis_coefficients(&basis, &Vec3::new(1.5, 0.5, 0.0)).unwrap();
    assert!((c.c1 - 0.5).abs() < 1e-15 && (c.c2 - 0.5).abs() < 1e-15 && c.c3.abs() < 1e-15);
}

#[test]
fn single_element_under_the_quadratic_map() {
    let initial = vec![Vec3::new(1.0, 1.0, 0.0), Vec3::new(1.2, 1.0, 0.0), Vec3::new(1.0, 1.2, 0.0)];
    let f = AnalyticDeformation::SquareQuadratic;
    let current: Vec<Vec3> = initial.iter().map(|p| f.evaluate(p)).collect();
    let mesh = SurfaceMesh::with_history(initial, current, vec![[0, 1, 2]], DimensionMode::Planar).unwrap();
    let locator = ElementLocator::new(&mesh);
    let m = map_to_initial(&locator, &Vec3::new(1.22, 1.0, 0.0), DEFAULT_TOLERANCE).unwrap();
    assert!(close(&m.initial, &Vec3::new(1.1, 1.0, 0.0), 1e-12), "{:?}", m.initial);
}

#[test]
fn normal_offset_carries_through() {
    let mesh = deform(&capsule_mesh(1.0, 1.0, 0.4).unwrap(), &AnalyticDeformation::CylinderSinusoidal).unwrap();
    let locator = ElementLocator::new(&mesh);
    let e = 17;
    let current = mesh.element_basis(e, Configuration::Current).unwrap();
    let initial = mesh.element_basis(e, Configuration::Initial).unwrap();
    let delta = 0.01;
    let p = mesh.centroid(e, Configuration::Current) + delta * current.normal;
    let m = map_to_initial(&locator, &p, DEFAULT_TOLERANCE).unwrap();
    assert_eq!((m.search.element, m.search.case), (e, SearchCase::Case1));
    let expected = mesh.centroid(e, Configuration::Initial) + delta * initial.normal;
    assert!(close(&m.initial, &expected, 1e-12));
}

#[test]
fn identity_history_maps_every_new_node_to_itself() {
    let old = cylinder_mesh(1.0, 2.0, 0.3).unwrap();
    let fresh = remesh(&old, &RemeshConfig::new(0.2).unwrap()).unwrap();
    let (new, report) = transfer_initial_configuration(&old, &fresh, DEFAULT_TOLERANCE).unwrap();
    assert_eq!(report.entries.len(), new.node_count());
    let sum: usize = [SearchCase::Case1, SearchCase::Case2, SearchCase::Case3, SearchCase::BoundaryEdge]
        .iter()
        .map(|&c| report.count(c))
        .sum();
    assert_eq!(sum, new.node_count());
    for n in new.nodes() {
        // new nodes sit on the old chords, so c3 is tiny but not zero
        assert!(close(&n.initial, &n.current, 1e-2));
    }
    assert!(report.max_abs_c3() < 1e-2);
}

#[test]
fn refining_the_old_mesh_reduces_the_spatial_error() {
    let f = AnalyticDeformation::SquareQuadratic;
    let new_target = square_mesh(3.0, 0.15, 5).unwrap();
    let fresh = deform(&new_target, &f).unwrap();
    let mut medians = Vec::new();
    for h in [0.6, 0.3, 0.15] {
        let old = deform(&square_mesh(3.0, h, 1).unwrap(), &f).unwrap();
        let (new, _) = transfer_initial_configuration(&old, &fresh, DEFAULT_TOLERANCE).unwrap();
        let errs = values(&spatial_error(&new, &f));
        let mut sorted = errs.clone();
        sorted.sort_by(f64::total_cmp);
        medians.push(sorted[sorted.len() / 2]);
    }
    assert!(medians[0] > medians[1] && medians[1] > medians[2], "{medians:?}");
}

#[test]
fn collapsed_current_elements_are_rejected_up_front() {
    let err = SurfaceMesh::with_history(
        vec![Vec3::new(0.0, 0.0, 0.0), Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.0, 1.0, 0.0)],
        vec![Vec3::new(0.0, 0.0, 0.0), Vec3::new(1.0, 0.0, 0.0), Vec3::new(2.0, 0.0, 0.0)],
        vec![[0, 1, 2]],
        DimensionMode::Planar,
    )
    .unwrap_err();
    assert!(matches!(err, MeshError::Degenerate { element: 0 }));
    assert_eq!(err.category(), "degenerate");
}

proptest! {
    #[test]
    fn coefficients_reconstruct_the_point(
        ax in -2.0f64..2.0, ay in -2.0f64..2.0, az in -2.0f64..2.0,
        px in -3.0f64..3.0, py in -3.0f64..3.0, pz in -3.0f64..3.0,
    ) {
        let a = Vec3::new(ax, ay, az);
        let b = a + Vec3::new(1.0, 0.3, -0.2);
        let c = a + Vec3::new(-0.1, 0.8, 0.5);
        let basis = ElementBasis::from_vertices(0, &a, &b, &c).unwrap();
        let p = Vec3::new(px, py, pz);
        let back = basis_coefficients(&basis, &p).unwrap().apply(&basis);
        prop_assert!((back - p).norm() <= 1e-10 * p.norm().max(1.0));
    }
}
