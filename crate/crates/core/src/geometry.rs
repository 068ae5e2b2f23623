//! Small triangle and segment primitives shared by the mesh, search and
//! remeshing code.

use nalgebra::Vector3;

pub type Vec3 = Vector3<f64>;

/// Relative area threshold: a triangle is degenerate when its area is below
/// `DEGENERATE_AREA_RATIO * longest_edge^2`.
pub const DEGENERATE_AREA_RATIO: f64 = 1e-12;

pub fn triangle_area(a: &Vec3, b: &Vec3, c: &Vec3) -> f64 {
    0.5 * (b - a).cross(&(c - a)).norm()
}

pub fn longest_edge_sq(a: &Vec3, b: &Vec3, c: &Vec3) -> f64 {
    (b - a)
        .norm_squared()
        .max((c - b).norm_squared())
        .max((a - c).norm_squared())
}

#[allow(clippy::neg_cmp_op_on_partial_ord)]
pub fn is_degenerate(a: &Vec3, b: &Vec3, c: &Vec3) -> bool {
    let longest = longest_edge_sq(a, b, c);
    // Negated comparison so that NaN coordinates also count as degenerate.
    !(triangle_area(a, b, c) > DEGENERATE_AREA_RATIO * longest)
}

/// Unit normal following the winding `a -> b -> c`, or `None` for a
/// degenerate triangle.
pub fn triangle_normal(a: &Vec3, b: &Vec3, c: &Vec3) -> Option<Vec3> {
    if is_degenerate(a, b, c) {
        return None;
    }
    (b - a).cross(&(c - a)).try_normalize(0.0)
}

/// `2 r_in / r_circ`; 1 for an equilateral triangle, 0 for zero area.
pub fn aspect_ratio(a: &Vec3, b: &Vec3, c: &Vec3) -> f64 {
    let la = (b - c).norm();
    let lb = (a - c).norm();
    let lc = (a - b).norm();
    let area = triangle_area(a, b, c);
    let product = la * lb * lc;
    if area <= 0.0 || product <= 0.0 {
        return 0.0;
    }
    let semi = 0.5 * (la + lb + lc);
    let r_in = area / semi;
    let r_circ = product / (4.0 * area);
    (2.0 * r_in / r_circ).clamp(0.0, 1.0)
}

pub fn closest_point_on_segment(p: &Vec3, a: &Vec3, b: &Vec3) -> Vec3 {
    let ab = b - a;
    let len_sq = ab.norm_squared();
    if len_sq == 0.0 {
        return *a;
    }
    let t = ((p - a).dot(&ab) / len_sq).clamp(0.0, 1.0);
    a + ab * t
}

pub fn segment_distance_sq(p: &Vec3, a: &Vec3, b: &Vec3) -> f64 {
    (p - closest_point_on_segment(p, a, b)).norm_squared()
}

/// Closest point on a solid triangle (Voronoi-region walk).
pub fn closest_point_on_triangle(p: &Vec3, a: &Vec3, b: &Vec3, c: &Vec3) -> Vec3 {
    let ab = b - a;
    let ac = c - a;
    let ap = p - a;
    let d1 = ab.dot(&ap);
    let d2 = ac.dot(&ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return *a;
    }

    let bp = p - b;
    let d3 = ab.dot(&bp);
    let d4 = ac.dot(&bp);
    if d3 >= 0.0 && d4 <= d3 {
        return *b;
    }

    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        let v = d1 / (d1 - d3);
        return a + ab * v;
    }

    let cp = p - c;
    let d5 = ab.dot(&cp);
    let d6 = ac.dot(&cp);
    if d6 >= 0.0 && d5 <= d6 {
        return *c;
    }

    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        let w = d2 / (d2 - d6);
        return a + ac * w;
    }

    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        let w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return b + (c - b) * w;
    }

    let denom = 1.0 / (va + vb + vc);
    let v = vb * denom;
    let w = vc * denom;
    a + ab * v + ac * w
}

pub fn triangle_distance_sq(p: &Vec3, a: &Vec3, b: &Vec3, c: &Vec3) -> f64 {
    (p - closest_point_on_triangle(p, a, b, c)).norm_squared()
}

/// Barycentric coordinates of the orthogonal projection of `p` onto the
/// plane of the triangle. `None` if the triangle is degenerate.
pub fn projected_barycentric(p: &Vec3, a: &Vec3, b: &Vec3, c: &Vec3) -> Option<[f64; 3]> {
    let normal = (b - a).cross(&(c - a));
    let twice_area_sq = normal.norm_squared();
    if is_degenerate(a, b, c) {
        return None;
    }
    // Signed sub-areas measured along the normal ignore the out-of-plane
    // offset, which is exactly the projection.
    let wa = (c - b).cross(&(p - b)).dot(&normal) / twice_area_sq;
    let wb = (a - c).cross(&(p - c)).dot(&normal) / twice_area_sq;
    let wc = 1.0 - wa - wb;
    Some([wa, wb, wc])
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb {
    pub min: Vec3,
    pub max: Vec3,
}

impl Aabb {
    pub fn empty() -> Self {
        Aabb {
            min: Vec3::repeat(f64::INFINITY),
            max: Vec3::repeat(f64::NEG_INFINITY),
        }
    }

    pub fn from_points<'a>(points: impl IntoIterator<Item = &'a Vec3>) -> Self {
        let mut bb = Aabb::empty();
        for p in points {
            bb.grow(p);
        }
        bb
    }

    pub fn grow(&mut self, p: &Vec3) {
        self.min = self.min.inf(p);
        self.max = self.max.sup(p);
    }

    pub fn diagonal(&self) -> f64 {
        (self.max - self.min).norm()
    }
}
