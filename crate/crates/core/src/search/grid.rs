//! Uniform spatial hash over axis-aligned boxes with exact nearest queries.

use std::collections::HashMap;

use crate::geometry::{Aabb, Vec3};

type Cell = [i64; 3];

/// Items are registered in every cell their box overlaps. A nearest query
/// scans rings of cells around the query until no unseen item can beat
/// the best candidate, so it returns exactly what a linear scan with the
/// same distance function and `(distance, id)` ordering returns.
#[derive(Debug, Clone)]
pub struct UniformGrid {
    cell: f64,
    origin: Vec3,
    cells: HashMap<Cell, Vec<u32>>,
    lo: Cell,
    hi: Cell,
    len: usize,
}

impl UniformGrid {
    pub fn new(boxes: &[Aabb], cell_size: f64) -> Self {
        let bounds = boxes.iter().fold(Aabb::empty(), |mut acc, b| {
            acc.grow(&b.min);
            acc.grow(&b.max);
            acc
        });
        let cell = if cell_size.is_finite() && cell_size > 0.0 {
            cell_size
        } else {
            bounds.diagonal().max(1.0)
        };
        let origin = if boxes.is_empty() { Vec3::zeros() } else { bounds.min };
        let mut grid = UniformGrid {
            cell,
            origin,
            cells: HashMap::new(),
            lo: [i64::MAX; 3],
            hi: [i64::MIN; 3],
            len: boxes.len(),
        };
        for (id, b) in boxes.iter().enumerate() {
            let lo = grid.cell_of(&b.min);
            let hi = grid.cell_of(&b.max);
            for k in 0..3 {
                grid.lo[k] = grid.lo[k].min(lo[k]);
                grid.hi[k] = grid.hi[k].max(hi[k]);
            }
            for i in lo[0]..=hi[0] {
                for j in lo[1]..=hi[1] {
                    for k in lo[2]..=hi[2] {
                        grid.cells.entry([i, j, k]).or_default().push(id as u32);
                    }
                }
            }
        }
        grid
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    fn cell_of(&self, p: &Vec3) -> Cell {
        let rel = (p - self.origin) / self.cell;
        [rel.x.floor() as i64, rel.y.floor() as i64, rel.z.floor() as i64]
    }

    /// Nearest item under `dist_sq`, which must never be smaller than the
    /// squared distance from the query to the item's box.
    pub fn nearest(&self, p: &Vec3, dist_sq: impl Fn(usize) -> f64) -> Option<(usize, f64)> {
        if self.is_empty() {
            return None;
        }
        let center = self.cell_of(p);
        let max_ring = (0..3)
            .map(|k| (center[k] - self.lo[k]).abs().max((self.hi[k] - center[k]).abs()))
            .max()
            .unwrap_or(0);

        // rings closer than the occupied box are empty
        let first_ring = (0..3)
            .map(|k| (self.lo[k] - center[k]).max(center[k] - self.hi[k]).max(0))
            .max()
            .unwrap_or(0);

        let mut best: Option<(usize, f64)> = None;
        for ring in first_ring..=max_ring {
            self.visit_ring(center, ring, |items| {
                for &id in items {
                    let id = id as usize;
                    let d = dist_sq(id);
                    let better = match best {
                        None => true,
                        Some((bid, bd)) => d < bd || (d == bd && id < bid),
                    };
                    if better {
                        best = Some((id, d));
                    }
                }
            });
            if let Some((_, bd)) = best {
                // Unseen items lie in rings beyond `ring`, at least
                // `ring * cell` away; one ring of slack absorbs rounding in
                // the cell assignment.
                let reach = (ring - 1).max(0) as f64 * self.cell;
                if ring >= 1 && bd < reach * reach {
                    break;
                }
            }
        }
        best
    }

    fn visit_ring(&self, center: Cell, ring: i64, mut visit: impl FnMut(&[u32])) {
        let clip = |k: usize| {
            (
                (center[k] - ring).max(self.lo[k]),
                (center[k] + ring).min(self.hi[k]),
            )
        };
        let (i0, i1) = clip(0);
        let (j0, j1) = clip(1);
        let (k0, k1) = clip(2);
        for i in i0..=i1 {
            let di = (i - center[0]).abs();
            for j in j0..=j1 {
                let dj = (j - center[1]).abs();
                if di == ring || dj == ring {
                    for k in k0..=k1 {
                        if let Some(items) = self.cells.get(&[i, j, k]) {
                            visit(items);
                        }
                    }
                } else {
                    // ring > 0 here: only the two z-caps of the shell
                    for k in [center[2] - ring, center[2] + ring] {
                        if (k0..=k1).contains(&k) {
                            if let Some(items) = self.cells.get(&[i, j, k]) {
                                visit(items);
                            }
                        }
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn point_boxes(points: &[Vec3]) -> Vec<Aabb> {
        points.iter().map(|p| Aabb { min: *p, max: *p }).collect()
    }

    fn brute(points: &[Vec3], q: &Vec3) -> (usize, f64) {
        let mut best = (0, f64::INFINITY);
        for (i, p) in points.iter().enumerate() {
            let d = (q - p).norm_squared();
            if d < best.1 {
                best = (i, d);
            }
        }
        best
    }

    #[test]
    fn ties_resolve_to_lowest_id() {
        let points = vec![Vec3::new(1.0, 0.0, 0.0), Vec3::new(-1.0, 0.0, 0.0)];
        let grid = UniformGrid::new(&point_boxes(&points), 0.3);
        let q = Vec3::zeros();
        let (id, _) = grid.nearest(&q, |i| (q - points[i]).norm_squared()).unwrap();
        assert_eq!(id, 0);
    }

    #[test]
    fn empty_grid_has_no_nearest() {
        let grid = UniformGrid::new(&[], 1.0);
        assert!(grid.nearest(&Vec3::zeros(), |_| 0.0).is_none());
    }

    proptest! {
        #[test]
        fn matches_linear_scan(
            pts in prop::collection::vec(prop::array::uniform3(-5.0f64..5.0), 1..120),
            queries in prop::collection::vec(prop::array::uniform3(-9.0f64..9.0), 1..20),
            cell in 0.05f64..4.0,
        ) {
            let points: Vec<Vec3> = pts.iter().map(|c| Vec3::from(*c)).collect();
            let grid = UniformGrid::new(&point_boxes(&points), cell);
            for q in queries {
                let q = Vec3::from(q);
                let got = grid.nearest(&q, |i| (q - points[i]).norm_squared()).unwrap();
                prop_assert_eq!(got, brute(&points, &q));
            }
        }
    }
}
