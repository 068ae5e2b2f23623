use super::{elastic_nodal_forces, pressure_nodal_forces, SkalakParams};
use crate::error::{MeshError, Result};
use crate::geometry::{self, Vec3};
use crate::mesh::{Configuration, SurfaceMesh};

/// Quasi-static membrane under uniform internal pressure, advanced with an
/// overdamped explicit update `x += mobility · f · dt`.
#[derive(Debug, Clone)]
pub struct MembraneSimState {
    pub mesh: SurfaceMesh,
    pub params: SkalakParams,
    pub pressure: f64,
    pub mobility: f64,
    pub time: f64,
    /// Nodes held in place; empty means none.
    pub pinned: Vec<bool>,
}

impl MembraneSimState {
    pub fn new(mesh: SurfaceMesh, params: SkalakParams, pressure: f64, mobility: f64) -> Self {
        MembraneSimState {
            mesh,
            params,
            pressure,
            mobility,
            time: 0.0,
            pinned: Vec::new(),
        }
    }

    /// Holds the nodes whose flag is set. Errors if the mask length does not
    /// match the node count.
    pub fn with_pinned(mut self, pinned: Vec<bool>) -> Result<Self> {
        if !pinned.is_empty() && pinned.len() != self.mesh.node_count() {
            return Err(MeshError::Argument(format!(
                "pin mask has {} entries for {} nodes",
                pinned.len(),
                self.mesh.node_count()
            )));
        }
        self.pinned = pinned;
        Ok(self)
    }

    fn is_pinned(&self, node: usize) -> bool {
        self.pinned.get(node).copied().unwrap_or(false)
    }

    /// Elastic plus pressure force on every node.
    pub fn forces(&self) -> Result<Vec<Vec3>> {
        let mut forces = elastic_nodal_forces(&self.mesh, &self.params)?;
        let pressure = pressure_nodal_forces(&self.mesh, self.pressure, false)?;
        for (f, p) in forces.iter_mut().zip(pressure) {
            *f += p;
        }
        Ok(forces)
    }

    pub fn step_overdamped(&mut self, dt: f64) -> Result<()> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(MeshError::Argument(format!("time step must be positive, got {dt}")));
        }
        let diverged = |node| MeshError::Diverged { time: self.time, node };
        let forces = match self.forces() {
            Ok(f) => f,
            Err(MeshError::Degenerate { element }) => {
                return Err(diverged(self.mesh.elements()[element].vertices[0]))
            }
            Err(e) => return Err(e),
        };
        if let Some(node) = forces.iter().position(|f| !f.iter().all(|x| x.is_finite())) {
            return Err(diverged(node));
        }

        let scale = self.mobility * dt;
        let next: Vec<Vec3> = self
            .mesh
            .nodes()
            .iter()
            .zip(&forces)
            .enumerate()
            .map(|(i, (n, f))| if self.is_pinned(i) { n.current } else { n.current + f * scale })
            .collect();
        if let Some(node) = next.iter().position(|p| !p.iter().all(|x| x.is_finite())) {
            return Err(diverged(node));
        }
        for element in self.mesh.elements() {
            let [a, b, c] = element.vertices.map(|v| next[v]);
            if geometry::is_degenerate(&a, &b, &c) {
                return Err(diverged(element.vertices[0]));
            }
        }
        self.mesh.set_current_positions(&next)?;
        self.time += dt;
        Ok(())
    }

    pub fn total_area(&self) -> f64 {
        self.mesh.total_area(Configuration::Current)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::DimensionMode;

    fn octahedron() -> SurfaceMesh {
        let v = Vec3::new;
        SurfaceMesh::new(
            vec![
                v(1.0, 0.0, 0.0),
                v(-1.0, 0.0, 0.0),
                v(0.0, 1.0, 0.0),
                v(0.0, -1.0, 0.0),
                v(0.0, 0.0, 1.0),
                v(0.0, 0.0, -1.0),
            ],
            vec![
                [0, 2, 4],
                [2, 1, 4],
                [1, 3, 4],
                [3, 0, 4],
                [2, 0, 5],
                [1, 2, 5],
                [3, 1, 5],
                [0, 3, 5],
            ],
            DimensionMode::Surface,
        )
        .unwrap()
    }

    #[test]
    fn zero_force_only_advances_time() {
        let mut sim = MembraneSimState::new(octahedron(), SkalakParams::default(), 0.0, 1.0);
        let before = sim.mesh.positions(Configuration::Current);
        sim.step_overdamped(0.1).unwrap();
        assert_eq!(sim.mesh.positions(Configuration::Current), before);
        assert_eq!(sim.time, 0.1);
    }

    #[test]
    fn pressure_inflates_and_elasticity_resists() {
        let mut sim = MembraneSimState::new(octahedron(), SkalakParams::new(1.0, 1.0).unwrap(), 0.1, 1.0);
        let a0 = sim.total_area();
        for _ in 0..2000 {
            sim.step_overdamped(0.01).unwrap();
        }
        let a1 = sim.total_area();
        assert!(a1 > a0);
        sim.step_overdamped(0.01).unwrap();
        assert!((sim.total_area() - a1).abs() < 1e-6 * a1);
    }

    #[test]
    fn pinned_nodes_stay_put() {
        let mut pinned = vec![false; 6];
        pinned[4] = true;
        let mut sim = MembraneSimState::new(octahedron(), SkalakParams::default(), 0.1, 1.0)
            .with_pinned(pinned)
            .unwrap();
        sim.step_overdamped(0.1).unwrap();
        let now = sim.mesh.positions(Configuration::Current);
        assert_eq!(now[4], Vec3::new(0.0, 0.0, 1.0));
        assert!(now[5].z < -1.0);
        assert!(MembraneSimState::new(octahedron(), SkalakParams::default(), 0.0, 1.0)
            .with_pinned(vec![true])
            .is_err());
    }

    #[test]
    fn runaway_step_reports_divergence() {
        let mut sim = MembraneSimState::new(octahedron(), SkalakParams::default(), 1e300, 1.0);
        let err = sim.step_overdamped(1e300).unwrap_err();
        assert!(matches!(err, MeshError::Diverged { .. }));
        assert!(sim.step_overdamped(-1.0).is_err());
    }
}
