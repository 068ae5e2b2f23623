//! Fresh triangulations of a deformed mesh's current geometry, and the
//! rules deciding when to produce one.

mod planar;
mod surface;

pub use planar::{boundary_polygon, check_simple, generate_planar, point_in_polygon, polygon_area, remesh_planar};
pub(crate) use surface::remesh_onto;
pub use surface::{remesh_surface, SurfaceProjector};

use crate::error::{MeshError, Result};
use crate::mesh::{Configuration, DimensionMode, SurfaceMesh};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RemeshTrigger {
    /// Remesh every `interval` units of simulated time.
    Interval(f64),
    /// Remesh when the median element aspect ratio drops below the value.
    AspectRatio(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RemeshConfig {
    pub target_edge_length: f64,
    /// Split/collapse/flip/smooth rounds for surface remeshing.
    pub iterations: usize,
    pub seed: u64,
    pub trigger: RemeshTrigger,
}

impl RemeshConfig {
    pub fn new(target_edge_length: f64) -> Result<Self> {
        if !(target_edge_length > 0.0 && target_edge_length.is_finite()) {
            return Err(MeshError::Config(format!(
                "target edge length must be positive, got {target_edge_length}"
            )));
        }
        Ok(RemeshConfig {
            target_edge_length,
            iterations: 10,
            seed: 0,
            trigger: RemeshTrigger::AspectRatio(0.6),
        })
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_trigger(mut self, trigger: RemeshTrigger) -> Self {
        self.trigger = trigger;
        self
    }

    pub fn with_iterations(mut self, iterations: usize) -> Self {
        self.iterations = iterations;
        self
    }
}

/// Slack for comparing accumulated simulation times against the interval.
const TIME_EPS: f64 = 1e-9;

pub fn should_remesh(mesh: &SurfaceMesh, config: &RemeshConfig, time: f64, last_remesh: f64) -> bool {
    match config.trigger {
        RemeshTrigger::Interval(interval) => time - last_remesh >= interval - TIME_EPS,
        RemeshTrigger::AspectRatio(threshold) => mesh.quality_summary(Configuration::Current).median < threshold,
    }
}

/// Remeshes the current configuration with the generator matching the
/// mesh's dimension mode.
pub fn remesh(old: &SurfaceMesh, config: &RemeshConfig) -> Result<SurfaceMesh> {
    match old.mode() {
        DimensionMode::Planar => remesh_planar(old, config.target_edge_length, config.seed),
        DimensionMode::Surface => remesh_surface(old, config.target_edge_length, config.iterations),
    }
}
