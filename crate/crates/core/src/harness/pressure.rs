//! Inflation of a closed capsule under constant internal pressure, run once
//! on a fixed mesh and once with periodic remeshing.

use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;

use super::config::ExperimentConfig;
use super::results::write_text;
use crate::error::{MeshError, Result};
use crate::membrane::{MembraneSimState, SkalakParams};
use crate::mesh::{write_mesh, Configuration, SurfaceMesh};
use crate::remesh::remesh_surface;
use crate::search::DEFAULT_TOLERANCE;
use crate::shapes::capsule_mesh;
use crate::transfer::transfer_initial_configuration;

pub const TIME_SERIES_HEADER: &str = "time,total_area,median_ar,q1_ar,q3_ar,iqr_ar";

#[derive(Debug, Clone, PartialEq)]
pub struct PressureConfig {
    pub radius: f64,
    /// Length of the straight section between the hemispherical caps.
    pub length: f64,
    pub edge_length: f64,
    pub params: SkalakParams,
    pub pressure: f64,
    pub mobility: f64,
    pub dt: f64,
    pub t_end: f64,
    pub remesh_interval: f64,
    /// Hold the hemispherical caps fixed so the tube is tethered at its
    /// ends and takes the pressure in hoop stretch.
    pub clamp_caps: bool,
    pub iterations: usize,
    /// Record every `log_every` steps (the last step is always recorded).
    pub log_every: usize,
    pub tolerance: f64,
}

impl Default for PressureConfig {
    fn default() -> Self {
        PressureConfig {
            radius: 1.0,
            length: 8.0,
            edge_length: 0.25,
            // an area modulus comparable to the shear modulus keeps the
            // tethered tube under axial tension; without it the straight
            // section has no axial stiffness and wrinkles
            params: SkalakParams {
                kappa_s: 0.01,
                kappa_alpha: 0.01,
            },
            pressure: 0.02,
            mobility: 500.0,
            dt: 0.002,
            t_end: 20.0,
            remesh_interval: 0.6,
            clamp_caps: true,
            iterations: 5,
            log_every: 50,
            tolerance: DEFAULT_TOLERANCE,
        }
    }
}

impl PressureConfig {
    pub const KEYS: &'static [&'static str] = &[
        "radius",
        "length",
        "edge_length",
        "kappa_s",
        "kappa_alpha",
        "pressure",
        "mobility",
        "dt",
        "t_end",
        "remesh_interval",
        "clamp_caps",
        "iterations",
        "log_every",
        "seed",
        "tolerance",
    ];

    pub fn from_config(cfg: &ExperimentConfig) -> Result<Self> {
        cfg.check_keys(Self::KEYS)?;
        let d = Self::default();
        let length = cfg.f64_or("length", d.length)?;
        if length < 0.0 {
            return Err(MeshError::Config(format!("`length` must be non-negative, got {length}")));
        }
        Ok(PressureConfig {
            radius: cfg.positive_or("radius", d.radius)?,
            length,
            edge_length: cfg.positive_or("edge_length", d.edge_length)?,
            params: SkalakParams::new(
                cfg.f64_or("kappa_s", d.params.kappa_s)?,
                cfg.f64_or("kappa_alpha", d.params.kappa_alpha)?,
            )?,
            pressure: cfg.f64_or("pressure", d.pressure)?,
            mobility: cfg.positive_or("mobility", d.mobility)?,
            dt: cfg.positive_or("dt", d.dt)?,
            t_end: cfg.positive_or("t_end", d.t_end)?,
            remesh_interval: cfg.positive_or("remesh_interval", d.remesh_interval)?,
            clamp_caps: cfg.u64_or("clamp_caps", u64::from(d.clamp_caps))? != 0,
            iterations: cfg.usize_or("iterations", d.iterations)?,
            log_every: cfg.usize_or("log_every", d.log_every)?.max(1),
            tolerance: cfg.positive_or("tolerance", d.tolerance)?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeSample {
    pub time: f64,
    pub total_area: f64,
    pub median_ar: f64,
    pub q1_ar: f64,
    pub q3_ar: f64,
}

impl TimeSample {
    fn of(mesh: &SurfaceMesh, time: f64) -> Self {
        let q = mesh.quality_summary(Configuration::Current);
        TimeSample {
            time,
            total_area: mesh.total_area(Configuration::Current),
            median_ar: q.median,
            q1_ar: q.q1,
            q3_ar: q.q3,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SimulationRun {
    pub label: &'static str,
    pub samples: Vec<TimeSample>,
    /// Time and message of a divergence that ended the run early.
    pub diverged: Option<(f64, String)>,
    pub remesh_count: usize,
    pub final_mesh: SurfaceMesh,
}

impl SimulationRun {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(TIME_SERIES_HEADER);
        out.push('\n');
        for s in &self.samples {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                s.time,
                s.total_area,
                s.median_ar,
                s.q1_ar,
                s.q3_ar,
                s.q3_ar - s.q1_ar
            );
        }
        out
    }

    pub fn last(&self) -> &TimeSample {
        self.samples.last().expect("runs record the initial state")
    }

    /// Relative area change per unit time over the final `window` of the run.
    pub fn final_area_rate(&self, window: f64) -> f64 {
        let last = self.last();
        let start = self
            .samples
            .iter()
            .rev()
            .find(|s| s.time <= last.time - window)
            .unwrap_or(&self.samples[0]);
        let dt = last.time - start.time;
        if dt <= 0.0 {
            return f64::INFINITY;
        }
        (last.total_area - start.total_area).abs() / (dt * last.total_area)
    }

    /// Largest increase of the median aspect ratio between consecutive
    /// samples after `from`; zero or less means non-increasing.
    pub fn max_median_ar_increase(&self, from: f64) -> f64 {
        self.samples
            .windows(2)
            .filter(|w| w[0].time >= from)
            .map(|w| w[1].median_ar - w[0].median_ar)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Cap nodes, judged by their initial position so the rule carries over to
/// remeshed meshes through the transferred initial configuration.
fn cap_mask(cfg: &PressureConfig, mesh: &SurfaceMesh) -> Vec<bool> {
    if !cfg.clamp_caps {
        return Vec::new();
    }
    let half = 0.5 * cfg.length;
    mesh.nodes().iter().map(|n| n.initial.z.abs() > half + 1e-9).collect()
}

fn simulate(cfg: &PressureConfig, start: &SurfaceMesh, remesh: bool) -> Result<SimulationRun> {
    let mut sim = MembraneSimState::new(start.clone(), cfg.params, cfg.pressure, cfg.mobility);
    sim.pinned = cap_mask(cfg, &sim.mesh);
    let steps = (cfg.t_end / cfg.dt).round() as usize;
    let mut samples = vec![TimeSample::of(&sim.mesh, 0.0)];
    let mut diverged = None;
    let mut remesh_count = 0;
    let mut last_remesh = 0.0;
    for step in 1..=steps {
        if let Err(err) = sim.step_overdamped(cfg.dt) {
            match err {
                MeshError::Diverged { time, .. } => {
                    log::warn!("pressure ({}): {err}", if remesh { "remeshed" } else { "fixed" });
                    diverged = Some((time, err.to_string()));
                    break;
                }
                other => return Err(other),
            }
        }
        // step count keeps the schedule free of accumulated rounding
        sim.time = step as f64 * cfg.dt;
        if remesh && sim.time - last_remesh >= cfg.remesh_interval - 1e-9 {
            let fresh = remesh_surface(&sim.mesh, cfg.edge_length, cfg.iterations)?;
            sim.mesh = transfer_initial_configuration(&sim.mesh, &fresh, cfg.tolerance)?.0;
            sim.pinned = cap_mask(cfg, &sim.mesh);
            last_remesh = sim.time;
            remesh_count += 1;
        }
        if step % cfg.log_every == 0 || step == steps {
            samples.push(TimeSample::of(&sim.mesh, sim.time));
        }
    }
    if diverged.is_some() {
        samples.push(TimeSample::of(&sim.mesh, sim.time));
    }
    Ok(SimulationRun {
        label: if remesh { "remeshed" } else { "fixed" },
        samples,
        diverged,
        remesh_count,
        final_mesh: sim.mesh,
    })
}

#[derive(Debug, Clone)]
pub struct PressureOutcome {
    pub fixed: SimulationRun,
    pub remeshed: SimulationRun,
}

impl PressureOutcome {
    pub fn write(&self, dir: &Path) -> Result<()> {
        for run in [&self.fixed, &self.remeshed] {
            write_text(&dir.join(format!("pressure_{}.csv", run.label)), &run.to_csv())?;
            write_mesh(
                &dir.join(format!("pressure_{}_final.off", run.label)),
                &run.final_mesh,
                Configuration::Current,
            )?;
        }
        Ok(())
    }
}

pub fn run_pressure_simulation(cfg: &PressureConfig) -> Result<PressureOutcome> {
    let start = capsule_mesh(cfg.radius, cfg.length, cfg.edge_length)?;
    let mut runs: Vec<Result<SimulationRun>> =
        [false, true].par_iter().map(|&remesh| simulate(cfg, &start, remesh)).collect();
    let remeshed = runs.pop().expect("two runs")?;
    let fixed = runs.pop().expect("two runs")?;
    Ok(PressureOutcome { fixed, remeshed })
}
