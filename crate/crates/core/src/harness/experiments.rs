//! Sweep pipelines: build a mesh, deform it analytically, remesh, transfer
//! the initial configuration and measure the error against the analytic map.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;

use super::config::ExperimentConfig;
use super::metrics::{spatial_error, strain_error, values};
use super::results::{write_results, write_text, ExperimentResult, LevelResult};
use crate::deformation::AnalyticDeformation;
use crate::error::{MeshError, Result};
use crate::geometry::Vec3;
use crate::membrane::SkalakParams;
use crate::mesh::{write_mesh, Configuration, SurfaceMesh};
use crate::remesh::{remesh_planar, remesh_surface};
use crate::search::DEFAULT_TOLERANCE;
use crate::shapes::{cylinder_mesh, square_mesh};
use crate::stats::Summary;
use crate::transfer::{transfer_initial_configuration, TransferReport};

/// Copy of `mesh` whose current configuration is `d` applied to the initial one.
pub fn deform(mesh: &SurfaceMesh, d: &AnalyticDeformation) -> Result<SurfaceMesh> {
    let current: Vec<Vec3> = mesh.nodes().iter().map(|n| d.evaluate(&n.initial)).collect();
    let mut out = mesh.clone();
    out.set_current_positions(&current)?;
    Ok(out)
}

/// A deformed mesh, its replacement, and the transfer between them.
#[derive(Debug, Clone)]
pub struct RemeshedPair {
    pub old: SurfaceMesh,
    pub new: SurfaceMesh,
    pub report: TransferReport,
}

fn transfer_pair(old: SurfaceMesh, fresh: SurfaceMesh, tolerance: f64) -> Result<RemeshedPair> {
    let (new, report) = transfer_initial_configuration(&old, &fresh, tolerance)?;
    Ok(RemeshedPair { old, new, report })
}

/// Square `[0, side]²` meshed at `old_h`, deformed by f, remeshed at `new_h`.
pub fn square_pair(side: f64, old_h: f64, new_h: f64, seed: u64, tolerance: f64) -> Result<RemeshedPair> {
    let old = deform(&square_mesh(side, old_h, seed)?, &AnalyticDeformation::SquareQuadratic)?;
    let fresh = remesh_planar(&old, new_h, seed.wrapping_add(1))?;
    transfer_pair(old, fresh, tolerance)
}

/// Cylinder meshed at `old_h`, deformed by `d`, surface-remeshed at `new_h`.
pub fn cylinder_pair(
    old_h: f64,
    new_h: f64,
    d: &AnalyticDeformation,
    iterations: usize,
    tolerance: f64,
) -> Result<RemeshedPair> {
    let old = deform(&cylinder_mesh(CYLINDER_RADIUS, CYLINDER_HEIGHT, old_h)?, d)?;
    let fresh = remesh_surface(&old, new_h, iterations)?;
    transfer_pair(old, fresh, tolerance)
}

pub const CYLINDER_RADIUS: f64 = 1.0;
pub const CYLINDER_HEIGHT: f64 = 2.0 * PI;

/// Samples and achieved edge length of one level.
type LevelData = (Vec<f64>, f64);

fn run_sweep<F>(name: &str, sweep: &str, levels: &[f64], seed: u64, run: F) -> ExperimentResult
where
    F: Fn(f64) -> Result<Option<LevelData>> + Sync,
{
    let levels = levels
        .par_iter()
        .map(|&level| match run(level) {
            Ok(Some((samples, achieved))) => LevelResult {
                level,
                summary: Summary::from_values(samples),
                achieved_edge_length: Some(achieved),
                seed,
                error: None,
            },
            Ok(None) => LevelResult::absent(level, seed),
            Err(err) => {
                log::error!("{name}: level {level} failed: {err}");
                LevelResult::failed(level, seed, &err)
            }
        })
        .collect();
    ExperimentResult {
        name: name.to_string(),
        sweep: sweep.to_string(),
        levels,
    }
}

fn sorted_levels(mut levels: Vec<f64>) -> Vec<f64> {
    // coarse to fine, the order used in the plots
    levels.sort_by(|a, b| b.total_cmp(a));
    levels.dedup();
    levels
}

fn median_edge(mesh: &SurfaceMesh, config: Configuration) -> f64 {
    mesh.median_edge_length(config)
}

// ---------------------------------------------------------------- square

#[derive(Debug, Clone, PartialEq)]
pub struct SquareConfig {
    pub side: f64,
    /// Old edge lengths swept at `fixed_edge_length` for the new mesh.
    pub old_edge_lengths: Vec<f64>,
    /// New edge lengths swept at `fixed_edge_length` for the old mesh.
    pub new_edge_lengths: Vec<f64>,
    pub fixed_edge_length: f64,
    /// Old and new edge length of the aspect ratio comparison.
    pub quality_old_edge_length: f64,
    pub quality_new_edge_length: f64,
    pub seed: u64,
    pub tolerance: f64,
}

impl Default for SquareConfig {
    fn default() -> Self {
        SquareConfig {
            side: 3.0,
            old_edge_lengths: vec![0.5, 0.4, 0.3, 0.2, 0.1],
            new_edge_lengths: vec![0.5, 0.4, 0.3, 0.2, 0.1],
            fixed_edge_length: 0.1,
            quality_old_edge_length: 0.5,
            quality_new_edge_length: 0.2,
            seed: 1,
            tolerance: DEFAULT_TOLERANCE,
        }
    }
}

impl SquareConfig {
    pub const KEYS: &'static [&'static str] = &[
        "side",
        "old_edge_lengths",
        "new_edge_lengths",
        "fixed_edge_length",
        "quality_old_edge_length",
        "quality_new_edge_length",
        "seed",
        "tolerance",
    ];

    pub fn from_config(cfg: &ExperimentConfig) -> Result<Self> {
        cfg.check_keys(Self::KEYS)?;
        let d = Self::default();
        Ok(SquareConfig {
            side: cfg.positive_or("side", d.side)?,
            old_edge_lengths: sorted_levels(cfg.positive_list_or("old_edge_lengths", &d.old_edge_lengths)?),
            new_edge_lengths: sorted_levels(cfg.positive_list_or("new_edge_lengths", &d.new_edge_lengths)?),
            fixed_edge_length: cfg.positive_or("fixed_edge_length", d.fixed_edge_length)?,
            quality_old_edge_length: cfg.positive_or("quality_old_edge_length", d.quality_old_edge_length)?,
            quality_new_edge_length: cfg.positive_or("quality_new_edge_length", d.quality_new_edge_length)?,
            seed: cfg.u64_or("seed", d.seed)?,
            tolerance: cfg.positive_or("tolerance", d.tolerance)?,
        })
    }
}

/// Aspect ratios of the four meshes of one remeshing event.
#[derive(Debug, Clone)]
pub struct QualityStudy {
    pub pair: RemeshedPair,
}

impl QualityStudy {
    /// (label, mesh, configuration) for the old initial, old current,
    /// mapped new initial and new current meshes.
    pub fn meshes(&self) -> [(&'static str, &SurfaceMesh, Configuration); 4] {
        [
            ("old_initial", &self.pair.old, Configuration::Initial),
            ("old_current", &self.pair.old, Configuration::Current),
            ("new_initial", &self.pair.new, Configuration::Initial),
            ("new_current", &self.pair.new, Configuration::Current),
        ]
    }

    pub fn summary(&self, label: &str) -> Option<Summary> {
        self.meshes()
            .into_iter()
            .find(|(l, _, _)| *l == label)
            .map(|(_, m, c)| m.quality_summary(c))
    }

    /// `mesh,element,aspect_ratio` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("mesh,element,aspect_ratio\n");
        for (label, mesh, config) in self.meshes() {
            for (e, ar) in mesh.aspect_ratios(config).into_iter().enumerate() {
                let _ = writeln!(out, "{label},{e},{ar}");
            }
        }
        out
    }

    pub fn write(&self, dir: &Path, prefix: &str) -> Result<()> {
        write_text(&dir.join(format!("{prefix}_aspect_ratios.csv")), &self.to_csv())?;
        for (label, mesh, config) in self.meshes() {
            write_mesh(&dir.join(format!("{prefix}_{label}.off")), mesh, config)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SquareOutcome {
    pub old_sweep: ExperimentResult,
    pub new_sweep: ExperimentResult,
    pub quality: Option<QualityStudy>,
}

pub fn run_square_spatial_experiment(cfg: &SquareConfig) -> SquareOutcome {
    let level = |old_h: f64, new_h: f64| square_pair(cfg.side, old_h, new_h, cfg.seed, cfg.tolerance);
    let f = AnalyticDeformation::SquareQuadratic;
    let (old_sweep, (new_sweep, quality)) = rayon::join(
        || {
            run_sweep("square", "old_edge_length", &cfg.old_edge_lengths, cfg.seed, |h| {
                let pair = level(h, cfg.fixed_edge_length)?;
                Ok(Some((values(&spatial_error(&pair.new, &f)), median_edge(&pair.old, Configuration::Initial))))
            })
        },
        || {
            rayon::join(
                || {
                    run_sweep("square", "new_edge_length", &cfg.new_edge_lengths, cfg.seed, |h| {
                        let pair = level(cfg.fixed_edge_length, h)?;
                        Ok(Some((values(&spatial_error(&pair.new, &f)), median_edge(&pair.new, Configuration::Current))))
                    })
                },
                || match level(cfg.quality_old_edge_length, cfg.quality_new_edge_length) {
                    Ok(pair) => Some(QualityStudy { pair }),
                    Err(err) => {
                        log::error!("square: aspect ratio study failed: {err}");
                        None
                    }
                },
            )
        },
    );
    SquareOutcome {
        old_sweep,
        new_sweep,
        quality,
    }
}

impl SquareOutcome {
    pub fn write(&self, dir: &Path) -> Result<()> {
        write_results(&self.old_sweep, &dir.join("square_old_sweep.csv"))?;
        write_results(&self.new_sweep, &dir.join("square_new_sweep.csv"))?;
        if let Some(q) = &self.quality {
            q.write(dir, "square")?;
        }
        Ok(())
    }
}

// -------------------------------------------------------------- cylinder

#[derive(Debug, Clone, PartialEq)]
pub struct CylinderConfig {
    pub old_edge_lengths: Vec<f64>,
    pub new_edge_lengths: Vec<f64>,
    pub fixed_edge_length: f64,
    pub iterations: usize,
    pub seed: u64,
    pub tolerance: f64,
}

impl Default for CylinderConfig {
    fn default() -> Self {
        CylinderConfig {
            old_edge_lengths: vec![0.4, 0.2, 0.1, 0.05],
            new_edge_lengths: vec![0.4, 0.2, 0.1, 0.05],
            fixed_edge_length: 0.1,
            iterations: 10,
            seed: 1,
            tolerance: DEFAULT_TOLERANCE,
        }
    }
}

impl CylinderConfig {
    pub const KEYS: &'static [&'static str] = &[
        "old_edge_lengths",
        "new_edge_lengths",
        "fixed_edge_length",
        "iterations",
        "seed",
        "tolerance",
    ];

    pub fn from_config(cfg: &ExperimentConfig) -> Result<Self> {
        cfg.check_keys(Self::KEYS)?;
        let d = Self::default();
        Ok(CylinderConfig {
            old_edge_lengths: sorted_levels(cfg.positive_list_or("old_edge_lengths", &d.old_edge_lengths)?),
            new_edge_lengths: sorted_levels(cfg.positive_list_or("new_edge_lengths", &d.new_edge_lengths)?),
            fixed_edge_length: cfg.positive_or("fixed_edge_length", d.fixed_edge_length)?,
            iterations: cfg.usize_or("iterations", d.iterations)?,
            seed: cfg.u64_or("seed", d.seed)?,
            tolerance: cfg.positive_or("tolerance", d.tolerance)?,
        })
    }
}

#[derive(Debug, Clone)]
pub struct CylinderOutcome {
    pub old_sweep: ExperimentResult,
    pub new_sweep: ExperimentResult,
}

impl CylinderOutcome {
    pub fn write(&self, dir: &Path) -> Result<()> {
        write_results(&self.old_sweep, &dir.join("cylinder_old_sweep.csv"))?;
        write_results(&self.new_sweep, &dir.join("cylinder_new_sweep.csv"))
    }
}

pub fn run_cylinder_spatial_experiment(cfg: &CylinderConfig) -> CylinderOutcome {
    run_cylinder_with(cfg, &AnalyticDeformation::CylinderSinusoidal)
}

/// Cylinder sweeps under an arbitrary deformation (the identity is a
/// useful sanity check).
pub fn run_cylinder_with(cfg: &CylinderConfig, d: &AnalyticDeformation) -> CylinderOutcome {
    let level = |old_h: f64, new_h: f64| cylinder_pair(old_h, new_h, d, cfg.iterations, cfg.tolerance);
    let (old_sweep, new_sweep) = rayon::join(
        || {
            run_sweep("cylinder", "old_edge_length", &cfg.old_edge_lengths, cfg.seed, |h| {
                let pair = level(h, cfg.fixed_edge_length)?;
                Ok(Some((values(&spatial_error(&pair.new, d)), median_edge(&pair.old, Configuration::Initial))))
            })
        },
        || {
            run_sweep("cylinder", "new_edge_length", &cfg.new_edge_lengths, cfg.seed, |h| {
                let pair = level(cfg.fixed_edge_length, h)?;
                Ok(Some((values(&spatial_error(&pair.new, d)), median_edge(&pair.new, Configuration::Current))))
            })
        },
    );
    CylinderOutcome { old_sweep, new_sweep }
}

// ---------------------------------------------------------------- strain

#[derive(Debug, Clone, PartialEq)]
pub struct StrainConfig {
    pub side: f64,
    pub edge_lengths: Vec<f64>,
    pub params: SkalakParams,
    pub seed: u64,
    pub tolerance: f64,
}

impl Default for StrainConfig {
    fn default() -> Self {
        StrainConfig {
            side: 3.0,
            edge_lengths: vec![0.5, 0.25, 0.1, 0.05],
            params: SkalakParams::default(),
            seed: 1,
            tolerance: DEFAULT_TOLERANCE,
        }
    }
}

impl StrainConfig {
    pub const KEYS: &'static [&'static str] =
        &["side", "edge_lengths", "kappa_s", "kappa_alpha", "seed", "tolerance"];

    pub fn from_config(cfg: &ExperimentConfig) -> Result<Self> {
        cfg.check_keys(Self::KEYS)?;
        let d = Self::default();
        Ok(StrainConfig {
            side: cfg.positive_or("side", d.side)?,
            edge_lengths: sorted_levels(cfg.positive_list_or("edge_lengths", &d.edge_lengths)?),
            params: SkalakParams::new(
                cfg.f64_or("kappa_s", d.params.kappa_s)?,
                cfg.f64_or("kappa_alpha", d.params.kappa_alpha)?,
            )?,
            seed: cfg.u64_or("seed", d.seed)?,
            tolerance: cfg.positive_or("tolerance", d.tolerance)?,
        })
    }
}

#[derive(Debug, Clone)]
pub struct StrainOutcome {
    /// Deformed meshes that were never remeshed.
    pub fixed: ExperimentResult,
    /// The same meshes remeshed once at the same edge length.
    pub remeshed: ExperimentResult,
}

impl StrainOutcome {
    pub fn write(&self, dir: &Path) -> Result<()> {
        write_results(&self.fixed, &dir.join("strain_fixed.csv"))?;
        write_results(&self.remeshed, &dir.join("strain_remeshed.csv"))
    }
}

pub fn run_strain_experiment(cfg: &StrainConfig) -> StrainOutcome {
    let f = AnalyticDeformation::SquareQuadratic;
    let (fixed, remeshed) = rayon::join(
        || {
            run_sweep("strain", "edge_length", &cfg.edge_lengths, cfg.seed, |h| {
                let m = deform(&square_mesh(cfg.side, h, cfg.seed)?, &f)?;
                let errors = strain_error(&m, &cfg.params, &f)?;
                Ok(Some((values(&errors.samples), median_edge(&m, Configuration::Initial))))
            })
        },
        || {
            run_sweep("strain", "edge_length", &cfg.edge_lengths, cfg.seed, |h| {
                let pair = square_pair(cfg.side, h, h, cfg.seed, cfg.tolerance)?;
                let errors = strain_error(&pair.new, &cfg.params, &f)?;
                Ok(Some((values(&errors.samples), median_edge(&pair.new, Configuration::Current))))
            })
        },
    );
    StrainOutcome { fixed, remeshed }
}

// ------------------------------------------------------------- frequency

#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyConfig {
    pub side: f64,
    pub edge_length: f64,
    pub t_end: f64,
    pub counts: Vec<usize>,
    pub params: SkalakParams,
    pub seed: u64,
    pub tolerance: f64,
}

impl Default for FrequencyConfig {
    fn default() -> Self {
        FrequencyConfig {
            side: 3.0,
            edge_length: 0.1,
            t_end: 60.0,
            counts: vec![0, 1, 2, 3, 5, 10, 20],
            params: SkalakParams::default(),
            seed: 1,
            tolerance: DEFAULT_TOLERANCE,
        }
    }
}

impl FrequencyConfig {
    pub const KEYS: &'static [&'static str] = &[
        "side",
        "edge_length",
        "t_end",
        "counts",
        "kappa_s",
        "kappa_alpha",
        "seed",
        "tolerance",
    ];

    pub fn from_config(cfg: &ExperimentConfig) -> Result<Self> {
        cfg.check_keys(Self::KEYS)?;
        let d = Self::default();
        let mut counts = cfg.count_list_or("counts", &d.counts)?;
        counts.sort_unstable();
        counts.dedup();
        Ok(FrequencyConfig {
            side: cfg.positive_or("side", d.side)?,
            edge_length: cfg.positive_or("edge_length", d.edge_length)?,
            t_end: cfg.positive_or("t_end", d.t_end)?,
            counts,
            params: SkalakParams::new(
                cfg.f64_or("kappa_s", d.params.kappa_s)?,
                cfg.f64_or("kappa_alpha", d.params.kappa_alpha)?,
            )?,
            seed: cfg.u64_or("seed", d.seed)?,
            tolerance: cfg.positive_or("tolerance", d.tolerance)?,
        })
    }
}

/// Places every node at `F(X₀, time)` of its stored initial position.
/// Between remeshing events the mesh follows the prescribed deformation;
/// after a transfer this re-synchronises the new nodes with their mapped
/// initial positions.
fn deform_at(mesh: &mut SurfaceMesh, time: f64, t_end: f64) -> Result<()> {
    let d = AnalyticDeformation::time_interpolated(time, t_end)?;
    let moved: Vec<Vec3> = mesh.nodes().iter().map(|n| d.evaluate(&n.initial)).collect();
    mesh.set_current_positions(&moved)
}

/// Final mesh after `n` remeshing events at `k·t_end/n`, `k = 1..=n`.
pub fn frequency_run(cfg: &FrequencyConfig, n: usize) -> Result<SurfaceMesh> {
    let mut mesh = square_mesh(cfg.side, cfg.edge_length, cfg.seed)?;
    if n == 0 {
        deform_at(&mut mesh, cfg.t_end, cfg.t_end)?;
        return Ok(mesh);
    }
    for k in 1..=n {
        let time = if k == n { cfg.t_end } else { cfg.t_end * k as f64 / n as f64 };
        deform_at(&mut mesh, time, cfg.t_end)?;
        let fresh = remesh_planar(&mesh, cfg.edge_length, cfg.seed.wrapping_add(k as u64))?;
        mesh = transfer_initial_configuration(&mesh, &fresh, cfg.tolerance)?.0;
    }
    Ok(mesh)
}

#[derive(Debug, Clone)]
pub struct FrequencyOutcome {
    pub spatial: ExperimentResult,
    pub strain: ExperimentResult,
}

impl FrequencyOutcome {
    pub fn write(&self, dir: &Path) -> Result<()> {
        write_results(&self.spatial, &dir.join("frequency_spatial.csv"))?;
        write_results(&self.strain, &dir.join("frequency_strain.csv"))
    }
}

pub fn run_frequency_experiment(cfg: &FrequencyConfig) -> FrequencyOutcome {
    let f = AnalyticDeformation::SquareQuadratic;
    let counts: Vec<f64> = cfg.counts.iter().map(|&n| n as f64).collect();
    let runs: Vec<(usize, Result<SurfaceMesh>)> =
        cfg.counts.par_iter().map(|&n| (n, frequency_run(cfg, n))).collect();
    let lookup = |level: f64| -> Result<&SurfaceMesh> {
        let (_, run) = runs.iter().find(|(n, _)| *n as f64 == level).expect("level comes from the same list");
        run.as_ref().map_err(|e| MeshError::Geometry(e.to_string()))
    };
    let spatial = run_sweep("frequency", "remesh_count", &counts, cfg.seed, |level| {
        if level == 0.0 {
            return Ok(None);
        }
        let mesh = lookup(level)?;
        Ok(Some((values(&spatial_error(mesh, &f)), median_edge(mesh, Configuration::Current))))
    });
    let strain = run_sweep("frequency", "remesh_count", &counts, cfg.seed, |level| {
        let mesh = lookup(level)?;
        let errors = strain_error(mesh, &cfg.params, &f)?;
        Ok(Some((values(&errors.samples), median_edge(mesh, Configuration::Current))))
    });
    FrequencyOutcome { spatial, strain }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn last_event_leaves_mesh_at_remeshed_positions() {
        let cfg = FrequencyConfig {
            edge_length: 0.5,
            ..FrequencyConfig::default()
        };
        let mesh = frequency_run(&cfg, 2).unwrap();
        // the final mesh is the fresh one, not pulled back onto F(X₀)
        let f = AnalyticDeformation::SquareQuadratic;
        let worst = spatial_error(&mesh, &f).iter().map(|s| s.value).fold(0.0, f64::max);
        // linear interpolation error of f on elements of size h is O(h²)
        assert!(worst > 0.0 && worst < 0.25 * cfg.edge_length.powi(2), "worst {worst}");
        assert!((mesh.total_area(Configuration::Current) - 81.0).abs() < 1e-9);
    }

    #[test]
    fn zero_events_is_the_fixed_mesh() {
        let cfg = FrequencyConfig {
            edge_length: 0.5,
            ..FrequencyConfig::default()
        };
        let mesh = frequency_run(&cfg, 0).unwrap();
        let f = AnalyticDeformation::SquareQuadratic;
        assert!(spatial_error(&mesh, &f).iter().all(|s| s.value < 1e-20));
    }

    #[test]
    fn identity_cylinder_has_no_error() {
        let cfg = CylinderConfig {
            old_edge_lengths: vec![0.4],
            new_edge_lengths: vec![0.4],
            fixed_edge_length: 0.3,
            ..CylinderConfig::default()
        };
        let out = run_cylinder_with(&cfg, &AnalyticDeformation::Identity);
        let median = out.old_sweep.levels[0].median().unwrap();
        assert!(median < 1e-16, "median {median}");
    }

    #[test]
    fn square_rows_follow_levels() {
        let cfg = SquareConfig {
            old_edge_lengths: vec![0.5, 0.4],
            new_edge_lengths: vec![0.5],
            fixed_edge_length: 0.4,
            ..SquareConfig::default()
        };
        let out = run_square_spatial_experiment(&cfg);
        assert_eq!(out.old_sweep.levels.len(), 2);
        assert_eq!(out.new_sweep.levels.len(), 1);
        assert!(out.old_sweep.levels.iter().all(|l| l.summary.is_some()));
        let q = out.quality.unwrap();
        assert!(q.to_csv().starts_with("mesh,element,aspect_ratio\nold_initial,0,"));
    }
}
