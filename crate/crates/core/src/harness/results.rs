use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{MeshError, Result};
use crate::stats::Summary;

pub const RESULTS_HEADER: &str = "level,median,q1,q3,min,max,n_samples,achieved_edge_length,seed";

/// Statistics for one sweep level. `summary` is `None` when the level has
/// no samples (failed, or undefined such as the spatial error of a mesh
/// that was never remeshed).
#[derive(Debug, Clone, PartialEq)]
pub struct LevelResult {
    pub level: f64,
    pub summary: Option<Summary>,
    pub achieved_edge_length: Option<f64>,
    pub seed: u64,
    pub error: Option<String>,
}

impl LevelResult {
    pub fn absent(level: f64, seed: u64) -> Self {
        LevelResult {
            level,
            summary: None,
            achieved_edge_length: None,
            seed,
            error: None,
        }
    }

    pub fn failed(level: f64, seed: u64, error: &MeshError) -> Self {
        LevelResult {
            error: Some(error.to_string()),
            ..Self::absent(level, seed)
        }
    }

    pub fn median(&self) -> Option<f64> {
        self.summary.as_ref().map(|s| s.median)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub name: String,
    /// What `level` measures, e.g. `old_edge_length`.
    pub sweep: String,
    pub levels: Vec<LevelResult>,
}

impl ExperimentResult {
    pub fn medians(&self) -> Vec<Option<f64>> {
        self.levels.iter().map(LevelResult::median).collect()
    }

    pub fn level(&self, level: f64) -> Option<&LevelResult> {
        self.levels.iter().find(|l| l.level == level)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(RESULTS_HEADER);
        out.push('\n');
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for l in &self.levels {
            let s = l.summary.as_ref();
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                l.level,
                opt(s.map(|s| s.median)),
                opt(s.map(|s| s.q1)),
                opt(s.map(|s| s.q3)),
                opt(s.map(|s| s.min)),
                opt(s.map(|s| s.max)),
                s.map_or(0, |s| s.count),
                opt(l.achieved_edge_length),
                l.seed
            );
        }
        out
    }
}

pub fn write_results(result: &ExperimentResult, path: &Path) -> Result<()> {
    write_text(path, &result.to_csv())
}

pub(crate) fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| MeshError::io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| MeshError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ExperimentResult {
        ExperimentResult {
            name: "demo".into(),
            sweep: "old_edge_length".into(),
            levels: vec![
                LevelResult {
                    level: 0.5,
                    summary: Summary::from_values(vec![1.0, 2.0, 3.0]),
                    achieved_edge_length: Some(0.49),
                    seed: 7,
                    error: None,
                },
                LevelResult::absent(0.0, 7),
            ],
        }
    }

    #[test]
    fn header_and_rows() {
        let csv = sample().to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some(RESULTS_HEADER));
        assert_eq!(lines.next(), Some("0.5,2,1.5,2.5,1,3,3,0.49,7"));
        assert_eq!(lines.next(), Some("0,,,,,,0,,7"));
        assert_eq!(lines.next(), None);
    }

    #[test]
    fn io_failure_names_the_path() {
        let dir = std::env::temp_dir().join(format!("histmesh-results-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        // a directory cannot be written as a file
        let err = write_results(&sample(), &dir).unwrap_err();
        assert!(err.to_string().contains(&dir.display().to_string()));
        assert_eq!(err.category(), "io");
        fs::remove_dir_all(&dir).unwrap();
    }
}
