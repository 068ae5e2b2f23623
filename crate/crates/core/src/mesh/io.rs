//! OFF and OBJ readers/writers. A mesh with history is stored as two files
//! (initial, current) with identical connectivity.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::{Configuration, DimensionMode, SurfaceMesh};
use crate::error::{MeshError, Result};
use crate::geometry::Vec3;

#[derive(Debug, Clone, PartialEq)]
pub struct RawMesh {
    pub positions: Vec<Vec3>,
    pub triangles: Vec<[usize; 3]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshFormat {
    Off,
    Obj,
}

impl MeshFormat {
    pub fn from_path(path: &Path) -> Result<Self> {
        match path
            .extension()
            .and_then(|e| e.to_str())
            .map(str::to_ascii_lowercase)
            .as_deref()
        {
            Some("off") => Ok(MeshFormat::Off),
            Some("obj") => Ok(MeshFormat::Obj),
            _ => Err(MeshError::Argument(format!(
                "{}: expected a .off or .obj extension",
                path.display()
            ))),
        }
    }
}

fn parse_err(path: &str, line: usize, message: impl Into<String>) -> MeshError {
    MeshError::Parse {
        path: path.to_string(),
        line,
        message: message.into(),
    }
}

fn parse_f64(tok: Option<&str>, path: &str, line: usize) -> Result<f64> {
    tok.ok_or_else(|| parse_err(path, line, "missing coordinate"))?
        .parse::<f64>()
        .map_err(|e| parse_err(path, line, e.to_string()))
}

/// Parses OFF text. `label` names the source in error messages.
pub fn parse_off(text: &str, label: &str) -> Result<RawMesh> {
    // (line number, content) with comments and blank lines dropped
    let mut lines = text.lines().enumerate().filter_map(|(i, l)| {
        let content = l.split('#').next().unwrap_or("").trim();
        (!content.is_empty()).then_some((i + 1, content))
    });

    let (ln, header) = lines.next().ok_or_else(|| parse_err(label, 1, "empty file"))?;
    if !header.starts_with("OFF") {
        return Err(parse_err(label, ln, "missing OFF header"));
    }
    let rest = header[3..].trim();
    let (ln, counts) = if rest.is_empty() {
        lines
            .next()
            .ok_or_else(|| parse_err(label, ln, "missing counts line"))?
    } else {
        (ln, rest)
    };
    let counts: Vec<usize> = counts
        .split_whitespace()
        .map(|t| t.parse::<usize>().map_err(|e| parse_err(label, ln, e.to_string())))
        .collect::<Result<_>>()?;
    if counts.len() < 2 {
        return Err(parse_err(label, ln, "counts line needs vertex and face counts"));
    }
    let (nv, nf) = (counts[0], counts[1]);

    let mut positions = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (ln, l) = lines
            .next()
            .ok_or_else(|| parse_err(label, ln, "unexpected end of vertex list"))?;
        let mut toks = l.split_whitespace();
        let x = parse_f64(toks.next(), label, ln)?;
        let y = parse_f64(toks.next(), label, ln)?;
        let z = parse_f64(toks.next(), label, ln)?;
        positions.push(Vec3::new(x, y, z));
    }

    let mut triangles = Vec::with_capacity(nf);
    for _ in 0..nf {
        let (ln, l) = lines
            .next()
            .ok_or_else(|| parse_err(label, ln, "unexpected end of face list"))?;
        let idx: Vec<usize> = l
            .split_whitespace()
            .map(|t| t.parse::<usize>().map_err(|e| parse_err(label, ln, e.to_string())))
            .collect::<Result<_>>()?;
        if idx.first() != Some(&3) || idx.len() < 4 {
            return Err(parse_err(label, ln, "only triangular faces (\"3 i j k\") are supported"));
        }
        triangles.push([idx[1], idx[2], idx[3]]);
    }
    Ok(RawMesh {
        positions,
        triangles,
    })
}

pub fn parse_obj(text: &str, label: &str) -> Result<RawMesh> {
    let mut positions = Vec::new();
    let mut triangles = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let ln = i + 1;
        let mut toks = line.split_whitespace();
        match toks.next() {
            Some("v") => {
                let x = parse_f64(toks.next(), label, ln)?;
                let y = parse_f64(toks.next(), label, ln)?;
                let z = parse_f64(toks.next(), label, ln)?;
                positions.push(Vec3::new(x, y, z));
            }
            Some("f") => {
                let idx: Vec<usize> = toks
                    .map(|t| {
                        let first = t.split('/').next().unwrap_or(t);
                        let raw: i64 = first
                            .parse()
                            .map_err(|e: std::num::ParseIntError| parse_err(label, ln, e.to_string()))?;
                        let resolved = if raw < 0 {
                            positions.len() as i64 + raw
                        } else {
                            raw - 1
                        };
                        usize::try_from(resolved)
                            .map_err(|_| parse_err(label, ln, format!("invalid face index {raw}")))
                    })
                    .collect::<Result<_>>()?;
                if idx.len() != 3 {
                    return Err(parse_err(label, ln, "only triangular faces are supported"));
                }
                triangles.push([idx[0], idx[1], idx[2]]);
            }
            _ => {}
        }
    }
    Ok(RawMesh {
        positions,
        triangles,
    })
}

pub fn format_off(positions: &[Vec3], triangles: &[[usize; 3]]) -> String {
    let mut out = String::with_capacity(32 * (positions.len() + triangles.len()) + 16);
    out.push_str("OFF\n");
    let _ = writeln!(out, "{} {} 0", positions.len(), triangles.len());
    for p in positions {
        // `{}` on f64 prints the shortest string that round-trips exactly.
        let _ = writeln!(out, "{} {} {}", p.x, p.y, p.z);
    }
    for t in triangles {
        let _ = writeln!(out, "3 {} {} {}", t[0], t[1], t[2]);
    }
    out
}

pub fn format_obj(positions: &[Vec3], triangles: &[[usize; 3]]) -> String {
    let mut out = String::new();
    for p in positions {
        let _ = writeln!(out, "v {} {} {}", p.x, p.y, p.z);
    }
    for t in triangles {
        let _ = writeln!(out, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1);
    }
    out
}

pub fn write_off(path: &Path, positions: &[Vec3], triangles: &[[usize; 3]]) -> Result<()> {
    fs::write(path, format_off(positions, triangles)).map_err(|e| MeshError::io(path, e))
}

pub fn write_obj(path: &Path, positions: &[Vec3], triangles: &[[usize; 3]]) -> Result<()> {
    fs::write(path, format_obj(positions, triangles)).map_err(|e| MeshError::io(path, e))
}

/// Writes one configuration of a mesh, format chosen by extension.
pub fn write_mesh(path: &Path, mesh: &SurfaceMesh, config: Configuration) -> Result<()> {
    let positions = mesh.positions(config);
    let triangles = mesh.triangles();
    match MeshFormat::from_path(path)? {
        MeshFormat::Off => write_off(path, &positions, &triangles),
        MeshFormat::Obj => write_obj(path, &positions, &triangles),
    }
}

pub fn read_mesh(path: &Path) -> Result<RawMesh> {
    let format = MeshFormat::from_path(path)?;
    let text = fs::read_to_string(path).map_err(|e| MeshError::io(path, e))?;
    let label = path.display().to_string();
    match format {
        MeshFormat::Off => parse_off(&text, &label),
        MeshFormat::Obj => parse_obj(&text, &label),
    }
}

/// Loads an (initial, current) pair. Connectivity must match exactly; the
/// dimension mode is detected unless given.
pub fn read_history_pair(
    initial: &Path,
    current: &Path,
    mode: Option<DimensionMode>,
) -> Result<SurfaceMesh> {
    let a = read_mesh(initial)?;
    let b = read_mesh(current)?;
    history_from_raw(a, b, mode)
}

pub(crate) fn history_from_raw(
    initial: RawMesh,
    current: RawMesh,
    mode: Option<DimensionMode>,
) -> Result<SurfaceMesh> {
    if initial.positions.len() != current.positions.len() {
        return Err(MeshError::ConnectivityMismatch(format!(
            "{} vs {} vertices",
            initial.positions.len(),
            current.positions.len()
        )));
    }
    if initial.triangles != current.triangles {
        let first = initial
            .triangles
            .iter()
            .zip(&current.triangles)
            .position(|(x, y)| x != y)
            .unwrap_or(initial.triangles.len().min(current.triangles.len()));
        return Err(MeshError::ConnectivityMismatch(format!(
            "face lists differ at face {first}"
        )));
    }
    let mode = mode.unwrap_or_else(|| {
        match (
            DimensionMode::detect(&initial.positions),
            DimensionMode::detect(&current.positions),
        ) {
            (DimensionMode::Planar, DimensionMode::Planar) => DimensionMode::Planar,
            _ => DimensionMode::Surface,
        }
    });
    SurfaceMesh::with_history(initial.positions, current.positions, initial.triangles, mode)
}
