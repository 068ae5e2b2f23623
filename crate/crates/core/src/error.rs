use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = MeshError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("triangle {triangle} references node {node}, but the mesh has {node_count} nodes")]
    IndexOutOfRange {
        triangle: usize,
        node: usize,
        node_count: usize,
    },

    #[error("triangle {triangle} repeats a vertex")]
    RepeatedVertex { triangle: usize },

    #[error("triangle {triangle} duplicates triangle {original}")]
    DuplicateTriangle { triangle: usize, original: usize },

    #[error("element {element} is degenerate")]
    Degenerate { element: usize },

    #[error("singular {0}")]
    Singular(&'static str),

    #[error("edge ({a}, {b}) is shared by more than two triangles")]
    NonManifoldEdge { a: usize, b: usize },

    #[error("triangles sharing edge ({a}, {b}) are wound inconsistently")]
    InconsistentWinding { a: usize, b: usize },

    #[error("node {node} has a non-finite or out-of-plane position")]
    InvalidPosition { node: usize },

    #[error("mesh has no triangles")]
    Empty,

    #[error("edge {edge} is a boundary edge")]
    BoundaryEdge { edge: usize },

    #[error("normals of the elements sharing edge {edge} cancel")]
    FoldBack { edge: usize },

    #[error("search failed for point ({x}, {y}, {z}): {source}")]
    Search {
        x: f64,
        y: f64,
        z: f64,
        #[source]
        source: Box<MeshError>,
    },

    #[error("node {node} could not be mapped: {source}")]
    Transfer {
        node: usize,
        #[source]
        source: Box<MeshError>,
    },

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("simulation diverged at t = {time} (node {node})")]
    Diverged { time: f64, node: usize },

    #[error("connectivity of the two configurations differs: {0}")]
    ConnectivityMismatch(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl MeshError {
    /// Short machine-readable category, used by the CLI exit line.
    pub fn category(&self) -> &'static str {
        match self {
            MeshError::IndexOutOfRange { .. }
            | MeshError::RepeatedVertex { .. }
            | MeshError::DuplicateTriangle { .. }
            | MeshError::NonManifoldEdge { .. }
            | MeshError::InconsistentWinding { .. }
            | MeshError::InvalidPosition { .. }
            | MeshError::Empty
            | MeshError::ConnectivityMismatch(_) => "mesh",
            MeshError::Degenerate { .. } | MeshError::Singular(_) | MeshError::FoldBack { .. } => "degenerate",
            MeshError::BoundaryEdge { .. } | MeshError::Geometry(_) => "geometry",
            MeshError::Search { .. } => "search",
            MeshError::Transfer { .. } => "transfer",
            MeshError::Config(_) => "config",
            MeshError::Argument(_) => "argument",
            MeshError::Diverged { .. } => "diverged",
            MeshError::Parse { .. } => "parse",
            MeshError::Io { .. } => "io",
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        MeshError::Io {
            path: path.into(),
            source,
        }
    }
}
