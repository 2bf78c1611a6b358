use thiserror::Error;

/// Errors raised across graph construction, solvers, simulation, and I/O.
#[derive(Debug, Error)]
pub enum Error {
    #[error("edge ({u},{v}) is invalid for a simple graph on {n} vertices: {reason}")]
    InvalidEdge {
        u: usize,
        v: usize,
        n: usize,
        reason: &'static str,
    },

    #[error("orientation does not cover edge ({u},{v})")]
    OrientationMissingEdge { u: usize, v: usize },

    #[error("matrix entry ({row},{col}) out of bounds for {rows}x{cols}")]
    EntryOutOfBounds {
        row: usize,
        col: usize,
        rows: usize,
        cols: usize,
    },

    #[error("duplicate matrix entry at ({row},{col})")]
    DuplicateEntry { row: usize, col: usize },

    #[error("track {id}: {reason}")]
    InvalidTrack { id: u64, reason: String },

    #[error("eigensolver did not converge after {iterations} iterations (best residual {best_residual:e}, tol {tol:e})")]
    EigenNoConvergence {
        iterations: usize,
        best_residual: f64,
        tol: f64,
    },

    #[error("matrix is not symmetric (max asymmetry {max_asymmetry:e})")]
    NotSymmetric { max_asymmetry: f64 },

    #[error("requested {k} eigenpairs from a {n}x{n} matrix")]
    TooManyEigenpairs { k: usize, n: usize },

    #[error("spectral detection threshold must be nonpositive, got {c}")]
    PositiveThreshold { c: f64 },

    #[error("modularity matrix undefined: graph has no edges")]
    NoEdges,

    #[error("linear solver did not converge after {iterations} iterations (residual {residual:e}, tol {tol:e})")]
    SolverNoConvergence {
        iterations: usize,
        residual: f64,
        tol: f64,
    },

    #[error("cue references vertex {vertex} but the track graph has {n} vertices")]
    UnknownVertex { vertex: usize, n: usize },

    #[error("cue at vertex {vertex}: {reason}")]
    InvalidCue { vertex: usize, reason: String },

    #[error("no cue supplied: threat propagation needs at least one boundary observation")]
    NoCue,

    #[error("null weight for vertex {vertex} must be positive, got {weight}")]
    NonPositiveNullWeight { vertex: usize, weight: f64 },

    #[error("blockmodel parameter {name}: {reason}")]
    InvalidParams { name: &'static str, reason: String },

    #[error("labels contain a single class after exclusion; ROC undefined")]
    SingleClassLabels,

    #[error("no foreground node with an incident track is available to cue")]
    NoEligibleForeground,

    #[error("{aborted} of {total} Monte-Carlo trials aborted (limit 10%); first error: {first}")]
    TooManyAbortedTrials {
        aborted: usize,
        total: usize,
        first: String,
    },

    #[error("config key `{key}`: {reason}")]
    Config { key: String, reason: String },

    #[error("{path}:{line}: {reason}")]
    ParseFile {
        path: String,
        line: usize,
        reason: String,
    },

    #[error("empty track list")]
    EmptyTrackList,

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
