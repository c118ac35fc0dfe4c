use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("freestream speed v3inf = {0} is not supersonic (must exceed 1)")]
    NonSupersonic(f64),

    #[error(
        "wing half-angle {name} = {angle} must be below the critical angle sigma_inf = {critical} \
         (the shock would attach to the leading edges)"
    )]
    AngleTooLarge {
        name: &'static str,
        angle: f64,
        critical: f64,
    },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("boundary parameter t = {0} is outside [0, 1]")]
    BadParameter(f64),

    #[error("point ({}, {}) is off the {side} boundary by {distance:e}", point[0], point[1])]
    PointOffBoundary {
        side: &'static str,
        point: [f64; 2],
        distance: f64,
    },

    #[error("mesh is folded: Jacobian determinant {det:e} at node ({i}, {j})")]
    FoldedMesh { i: usize, j: usize, det: f64 },

    #[error("mesh needs at least 9 nodes per direction, got {n_u} x {n_v}")]
    MeshTooSmall { n_u: usize, n_v: usize },

    #[error("|eta|^2 = {0} does not exceed 1; the linear state would not be supersonic")]
    InadmissibleEta(f64),

    #[error("value at the degenerate level: {0}")]
    DegenerateValue(String),

    #[error("point is behind the apex in rotated coordinates (x3_hat = {0})")]
    BehindApex(f64),

    #[error("direction vector is not unit length (|kappa| = {0})")]
    NotUnit(f64),

    #[error("c^2 = {0} is not positive")]
    SubsonicState(f64),

    #[error("eta family has no {0}-solution after classification")]
    EmptyFamily(&'static str),

    #[error("frozen-coefficient iteration stalled at residual {0:e}")]
    LinearSolveFailure(f64),

    #[error(
        "singular Jacobian at elimination step {pivot_row}; smallest principal eigenvalue \
         {min_eigenvalue:e} at node {node}"
    )]
    SingularJacobian {
        pivot_row: usize,
        node: usize,
        min_eigenvalue: f64,
    },

    #[error("Newton iteration diverged at mu = {mu}, eps = {eps}: {reason}")]
    Diverged { mu: f64, eps: f64, reason: String },

    #[error("continuation stuck between mu = {from} and mu = {to} at eps = {eps}")]
    ContinuationStuck { from: f64, to: f64, eps: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("I/O failure on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("serialization failure: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
