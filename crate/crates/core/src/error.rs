use thiserror::Error;

/// Errors raised by grid construction, field algebra and the solvers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("region {region} is not contained in the disk of radius {radius}")]
    RegionOutsideDisk { region: String, radius: f64 },

    #[error("invalid region: {0}")]
    InvalidRegion(String),

    #[error("cutoff parameter n = {n} is below the admissibility threshold {threshold} for the {kind} family")]
    CutoffInadmissible {
        kind: &'static str,
        n: f64,
        threshold: f64,
    },

    #[error("grid radius {grid_radius} is smaller than the cutoff support radius {support}")]
    GridTooSmall { grid_radius: f64, support: f64 },

    #[error("input field is not solenoidal: path dependence {discrepancy:.3e} exceeds tolerance {tolerance:.3e}")]
    NotSolenoidal { discrepancy: f64, tolerance: f64 },

    #[error(
        "zero-mean gate failed: component {component} integrates to {integral:.3e} (tolerance {tolerance:.3e}); \
         a forcing with nonzero net force has no finite-energy planar Stokes lift"
    )]
    ZeroMeanGate {
        component: usize,
        integral: f64,
        tolerance: f64,
    },

    #[error("source support (radius {support}) exceeds the grid disk (radius {radius})")]
    SourceOutsideGrid { support: f64, radius: f64 },

    #[error("unknown source shape `{0}`")]
    UnknownShape(String),

    #[error("source kind {kind} cannot be used for {operation}")]
    WrongSourceKind {
        kind: &'static str,
        operation: &'static str,
    },

    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),

    #[error("linear solver did not converge: relative residual {residual:.3e} after {iterations} iterations")]
    LinearSolver { residual: f64, iterations: usize },

    #[error("eigensolver did not converge after {iterations} Lanczos steps (residual {residual:.3e})")]
    EigenNonConvergence { iterations: usize, residual: f64 },

    #[error("Picard iteration stalled at lambda = {lambda}: residual {residual:.3e} after {iterations} iterations")]
    PicardNonConvergence {
        lambda: f64,
        residual: f64,
        iterations: usize,
    },

    #[error("uniqueness hypotheses violated: anchor means differ by {gap:.3e} (tolerance {tolerance:.3e})")]
    MeanGap { gap: f64, tolerance: f64 },

    #[error("monitor radius {monitor} exceeds disk radius {radius}")]
    MonitorTooLarge { monitor: f64, radius: f64 },

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit status for the command-line front end: 2 for invalid input
    /// or violated hypotheses, 3 for solver non-convergence, 4 for a failed
    /// invariant.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::LinearSolver { .. } | Error::EigenNonConvergence { .. } | Error::PicardNonConvergence { .. } => 3,
            Error::Invariant(_) => 4,
            _ => 2,
        }
    }

    /// Stable kebab-case tag used in error records.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidGrid(_) => "invalid-grid",
            Error::GridMismatch => "grid-mismatch",
            Error::RegionOutsideDisk { .. } => "region-outside-disk",
            Error::InvalidRegion(_) => "invalid-region",
            Error::CutoffInadmissible { .. } => "cutoff-inadmissible",
            Error::GridTooSmall { .. } => "grid-too-small",
            Error::NotSolenoidal { .. } => "not-solenoidal",
            Error::ZeroMeanGate { .. } => "zero-mean-gate",
            Error::SourceOutsideGrid { .. } => "source-outside-grid",
            Error::UnknownShape(_) => "unknown-shape",
            Error::WrongSourceKind { .. } => "wrong-source-kind",
            Error::InvalidConfig(_) => "invalid-config",
            Error::LinearSolver { .. } => "linear-solver",
            Error::EigenNonConvergence { .. } => "eigen-non-convergence",
            Error::PicardNonConvergence { .. } => "picard-non-convergence",
            Error::MeanGap { .. } => "mean-gap",
            Error::MonitorTooLarge { .. } => "monitor-too-large",
            Error::Invariant(_) => "invariant",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
