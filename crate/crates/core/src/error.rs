use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("point {point:?} lies outside the domain")]
    DomainViolation { point: [f64; 3] },

    #[error("point is equidistant from both walls (wall-normal coordinate {0}); stay inside one collar")]
    AmbiguousWall(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unsupported combination: {0}")]
    Unsupported(String),

    #[error("invalid profile: {0}")]
    InvalidProfile(String),

    #[error("step-size error: {0}")]
    StepSize(String),

    #[error("local bound blows up: alpha*c0*H^alpha*t reaches 1 at t = {critical_time}")]
    BlowUpHorizon { critical_time: f64 },

    #[error("linear solve did not converge (residual {residual:e})")]
    Solver { residual: f64 },

    #[error("time stamps do not align: {0}")]
    Alignment(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("study failed: {0}")]
    StudyFailure(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Configuration-class errors map to exit code 2 in the CLI.
    pub fn is_config(&self) -> bool {
        matches!(self, Error::Config(_) | Error::InvalidParameter(_) | Error::InvalidProfile(_))
    }
}
