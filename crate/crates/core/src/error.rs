use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension n = {0} outside the supported range 3..=7")]
    Dimension(usize),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("grid too coarse: {needed} nodes needed, {got} available")]
    GridTooCoarse { needed: usize, got: usize },
    #[error("grid mismatch between operands")]
    GridMismatch,
    #[error("profile is not positive at t = {t}")]
    NonPositiveProfile { t: f64 },
    #[error("conformal factor is not positive at t = {t}")]
    NonPositiveFactor { t: f64 },
    #[error("grid extends past the horizon: t_max = {t_max} >= t_horizon = {t_horizon}")]
    PastHorizon { t_max: f64, t_horizon: f64 },
    #[error("coordinate integration did not converge: {0}")]
    Integration(String),
    #[error("bump support [{lo}, {hi}] is not strictly inside the grid")]
    SupportOutsideGrid { lo: f64, hi: f64 },
    #[error("extrapolation requested at t = {t}")]
    Extrapolation { t: f64 },
    #[error("fit unstable: full window {full}, half window {half}, drift {drift}")]
    FitUnstable { full: f64, half: f64, drift: f64 },
    #[error("fit window has {got} nodes, at least {needed} required")]
    FitWindow { needed: usize, got: usize },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("Newton iteration diverged after {iterations} iterations (last residual {residual:e})")]
    NewtonDivergence { iterations: usize, residual: f64 },
    #[error("hypothesis violated: R + n(n-1) = {excess:e} at t = {t}")]
    Hypothesis { t: f64, excess: f64 },
    #[error("positivity lost: 1 + v <= 0 at t = {t}")]
    PositivityLoss { t: f64 },
    #[error("singular linear system")]
    Singular,
    #[error("asymptotic mismatch: p sinh^2(t) - 1 = {deviation:e} at the boundary")]
    AsymptoticMismatch { deviation: f64 },
    #[error("invalid cutoff: {0}")]
    InvalidCutoff(String),
    #[error("invalid parameter value: {0}")]
    InvalidParameter(String),
    #[error("window rejected: {0}")]
    Window(String),
    #[error("config: {0}")]
    Config(String),
    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Config(e.to_string())
    }
}
