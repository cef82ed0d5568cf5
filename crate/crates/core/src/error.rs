use thiserror::Error;

/// Errors raised by the simulation and analysis routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("degenerate vector with norm {0:e}")]
    DegenerateVector(f64),

    #[error("sample {node} is not on the unit sphere (|u| = {norm})")]
    NotUnitNorm { node: usize, norm: f64 },

    #[error("blow-up at t = {t}: |u| = {norm} at node {node} before projection; reduce dt")]
    BlowUp { t: f64, node: usize, norm: f64 },

    #[error("field leaves the mobile-frame chart at node {node} (<v, M0> = {value:e})")]
    OutOfChart { node: usize, value: f64 },

    #[error("chart degeneracy at node {node}: |r|^2 = {r2}")]
    ChartDegenerate { node: usize, r2: f64 },

    #[error("out of regime: {0}")]
    OutOfRegime(String),

    #[error("coordinate extraction did not converge after {iters} Newton iterations (residual {residual:e})")]
    ChartFailure { iters: usize, residual: f64 },

    #[error("no domain wall found: u1 never changes sign from - to +")]
    NoWall,

    #[error("expected a single domain wall, found {0} sign changes of u1")]
    MultiWall(usize),

    #[error("invalid control schedule: {0}")]
    InvalidSchedule(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("decay fit: {0}")]
    DecayFit(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("malformed CSV at line {line}: {msg}")]
    Csv { line: usize, msg: String },

    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn at_stage(self, stage: &'static str) -> Error {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
