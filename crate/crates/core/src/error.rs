use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("invalid coefficient: {0}")]
    InvalidCoefficient(String),

    #[error("integration step {step} too large (bound {bound})")]
    StepTooLarge { step: f64, bound: f64 },

    #[error("point (t={t}, x={x}) is not in the boundary-determined region J")]
    NotInJ { t: f64, x: f64 },

    #[error("boundary/initial data incompatible at the inflow corner: gap {gap:e} > {tol:e}")]
    CompatibilityViolation { gap: f64, tol: f64 },

    #[error("invalid feedback parameters: {0}")]
    InvalidFeedback(String),

    #[error("characteristic speeds not finite on the working box at (u={u}, v={v})")]
    BoxEvaluationFailure { u: f64, v: f64 },

    #[error("Picard iteration did not converge in {max_iter} iterations (last residual {last_residual:e})")]
    NoConvergence { max_iter: usize, last_residual: f64 },

    #[error("characteristic speed lost its sign at (t={t}, x={x}): {speed}")]
    CoefficientSignLoss { t: f64, x: f64, speed: f64 },

    #[error("iterate left the working box: |{which}| = {value} > {bound}")]
    WorkingBoxExit {
        which: &'static str,
        value: f64,
        bound: f64,
    },

    #[error("non-positive water depth {0}")]
    NonpositiveDepth(f64),

    #[error("depth collapse: sqrt(H*) + (u - v)/(4 sqrt(g)) = {0} <= 0")]
    DepthCollapse(f64),

    #[error("flow is not subcritical: {0}")]
    NotSubcritical(String),

    #[error("root solve failed: {0}")]
    NewtonFailure(String),

    #[error("missing upstream trace for edge {0}")]
    MissingTrace(usize),

    #[error("invalid tree: {}", .0.join("; "))]
    InvalidTree(Vec<String>),

    #[error("flow conservation residual {residual:e} at node {node} exceeds {tol:e}")]
    CouplingResidualExceeded { node: usize, residual: f64, tol: f64 },

    #[error("CFL number {cfl} exceeds {limit}")]
    CflViolation { cfl: f64, limit: f64 },

    #[error("upwind state left the admissible box: {0}")]
    BoxExit(f64),

    #[error("edge {edge}: {source}")]
    Edge {
        edge: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn on_edge(self, edge: usize) -> Self {
        match self {
            e @ Error::Edge { .. } => e,
            other => Error::Edge {
                edge,
                source: Box::new(other),
            },
        }
    }

    /// Strips any edge tags and returns the underlying error.
    pub fn root_cause(&self) -> &Error {
        match self {
            Error::Edge { source, .. } => source.root_cause(),
            other => other,
        }
    }
}
