use thiserror::Error;

pub type Result<T> = std::result::Result<T, DamsError>;

#[derive(Debug, Error)]
pub enum DamsError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("unknown state label {0}")]
    UnknownLabel(String),

    #[error("singular linear system ({context}); pivot ratio {pivot_ratio:.3e}")]
    Singular { context: String, pivot_ratio: f64 },

    #[error("no steady state found: {0}")]
    NoSteadyState(String),

    #[error("harmonic truncation did not converge up to K = {k_max} (last change {last_change:.3e})")]
    Convergence { k_max: usize, last_change: f64 },

    #[error("integration failed: {0}")]
    Integration(String),

    #[error("at detuning {delta}: {source}")]
    AtDetuning {
        delta: f64,
        #[source]
        source: Box<DamsError>,
    },

    #[error("config error at '{key}': {message}")]
    Config { key: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl DamsError {
    pub fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        DamsError::Config { key: key.into(), message: message.into() }
    }

    /// True for errors raised by the numerical solvers (as opposed to
    /// configuration or I/O problems).
    pub fn is_solver_error(&self) -> bool {
        match self {
            DamsError::Singular { .. }
            | DamsError::NoSteadyState(_)
            | DamsError::Convergence { .. }
            | DamsError::Integration(_) => true,
            DamsError::AtDetuning { source, .. } => source.is_solver_error(),
            _ => false,
        }
    }
}
