//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Gas parameters violate a model invariant (c0 > 0, rho0 > 0, ...).
    #[error("invalid gas model: {0}")]
    InvalidGas(String),

    /// A thermodynamic state is not physical (rho <= 0, c^2 <= 0, ...).
    /// Carries the grid node when the state belongs to a field.
    #[error("invalid state{}: {message}", fmt_node(.node))]
    InvalidState {
        message: String,
        node: Option<[usize; 2]>,
    },

    /// An operation's documented precondition does not hold for the data.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Initial condition incompatible with the requested solution branch.
    #[error("inconsistent initial condition: {0}")]
    InconsistentIc(String),

    /// The solver ran into a persistently degenerate state.
    #[error("degenerate state: {0}")]
    Degenerate(String),

    /// Malformed argument (grid sizes, intervals, option values).
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Malformed file content (CSV/JSON field or config data).
    #[error("format error: {0}")]
    Format(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn state(message: impl Into<String>) -> Self {
        Error::InvalidState {
            message: message.into(),
            node: None,
        }
    }

    pub fn state_at(message: impl Into<String>, node: [usize; 2]) -> Self {
        Error::InvalidState {
            message: message.into(),
            node: Some(node),
        }
    }
}

fn fmt_node(node: &Option<[usize; 2]>) -> String {
    match node {
        Some([i, j]) => format!(" at node ({i}, {j})"),
        None => String::new(),
    }
}
