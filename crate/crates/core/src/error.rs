use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An input lies outside the domain where the operation is defined.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("cannot parse map specification: unexpected token `{token}`")]
    Parse { token: String },

    #[error("non-finite integrand value {value} at node ({x}, {y})")]
    Evaluation { x: f64, y: f64, value: f64 },

    /// Successive quadrature levels grow by more than 1%; the Jacobian power
    /// is probably not integrable. Carries the per-level values.
    #[error("integrability warning: refinement does not converge (levels: {levels:?}); try a smaller exponent")]
    Integrability { levels: Vec<f64> },

    #[error("resolution error: {0}")]
    Resolution(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("descent stagnated after 50 backtracking halvings; best quotient {best}")]
    Stagnation { best: f64 },

    #[error("solver did not converge: {0}")]
    NonConvergence(String),

    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// True for failures of a numerical process (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Integrability { .. }
                | Error::Stagnation { .. }
                | Error::NonConvergence(_)
                | Error::Evaluation { .. }
                | Error::Internal(_)
        )
    }
}
