use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported basis family `{0}` (expected laguerre, hermite or legendre)")]
    UnsupportedFamily(String),

    #[error("non-convergent element ({i}, {j}): {detail}")]
    NonConvergentElement { i: usize, j: usize, detail: String },

    #[error("eigensolver did not converge after {iterations} iterations")]
    NoConvergence { iterations: usize },

    #[error("function value at node {index} (λ = {node}) is not finite")]
    SingularNode { index: usize, node: f64 },

    #[error("weighting function vanishes at node {index} (λ = {node})")]
    ZeroWeightingAtNode { index: usize, node: f64 },

    #[error("node clearance {clearance:e} from singular point {point} does not exceed guard {guard:e}")]
    NodeTooCloseToSingularity { point: f64, clearance: f64, guard: f64 },

    #[error("trend classification needs at least {required} finite errors, got {finite}")]
    InsufficientData { finite: usize, required: usize },

    #[error("reference integral did not converge: {0}")]
    OracleNoConvergence(String),

    #[error("unknown function `{0}`")]
    UnknownFunction(String),

    #[error("cannot parse expression `{input}`: {message}")]
    Parse { input: String, message: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Whether the error comes from the numerics rather than from bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NonConvergentElement { .. }
                | Error::NoConvergence { .. }
                | Error::SingularNode { .. }
                | Error::ZeroWeightingAtNode { .. }
                | Error::NodeTooCloseToSingularity { .. }
                | Error::InsufficientData { .. }
                | Error::OracleNoConvergence(_)
        )
    }
}
