use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("point is not interior to the domain: {0}")]
    NotInterior(String),
    #[error("frame undefined: gradient of the defining function vanishes at {0}")]
    DegenerateGradient(String),
    #[error("bisection failed to bracket a root: {0}")]
    Bracket(String),
    #[error("sampling failure: {0}")]
    Sampling(String),
    #[error("unsupported for this domain: {0}")]
    Unsupported(String),
    #[error("hypothesis unmet: {0}")]
    HypothesisUnmet(String),
    #[error("truncated kernel exceeded its convergence budget (tail {tail:.3e}, sum {sum:.3e})")]
    TruncationBudget { tail: f64, sum: f64 },
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
