use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("P(D+) is zero, the attributable fraction is undefined")]
    DegenerateDisease,

    #[error("chain contains no draws")]
    EmptyChain,

    #[error("truncation interval [{lo}, {hi}] carries no prior mass")]
    DegenerateInterval { lo: f64, hi: f64 },

    #[error("covariance matrix is not positive semi-definite")]
    NotPsd,

    #[error("constraint rejection loop exceeded {cap} consecutive rejections")]
    RejectionStall { cap: u64 },

    #[error("Se + Sp = 1, the misclassification map is singular")]
    SingularTest,

    #[error("reconstructed cell probabilities fall outside [0, 1]")]
    OutsideA,

    #[error("parameter vector is outside the support of the posterior")]
    OutOfSupport,

    #[error("gradient evaluated to a non-finite value")]
    NonFiniteGradient,

    #[error("series has zero variance")]
    ZeroVariance,

    #[error("all importance weights are zero")]
    AllZeroWeights,

    #[error("sampler could not be tuned: {0}")]
    Untunable(String),
}
