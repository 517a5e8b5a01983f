use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is singular within tolerance")]
    SingularInput,
    #[error("operator is not N-type")]
    NotNType,
    #[error("operator is not B-type")]
    NotBType,
    #[error("state of {qubits} qubits exceeds the amplitude budget of {budget}")]
    TooManyQubits { qubits: usize, budget: usize },
    #[error("forced outcome {outcome} on site {site} has probability {prob:e}")]
    ZeroProbabilityBranch { site: usize, outcome: u8, prob: f64 },
    #[error("site {0} was already measured")]
    AlreadyMeasured(usize),
    #[error("site {site} out of range for {n} sites")]
    SiteOutOfRange { site: usize, n: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("transfer-matrix normalisation underflowed")]
    IllConditioned,
    #[error("only {0} usable points for the decay fit")]
    InsufficientDecay(usize),
    #[error("chain exhausted after {sites_used} sites")]
    ChainExhausted { sites_used: usize },
    #[error("enumeration budget {0} exceeds the limit of 40")]
    BudgetTooLarge(usize),
    #[error("p_n(1-) = {p_max} is below the target {target}")]
    NoCrossing { p_max: f64, target: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
