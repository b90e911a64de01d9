use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("pattern is not connected")]
    NotConnected,

    #[error("pattern is not regular: vertex {vertex} has degree {degree}, expected {expected}")]
    NotRegular {
        vertex: usize,
        degree: usize,
        expected: usize,
    },

    #[error("pattern has {0} vertices, at least 3 required")]
    TooSmall(usize),

    #[error("pattern has {q} vertices, above the enumeration budget of {max}")]
    PatternTooLarge { q: usize, max: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("enumeration budget of {0} partial assignments exceeded")]
    BudgetExceeded(u64),

    #[error("edge ({0}, {1}) is not present")]
    EdgeAbsent(usize, usize),

    #[error("exact enumeration needs n <= {max}, got n = {n}")]
    TooLarge { n: usize, max: usize },

    #[error("graph is not spanned: {0}")]
    NotSpanned(String),

    #[error("graph holds {available} copies, {requested} requested")]
    NotEnoughCopies { available: usize, requested: usize },

    #[error("vertex pool of {pool} cannot host a pattern on {q} vertices")]
    PoolTooSmall { pool: usize, q: usize },

    #[error("planted graph has isolated vertex {0}")]
    IsolatedVertex(usize),

    #[error("clique of size {s} does not fit in {n} vertices")]
    TooFewVertices { s: usize, n: usize },

    #[error("block size {m} is smaller than the pattern size {q}")]
    BlockTooSmall { m: usize, q: usize },

    #[error("peeling contract violated: {0}")]
    ContractViolated(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Stable snake_case name of the variant, for machine-readable reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::NotConnected => "not_connected",
            Error::NotRegular { .. } => "not_regular",
            Error::TooSmall(_) => "too_small",
            Error::PatternTooLarge { .. } => "pattern_too_large",
            Error::Domain(_) => "domain",
            Error::Parse { .. } => "parse",
            Error::BudgetExceeded(_) => "budget_exceeded",
            Error::EdgeAbsent(..) => "edge_absent",
            Error::TooLarge { .. } => "too_large",
            Error::NotSpanned(_) => "not_spanned",
            Error::NotEnoughCopies { .. } => "not_enough_copies",
            Error::PoolTooSmall { .. } => "pool_too_small",
            Error::IsolatedVertex(_) => "isolated_vertex",
            Error::TooFewVertices { .. } => "too_few_vertices",
            Error::BlockTooSmall { .. } => "block_too_small",
            Error::ContractViolated(_) => "contract_violated",
        }
    }
}
