use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("index error: {0}")]
    Index(String),

    #[error("dimension mismatch: expected {expected} modes, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("unphysical state: {0}")]
    Physicality(String),

    #[error("infeasible attack: {0}")]
    Infeasible(String),

    #[error("NLA gain {gain} too large: equivalent squeezing {squeezing} exceeds 1")]
    GainTooLarge { gain: f64, squeezing: f64 },

    #[error("no threshold gain in [{lo}, {hi}]: {reason}")]
    NoThreshold { lo: f64, hi: f64, reason: String },

    #[error("limit did not converge: change {change:e} at final level")]
    NotConverged { change: f64 },

    #[error("config error: {0}")]
    Config(String),
}

impl Error {
    /// Short stable name, printed by the CLI on failure.
    pub fn name(&self) -> &'static str {
        match self {
            Error::Domain(_) => "DomainError",
            Error::Index(_) => "IndexError",
            Error::Dimension { .. } => "DimensionError",
            Error::Physicality(_) => "PhysicalityError",
            Error::Infeasible(_) => "InfeasibleError",
            Error::GainTooLarge { .. } => "GainTooLargeError",
            Error::NoThreshold { .. } => "NoThresholdError",
            Error::NotConverged { .. } => "NotConvergedError",
            Error::Config(_) => "ConfigError",
        }
    }

    /// Whether the error describes a point outside the admissible attack region
    /// (as opposed to a programming or input error).
    pub fn is_infeasible(&self) -> bool {
        matches!(self, Error::Infeasible(_) | Error::GainTooLarge { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
