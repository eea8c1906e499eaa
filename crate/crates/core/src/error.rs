use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("insufficient expansion: need partial quotients through a_{needed}, stream ends at a_{available}")]
    InsufficientExpansion { needed: usize, available: usize },

    #[error("invalid rotation number spec `{spec}`: {reason}")]
    AlphaSpec { spec: String, reason: String },

    #[error("invalid gap model spec `{spec}`: {reason}")]
    ModelSpec { spec: String, reason: String },

    #[error("divergent zeta: s = {0} must exceed 1")]
    DivergentZeta(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("empty range [{lo}, {hi}]")]
    EmptyRange { lo: String, hi: String },

    #[error("enumeration budget exceeded: {points} points > {budget}; use the analytic mode instead")]
    BudgetExceeded { points: u128, budget: u64 },

    #[error("base point {x0} lies on the orbit of 0 (k = {k}) within resolution; perturb x0")]
    OnOrbit { x0: f64, k: i64 },

    #[error("comparison undecidable after refining to depth {0}")]
    Undecidable(usize),

    #[error("table file: {0}")]
    Table(String),
}

pub type Result<T> = std::result::Result<T, Error>;
