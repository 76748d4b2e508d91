use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    /// `n·c₁(ω) ≤ 1`: the constants μₙ, σₙ² are undefined.
    #[error("omega = {omega} is not admissible at n = {n} (n*c1 = {n_c1})")]
    Inadmissible { n: u64, omega: f64, n_c1: f64 },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
