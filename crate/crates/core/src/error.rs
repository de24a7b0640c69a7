use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid hypergraph: {0}")]
    InvalidHypergraph(String),
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("conflict enumeration exceeded its budget of {budget}")]
    ConflictBudget { budget: usize },
    /// The simplex stopped before optimality. `best` is the last primal point,
    /// clamped into the box.
    #[error("LP not solved: {reason}")]
    LpUnsolved { reason: String, best: Vec<f64> },
    #[error("scale must be at least 1, got {0}")]
    InvalidScale(f64),
    #[error("edge capacities are not uniform")]
    NonUniformCapacity,
    #[error("a single point carries mass {mass}, above the per-piece limit {limit}")]
    AtomicMass { mass: f64, limit: f64 },
    #[error("instance too large: {0}")]
    TooLarge(String),
    #[error("infeasible output: {0}")]
    Infeasible(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
