use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),
    #[error("negative distance passed to reward function: {0}")]
    NegativeDistance(f64),
    #[error("episode is already done")]
    EpisodeDone,
    #[error("expected {expected} actions, got {got}")]
    ActionArity { expected: usize, got: usize },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("config parse error: {0}")]
    ConfigParse(String),
    #[error("{0}")]
    Protocol(String),
}
