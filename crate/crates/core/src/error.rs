use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("state is not normalized (norm² = {norm_sqr})")]
    NotNormalized { norm_sqr: f64 },

    #[error("matrix is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("matrix is not unitary (max deviation {deviation:e})")]
    NotUnitary { deviation: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("qubit index {qubit} out of range for {num_qubits} qubits")]
    QubitOutOfRange { qubit: usize, num_qubits: usize },

    #[error("parameter slot ${slot} is unbound ({available} parameters supplied)")]
    UnboundParameter { slot: usize, available: usize },

    #[error("parameter slot ${slot} drives a {gate} gate, which has no Pauli generator; use the stochastic shift rule")]
    UnsupportedGate { slot: usize, gate: &'static str },

    #[error("block layout needs D <= Q*L*G, got D = {data_dim} > {capacity}")]
    LayoutTooSmall { data_dim: usize, capacity: usize },

    #[error("X·Xᵀ is numerically singular (rank {rank} < {dim})")]
    RankDeficient { rank: usize, dim: usize },

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("training diverged at epoch {epoch}: loss {loss} exceeded 10x the initial loss {initial}")]
    Diverged { epoch: usize, loss: f64, initial: f64 },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
