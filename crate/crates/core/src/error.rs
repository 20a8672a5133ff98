use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("qubit index {index} out of range for {n_qubits}-qubit register")]
    QubitOutOfRange { index: usize, n_qubits: usize },

    #[error("missing binding for parameter `{0}`")]
    MissingBinding(String),

    #[error("undeclared parameter `{0}`")]
    UndeclaredParam(String),

    #[error("gate {gate} is not a Pauli rotation")]
    NotARotation { gate: usize },

    #[error("unsupported derivative order {0}")]
    UnsupportedOrder(usize),

    #[error("Pauli weight {weight} exceeds locality cap {cap}")]
    LocalityCap { weight: usize, cap: usize },

    #[error("index {index} out of range (len {len})")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
