use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("oscillator shell cutoff {0} outside 0..=7")]
    ShellCutoff(u32),

    #[error("non-finite Hamiltonian entry in block {0}")]
    NonFinite(String),

    #[error("eigensolver failure: {0}")]
    Eigensolver(String),

    #[error("basis mismatch: {0}")]
    BasisMismatch(String),

    #[error("matrix not Hermitian (max deviation {0:e})")]
    NonHermitian(f64),

    #[error("active window [{lo}, {hi}) exceeds the {len}-level spectrum")]
    WindowOutOfRange { lo: i64, hi: i64, len: usize },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("mode index {index} out of range for {count} modes")]
    IndexOutOfRange { index: usize, count: usize },

    #[error("{0} qubits is too many for dense materialization")]
    TooManyQubits(usize),

    #[error("non-finite objective value at iteration {iteration}")]
    NonFiniteObjective { iteration: usize },

    #[error("fixed-N basis dimension {0} exceeds the oracle limit")]
    BasisTooLarge(usize),

    #[error("bracket failure: {0}")]
    Bracket(String),

    #[error("state norm violated: |psi| = {0}")]
    Norm(f64),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("at omega = {omega} MeV: {source}")]
    AtFrequency { omega: f64, source: Box<Error> },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
