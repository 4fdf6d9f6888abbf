use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NonSquare { rows: usize, cols: usize },

    #[error("matrix is not unitary within tolerance")]
    NotUnitary,

    #[error("operator dimension {dim} exceeds the supported maximum {max}")]
    TooLarge { dim: usize, max: usize },

    #[error("eigenroutine did not reach the residual tolerance (best residual {residual:e})")]
    NoConvergence { residual: f64 },

    #[error("zero is not in the numerical range (arc {arc} < π); no perfect single-use discriminator")]
    NoZeroInHull { arc: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("vector has zero norm")]
    ZeroVector,

    #[error("circuit uses {n} qubits; the simulator supports at most {max}")]
    TooManyQubits { n: usize, max: usize },

    #[error("no X-gate correction layer reaches the target state")]
    CorrectionNotFound,

    #[error("invalid gate: {0}")]
    InvalidGate(String),

    #[error("invalid scheme: {0}")]
    InvalidSpec(String),

    #[error("gate `{0}` has no OpenQASM name")]
    UnsupportedGate(String),

    #[error("QASM parse error on line {line}: {msg}")]
    QasmParse { line: usize, msg: String },

    #[error("bitstring length {found} does not match rule arity {expected}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("empty input")]
    EmptyInput,

    #[error("hypothesis runs have different shot totals ({h0} vs {h1})")]
    ShotMismatch { h0: u64, h1: u64 },

    #[error("invalid noise model: {0}")]
    InvalidNoise(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("row w={w}, d={d}: {source}")]
    Row {
        w: usize,
        d: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("I/O error on {path}: {msg}")]
    Io { path: String, msg: String },
}
