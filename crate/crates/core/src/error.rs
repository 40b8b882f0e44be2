use alloc::string::String;

/// Errors raised by the codebook, design and detection routines.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("factor graph matrix is empty")]
    EmptyGraph,
    #[error("factor graph row {row} has {len} entries, expected {expected}")]
    RaggedGraph { row: usize, len: usize, expected: usize },
    #[error("factor graph entry ({row}, {col}) is {value}, expected 0 or 1")]
    NonBinaryEntry { row: usize, col: usize, value: u8 },
    #[error("user {user} without resource")]
    UserWithoutResource { user: usize },
    #[error("user index {index} out of range for {count} users")]
    UserOutOfRange { index: usize, count: usize },
    #[error("codeword index {index} out of range for codebook size {size}")]
    CodewordOutOfRange { index: usize, size: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("{columns} superimposed columns exceed the cap of {cap}")]
    CapExceeded { columns: u128, cap: u128 },
    #[error("row {row} is outside the support but column {col} holds {value}")]
    OffSupport { row: usize, col: usize, value: f64 },
    #[error("negative magnitude {value} at active row {row}")]
    NegativeMagnitude { row: usize, value: f64 },
    #[error("no Hadamard sign pattern exists for codebook size {0}")]
    NotPowerOfTwo(usize),
    #[error("sign matrix entry ({row}, {col}) is {value}, expected +1 or -1")]
    InvalidSign { row: usize, col: usize, value: i8 },
    #[error("difference set has no all-zero column to strip")]
    NoZeroColumn,
    #[error("count overflows 64 bits; exact value is {exact}")]
    CountOverflow { exact: String },
    #[error("{count} constraints exceed the cap of {cap}; the symmetric scheme needs far fewer")]
    TooManyConstraints { count: u128, cap: u64 },
    #[error("no feasible starting point after {0} draws")]
    DegenerateInitialization(usize),
    #[error("point is infeasible: minimum squared distance {0} is below 1")]
    InfeasiblePoint(f64),
    #[error("user {user} has coinciding codewords")]
    DegenerateCodebook { user: usize },
    #[error("noise variance must be positive, got {0}")]
    InvalidNoiseVariance(f64),
    #[error("invalid option: {0}")]
    InvalidOption(&'static str),
}

pub type Result<T> = core::result::Result<T, Error>;
