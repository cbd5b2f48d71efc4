use thiserror::Error;

/// Errors shared by all analysis modules.
#[derive(Debug, Error)]
pub enum Error {
    #[error("row {row} sums to 1 - ({deficit:e}) which violates stochasticity")]
    RowSumViolation { row: usize, deficit: f64 },

    #[error("entry ({row},{col}) = {value:e} breaks the declared triangular support pattern")]
    SupportViolation { row: usize, col: usize, value: f64 },

    #[error("row tail sums are required for almost upper-triangular rows but none were provided")]
    TailUnavailable,

    #[error("sub-diagonal entry at index {index} is zero; the chain is reducible there")]
    ZeroSubdiagonal { index: usize },

    #[error("super-diagonal entry at index {index} is zero; the chain is reducible there")]
    ZeroSuperdiagonal { index: usize },

    #[error("instance size {n} exceeds the exhaustive-enumeration cutoff {max}")]
    TooLarge { n: usize, max: usize },

    #[error("series or heap weight diverges (determinant {det:e} <= 0)")]
    Divergent { det: f64 },

    #[error("row {row} has no descent mass; the descent kernel row is undefined")]
    DegenerateRow { row: usize },

    #[error("independent computation routes disagree at index {index} (relative error {rel_err:e})")]
    CrossCheckFailure { index: usize, rel_err: f64 },

    #[error("measure is not invariant: residual {residual:e} at index {index}")]
    NotInvariant { index: usize, residual: f64 },

    #[error("reversal identity {identity} violated at ({i},{j}) with error {err:e}")]
    IdentityViolation {
        identity: &'static str,
        i: usize,
        j: usize,
        err: f64,
    },

    #[error("sequence is not pushable: prefix criterion fails at {index} (value {value:e})")]
    NotPushable { index: usize, value: f64 },

    #[error("row {row} of the derived kernel has mass {mass} < 1 (chain is defective)")]
    NotStochastic { row: usize, mass: f64 },

    #[error("linear system is singular or numerically rank-deficient")]
    SingularSystem,

    #[error("row {row} has infinite support and no tail sampler is available")]
    UnsampleableRow { row: usize },

    #[error("generator diagonal at {index} is zero; the state is absorbing")]
    AbsorbingRate { index: usize },

    #[error("bad parameter `{field}`: {reason}")]
    BadParameter { field: String, reason: String },

    #[error("unknown chain family `{0}`")]
    UnknownFamily(String),

    #[error("failed to parse {context}: {reason}")]
    ParseError { context: String, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn bad_parameter(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::BadParameter {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
