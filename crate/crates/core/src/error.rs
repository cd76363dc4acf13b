use thiserror::Error;

pub type Result<T> = std::result::Result<T, PlcpError>;

#[derive(Debug, Error)]
pub enum PlcpError {
    #[error("shape mismatch in {context}: expected {expected:?}, got {got:?}")]
    ShapeMismatch {
        context: &'static str,
        expected: (usize, usize),
        got: (usize, usize),
    },

    #[error("row {row} has an empty candidate set")]
    EmptyCandidateRow { row: usize },

    #[error("row {row}: ground-truth label {label} is not a candidate")]
    TruthNotCandidate { row: usize, label: usize },

    #[error("row {row}: ground-truth label {label} out of range for {label_count} labels")]
    TruthOutOfRange {
        row: usize,
        label: usize,
        label_count: usize,
    },

    #[error("row {row}, column {col}: candidate entry {value} is not 0 or 1")]
    NonBinaryCandidate { row: usize, col: usize, value: f64 },

    #[error("row {row}, column {col}: non-finite feature value")]
    NonFiniteFeature { row: usize, col: usize },

    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("kernel bandwidth resolved to {sigma}; all training points coincide")]
    DegenerateBandwidth { sigma: f64 },

    #[error("kernel system is not positive definite (min diagonal {min_diag:e}, max diagonal {max_diag:e})")]
    SingularSystem { min_diag: f64, max_diag: f64 },

    #[error(
        "infeasible row problem: bounds sum to [{lower_sum}, {upper_sum}] but target is {target}"
    )]
    Infeasible {
        lower_sum: f64,
        upper_sum: f64,
        target: f64,
    },

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("ground truth required for {0}")]
    MissingTruth(&'static str),

    #[error("{path}: {message}")]
    Parse { path: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl PlcpError {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        PlcpError::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

pub(crate) fn check_shape(
    context: &'static str,
    expected: (usize, usize),
    got: (usize, usize),
) -> Result<()> {
    if expected != got {
        return Err(PlcpError::ShapeMismatch {
            context,
            expected,
            got,
        });
    }
    Ok(())
}
