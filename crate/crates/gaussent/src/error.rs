//! Error type shared by all modules of the crate.

use thiserror::Error;

/// Errors produced by covariance-matrix construction, state generation,
/// partition handling, and the entanglement criteria.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("matrix is not symmetric (max asymmetry {max_asymmetry:.3e})")]
    NonSymmetric { max_asymmetry: f64 },

    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("matrix is numerically singular (condition number {condition:.3e})")]
    SingularMatrix { condition: f64 },

    #[error("matrix shape {rows}x{cols} does not match {n_modes} modes")]
    ShapeMismatch {
        rows: usize,
        cols: usize,
        n_modes: usize,
    },

    #[error("transmission efficiency {eta} outside [0, 1]")]
    EfficiencyOutOfRange { eta: f64 },

    #[error("mixing weight {p} outside [0, 1]")]
    WeightOutOfRange { p: f64 },

    #[error("loss requested on a mode other than A; route through apply_loss")]
    UnsupportedLossPattern,

    #[error("mode subset is empty")]
    EmptySubset,

    #[error("mode index {index} out of range for {n_modes} modes")]
    IndexOutOfRange { index: usize, n_modes: usize },

    #[error("{n_modes} modes exceeds the practical bound of {max}")]
    TooManyModes { n_modes: usize, max: usize },

    #[error("partition covers {partition_modes} modes but the state has {state_modes}")]
    PartitionMismatch {
        partition_modes: usize,
        state_modes: usize,
    },

    #[error("PPT requires exactly two blocks, got {blocks}")]
    NotABipartition { blocks: usize },

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("h^T gamma h is numerically zero; lower bound undefined")]
    DegenerateH,

    #[error("direction vector is numerically zero")]
    ZeroDirection,

    #[error("invalid circuit element: {0}")]
    InvalidElement(String),

    #[error("variance for quadrature {index} is not positive ({value})")]
    NegativeVariance { index: usize, value: f64 },

    #[error("sum- and difference-derived entries ({i},{j}) differ by {relative_gap:.3e} relative")]
    InconsistentPair {
        i: usize,
        j: usize,
        relative_gap: f64,
    },

    #[error("measurement records have mismatched shapes")]
    RecordShapeMismatch,

    #[error("invalid measurement record: {0}")]
    InvalidRecord(String),

    #[error("invalid covariance file: {0}")]
    InvalidCovarianceFile(String),
}

pub type Result<T> = std::result::Result<T, Error>;
