use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors produced by any stage of the pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("entry ({row}, {col}) is out of range for a {nrows}x{ncols} matrix")]
    IndexOutOfRange {
        row: usize,
        col: usize,
        nrows: usize,
        ncols: usize,
    },

    #[error("shape mismatch in {op}: left is {left_rows}x{left_cols}, right is {right_rows}x{right_cols}")]
    ShapeMismatch {
        op: &'static str,
        left_rows: usize,
        left_cols: usize,
        right_rows: usize,
        right_cols: usize,
    },

    #[error("matrix is not upper-triangular with unit diagonal (column {col})")]
    NotUpperUnitriangular { col: usize },

    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("row {row}, column {col}: cannot parse {value:?} as a number")]
    Parse { row: usize, col: usize, value: String },

    #[error("row {row} has {got} fields, expected {expected}")]
    RaggedRow { row: usize, got: usize, expected: usize },

    #[error("column selection {col} is out of range, file has {ncols} columns")]
    ColumnOutOfRange { col: usize, ncols: usize },

    #[error("latitude {0} is outside [-90, 90]")]
    LatitudeOutOfRange(f64),

    #[error("distance matrix is not valid: {0}")]
    InvalidDistanceMatrix(String),

    #[error("sort keys contain NaN at position {0}")]
    NanKey(usize),

    #[error("value {value} at position {pos} is outside 1..={maxvalue}")]
    ValueOutOfRange { value: usize, pos: usize, maxvalue: usize },

    #[error("unknown weight predicate {0:?}")]
    UnknownPredicate(String),

    #[error("cannot select a vector field from an all-zero matrix")]
    EmptyField,

    #[error("dimension {dim} is out of range for this complex (max {max})")]
    DimOutOfRange { dim: usize, max: usize },

    #[error("generators are not available from a cohomology-mode reduction")]
    GeneratorsUnavailable,

    #[error("unknown dataset kind {0:?}")]
    UnknownDatasetKind(String),

    #[error("benchmark variants produced different diagrams: {0}")]
    DiagramMismatch(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}
