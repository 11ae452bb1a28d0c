use thiserror::Error;

use crate::expr::{EvalError, ParseError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(#[from] ParseError),
    #[error("evaluation error: {0}")]
    Eval(#[from] EvalError),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("fields of different prolongation orders: {0} and {1}")]
    OrderMismatch(usize, usize),
    #[error("field {0} is not vertical")]
    NonVerticalField(usize),
    #[error("invalid sigma matrix: {0}")]
    InvalidSigma(String),
    #[error("matrix entry {0} is not a function on the base space")]
    NotOnBase(String),
    #[error("zero test undecided for pivot at row {row}, column {col}")]
    PivotUndecidable { row: usize, col: usize },
    #[error("singular matrix")]
    SingularMatrix,
    #[error("fields {0} and {1} are not in involution")]
    NotInvolutive(usize, usize),
    #[error("bracket closure exceeded {0} new generators")]
    ClosureExceeded(usize),
    #[error("degenerate base invariant: total derivative vanishes")]
    DegenerateBase,
    #[error("seed {seed} is not annihilated by field {field}")]
    SeedNotInvariant { seed: usize, field: usize },
    #[error("zero test undecided for {0}")]
    Undecided(String),
    #[error("seeds are functionally dependent: {0:?}")]
    DependentSeeds(Vec<usize>),
    #[error("system has no solved form")]
    NoSolvedForm,
    #[error("equation {0} is not affine in the highest derivatives")]
    NonAffineInHighest(usize),
    #[error("restriction did not reach a fixed point within {0} passes")]
    RestrictionDiverged(usize),
    #[error("variable {0} keeps its full order after reduction")]
    OrderNotReduced(String),
    #[error("jacobian with respect to the highest derivatives is singular")]
    SingularJacobian,
    #[error("old coordinate {symbol} survives in reduced equation {equation}")]
    ResidualOldCoordinate { equation: usize, symbol: String },
    #[error("coordinate change is not invertible as given: {0}")]
    InverseMismatch(String),
    #[error("trajectory grids differ")]
    GridMismatch,
    #[error("residual is not polynomial in {0}")]
    NotPolynomialInVars(String),
    #[error("non-finite state at t = {0}")]
    NonFinite(f64),
    #[error("no admissible sample point found")]
    Exhausted,
    #[error("session lacks required data: {0}")]
    MissingSessionData(String),
    #[error("session line {line}, column {col}: {msg}")]
    Session { line: usize, col: usize, msg: String },
    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;
