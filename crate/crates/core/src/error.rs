use thiserror::Error;

use crate::solvers::IpmResult;

pub type Result<T, E = FacetError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum FacetError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("non-finite entry in {0}")]
    NonFiniteData(&'static str),
    #[error("constraint matrix has rank {rank} < m = {m}; remove redundant rows first")]
    RankDeficient { rank: usize, m: usize },
    #[error("basis is numerically singular (condition estimate {condition:.3e})")]
    SingularBasis { condition: f64 },
    #[error("enumeration of C({n}, {m}) subsets exceeds the cap of {cap}")]
    EnumerationTooLarge { n: usize, m: usize, cap: u128 },
    #[error("system is infeasible")]
    Infeasible,
    #[error("auxiliary solve failed: {0}")]
    AuxiliarySolveFailed(String),
    #[error("exposed face is empty: every coordinate is exposed but b is nonzero")]
    EmptyFace,
    #[error("dropped row {row} is inconsistent with the right-hand side (residual {residual:.3e})")]
    InconsistentRedundantRow { row: usize, residual: f64 },
    #[error("exposing certificate found but no row became redundant")]
    LemmaViolation,
    #[error("point has mass {mass:.3e} on exposed coordinate {index}")]
    NotInFace { index: usize, mass: f64 },
    #[error("x and s must be strictly positive")]
    NonPositiveInterior,
    #[error("normal equations broke down after {iterations} iterations (regularization exhausted)")]
    NumericalBreakdown {
        iterations: usize,
        last: Box<IpmResult>,
    },
    #[error("generator draw was degenerate after {attempts} attempts: {reason}")]
    DegenerateDraw { attempts: usize, reason: String },
    #[error("invalid generator spec: {0}")]
    InvalidSpec(String),
    #[error("parse error at line {line}: {message}")]
    ParseError { line: usize, message: String },
    #[error("unsupported MPS section at line {line}: {section}")]
    UnsupportedSection { line: usize, section: String },
    #[error("unsupported MPS bound at line {line}: {bound}")]
    UnsupportedBound { line: usize, bound: String },
    #[error("unknown schema version {0}")]
    SchemaVersionUnknown(u32),
    #[error("corrupt document: {0}")]
    CorruptDocument(String),
    #[error("invalid experiment config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}
