//! Facial reduction and degeneracy analysis for standard-form linear programs.
//!
//! The crate detects when `{x >= 0 : Ax = b}` has no strictly positive point,
//! builds an equivalent strictly feasible full-row-rank system, and ships the
//! pieces needed to study what that does to solvers: exhaustive basis
//! enumeration, a dense interior-point method, a revised simplex with
//! degenerate-pivot accounting, seeded generators and experiment drivers.

pub mod error;
pub mod experiments;
pub mod facial;
pub mod generators;
pub mod golden;
pub mod io;
pub mod linalg;
pub mod lp;
pub mod solvers;
pub mod tolerance;

pub use error::{FacetError, Result};
pub use facial::{
    dual_facially_reduce, facial_range, facially_reduce, find_dual_exposing_vector,
    find_exposing_vector, remove_redundant_rows, DualExposingCertificate, DualFacialReduction,
    ExposingCertificate, FacialReduction, RowSelection,
};
pub use generators::{
    generate, generate_dual_no_slater, generate_primal_no_slater, make_objective,
    to_slater_counterpart, GeneratorKind, GeneratorSpec, PlantMetadata, PlantedInstance,
};
pub use lp::{
    basis_solve, degeneracy_degree, enumerate_bfs, is_strictly_feasible_point, validate, Basis,
    BasisPoint, BfsEnumeration, StandardFormLP,
};
pub use solvers::{
    kkt_residuals, normal_matrix_condition, solve_ipm, solve_simplex, IpmOptions, IpmResult, Kkt,
    PivotRule, SimplexResult, SimplexStatus, SimplexVariant,
};

pub use nalgebra::{DMatrix, DVector};
