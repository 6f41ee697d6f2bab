//! Root sets of polynomials and power series with unit-modulus coefficients.
//!
//! What lives where:
//! - [`digitset`]: the coefficient alphabet, its circle metric and density;
//! - [`expansion`]: greedy digit expansions with verifiable certificates;
//! - [`rootsolver`]: certified roots and multiplicities of one polynomial;
//! - [`enumeration`]: exhaustive streaming over all polynomials of bounded
//!   degree, with phase-orbit symmetry reduction and parallel solving;
//! - [`coverage`]: annulus coverage reports and certified root-free balls;
//! - [`io`]: the deterministic CSV / document / PGM file formats.

pub use num_complex::Complex64;

pub mod coverage;
pub mod digitset;
pub mod expansion;
pub mod io;
pub mod enumeration;
pub mod rootsolver;

pub use coverage::{
    ball_scan_min_margin, coverage_report, density_cross_check, exclusion_ball, exclusion_test,
    hole_search, AnnulusGrid, CoverageError, CoverageReport, ExclusionCertificate,
    HoleSearchOutcome,
};
pub use digitset::{angular_distance, density_threshold, DigitSet, DigitSetError};
pub use expansion::{
    beta_step, expand, expand_with_trace, validate_certificate, ExpansionCertificate,
    ExpansionError, GreedyStep, ValidationReport,
};
pub use enumeration::{
    all_roots, iterate_polynomials, multiple_root_scan, EnumerationError, ResourceGuard, RootCloud,
    SymmetryMode,
};
pub use rootsolver::{
    solve_roots, PolynomialError, RootRecord, RootSolve, SolverError, UnimodularPolynomial,
};
