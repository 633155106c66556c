//! Symbolic and numerical toolkit for Hurwitz multizeta functions
//!
//! `He^{s1,...,sr}(z) = Σ_{0 < n_r < ... < n_1} Π (n_i + z)^{-s_i}`.
//!
//! The symbolic side works with compositions and the stuffle product,
//! reduces every convergent composition to a unique polynomial in
//! Lyndon-counted generators, and verifies that the resulting algebra is
//! free. The numeric side evaluates the functions to high precision and
//! checks algebraic identities at sample points.

pub mod composition;
pub mod graded;
pub mod hurwitz;
pub mod lab;
pub mod linalg;
pub mod lyndon;
pub mod mp;
pub mod stuffle;

pub use composition::{
    enumerate_compositions, parse_composition, sum_combine, Composition, FormalSum, Measures,
    ParseError,
};
pub use graded::{
    build_generator_table, dimension, dimension_report, reduce_to_normal_form, verify_freeness,
    DimensionReport, FreenessReport, GeneratorPolynomial, GeneratorTable, Monomial, TableError,
};
pub use hurwitz::{
    eval_h1, eval_hmzf, eval_mzv, eval_polynomial, hurwitz_zeta, parse_point, point, BoundKind,
    EvalError, EvalParams, EvalRequest, EvalResult,
};
pub use lab::{
    check_difference_equation, check_stuffle_identity, default_points, difference_operator,
    end_to_end_check, independence_certificate, j_kernel, Candidate, CheckReport,
    IndependenceCertificate, IndependenceVerdict, LabError,
};
pub use lyndon::{
    cfl_factorize, count_lyndon, generate_lyndon, is_lyndon, CflFactorization, LyndonWord,
};
pub use mp::{Complex, Real};
pub use stuffle::{expand_monomial, stuffle, stuffle_bilinear, stuffle_power};
