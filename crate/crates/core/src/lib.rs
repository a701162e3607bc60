//! An executable probabilistic type theory: parsing, affine type
//! checking with semantic side conditions, exact discrete
//! distribution semantics, and Bayesian conditioning by assert and
//! normalisation.

pub mod build;
pub mod print;
pub mod scalar;
pub mod semantics;
pub mod syntax;
pub mod typecheck;

pub use scalar::Scalar;
pub use semantics::{enumerate_values, eval, eval_all, Dist, Env, Value};
pub use syntax::{Context, EnumTable, Name, Term, Type};
pub use typecheck::{
    check_disjoint, check_equal, check_leq, check_nonzero_domain, check_program, infer_type,
    Definition, Program, QueryDecl, QueryKind, TypeError, TypeErrorKind, Warning,
};
