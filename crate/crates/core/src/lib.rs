//! Computational tools around meet-semidistributivity: finite idempotent
//! algebras, generated subpowers, a decision procedure for height-one
//! Maltsev condition schemas, certified rewriting in free semirings, and
//! exact checks of the rational counterexample algebras.

pub mod algebra;
pub mod algebras;
pub mod counterexamples;
pub mod error;
pub mod maltsev;
pub mod semiring;
pub mod subpower;
pub mod term;

pub use algebra::{Element, FiniteAlgebra, Operation};
pub use error::{Error, Result};
pub use subpower::{
    generate_closure, term_op_space, Budget, ClosureState, Provenance, TermOpSpace,
};
pub use term::Term;
