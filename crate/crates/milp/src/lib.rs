//! Linear-model construction layer with a pluggable exact MILP backend.
//!
//! Build a [`Model`] from variables, linear expressions, and named
//! constraints; freeze it into a [`ModelHandle`]; solve through the
//! [`Backend`] contract. The bundled backend is a branch-and-bound search
//! over a bounded-variable simplex, so the test suite runs with no external
//! solver installed.
//!
//! Solutions can be re-checked independently of the backend with
//! [`verify_solution`], and any model can be dumped as LP text with
//! [`write_lp`] for debugging.

mod bigm;
mod expr;
mod export;
mod model;
mod solve;
mod verify;

pub use bigm::big_m_product;
pub use expr::{LinExpr, VarRef};
pub use export::write_lp;
pub use model::{Cmp, Constraint, Domain, Model, ModelError, ModelHandle, Sense, VarCensus, VarInfo};
pub use solve::{solve, Backend, BundledBackend, SolveError, SolveOptions, SolveResult, SolveStatus};
pub use verify::{verify_solution, Tolerance, Violation, ViolationKind};
