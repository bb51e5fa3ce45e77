//! Independent re-check of a solution against the frozen model.

use crate::expr::VarRef;
use crate::model::{Cmp, Domain, ModelError, ModelHandle};

/// Absolute + relative tolerance used when re-checking constraints.
#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self { abs: 1e-6, rel: 1e-6 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    Constraint,
    LowerBound,
    UpperBound,
    Integrality,
}

#[derive(Debug, Clone)]
pub struct Violation {
    pub kind: ViolationKind,
    /// Constraint or variable name.
    pub name: String,
    /// How far past the allowed tolerance the value lies.
    pub amount: f64,
}

/// Checks every constraint, bound, and integrality requirement of `model`
/// under `assignment`. An empty report means the assignment is feasible at
/// the given tolerance.
pub fn verify_solution(
    model: &ModelHandle,
    assignment: &[f64],
    tol: Tolerance,
) -> Result<Vec<Violation>, ModelError> {
    if assignment.len() != model.num_vars() {
        return Err(ModelError::AssignmentSize {
            got: assignment.len(),
            want: model.num_vars(),
        });
    }
    let mut violations = Vec::new();
    for (i, info) in model.vars().iter().enumerate() {
        let x = assignment[i];
        let allowed = tol.abs + tol.rel * x.abs().max(info.lo.abs().min(info.hi.abs()));
        if x < info.lo - allowed {
            violations.push(Violation {
                kind: ViolationKind::LowerBound,
                name: info.name.clone(),
                amount: info.lo - x,
            });
        }
        if x > info.hi + allowed {
            violations.push(Violation {
                kind: ViolationKind::UpperBound,
                name: info.name.clone(),
                amount: x - info.hi,
            });
        }
        if matches!(info.domain, Domain::Binary | Domain::Integer) {
            let frac = (x - x.round()).abs();
            if frac > tol.abs.max(1e-9) {
                violations.push(Violation {
                    kind: ViolationKind::Integrality,
                    name: info.name.clone(),
                    amount: frac,
                });
            }
        }
    }
    for c in model.constraints() {
        let lhs = c.expr.eval(|v: VarRef| assignment[v.index()]);
        let allowed = tol.abs + tol.rel * lhs.abs().max(c.rhs.abs());
        let excess = match c.cmp {
            Cmp::Le => lhs - c.rhs,
            Cmp::Ge => c.rhs - lhs,
            Cmp::Eq => (lhs - c.rhs).abs(),
        };
        if excess > allowed {
            violations.push(Violation {
                kind: ViolationKind::Constraint,
                name: c.name.clone(),
                amount: excess,
            });
        }
    }
    Ok(violations)
}
