//! Solver contract and the bundled branch-and-bound backend.

use crate::expr::VarRef;
use crate::model::{Cmp, Domain, ModelError, ModelHandle, Sense};
use std::time::{Duration, Instant};
use thiserror::Error;

/// Outcome class of a solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    /// Proven optimal within the requested gap tolerance.
    Optimal,
    Infeasible,
    Unbounded,
    /// A limit (time or nodes) was hit; an incumbent may be present.
    Limit,
}

/// Options accepted by every backend.
#[derive(Debug, Clone)]
pub struct SolveOptions {
    /// Relative MIP gap at which the search may stop.
    pub gap: f64,
    /// Wall-clock budget per solve.
    pub time_limit: Option<Duration>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            gap: 1e-4,
            time_limit: Some(Duration::from_secs(600)),
        }
    }
}

impl SolveOptions {
    /// Prove exact optimality, no time limit. Used by tests and oracles.
    pub fn exact() -> Self {
        Self {
            gap: 0.0,
            time_limit: None,
        }
    }
}

/// Result of a solve. The assignment is indexed by variable position.
#[derive(Debug, Clone)]
pub struct SolveResult {
    pub status: SolveStatus,
    pub objective: f64,
    pub gap: Option<f64>,
    pub wall: Duration,
    model_id: u64,
    assignment: Option<Vec<f64>>,
}

impl SolveResult {
    pub fn has_assignment(&self) -> bool {
        self.assignment.is_some()
    }

    /// Value of `var` in the incumbent assignment.
    ///
    /// Panics when the result carries no assignment or `var` belongs to a
    /// different model.
    pub fn value(&self, var: VarRef) -> f64 {
        assert_eq!(
            var.model_id, self.model_id,
            "variable from a different model"
        );
        self.assignment.as_ref().expect("no assignment")[var.index()]
    }

    pub fn assignment(&self) -> Option<&[f64]> {
        self.assignment.as_deref()
    }
}

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("backend `{backend}` unavailable or misconfigured: {reason}")]
    Configuration { backend: String, reason: String },
    #[error("backend failure: {0}")]
    Backend(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Narrow backend contract: load a frozen model, solve, report.
pub trait Backend: Send + Sync {
    fn name(&self) -> &'static str;
    fn solve(&self, model: &ModelHandle, options: &SolveOptions) -> Result<SolveResult, SolveError>;
}

/// Solves with the bundled backend.
pub fn solve(model: &ModelHandle, options: &SolveOptions) -> Result<SolveResult, SolveError> {
    BundledBackend.solve(model, options)
}

/// The bundled exact solver: branch & bound over a bounded-variable simplex.
#[derive(Debug, Clone, Copy, Default)]
pub struct BundledBackend;

impl Backend for BundledBackend {
    fn name(&self) -> &'static str {
        "bundled-branch-and-bound"
    }

    fn solve(&self, model: &ModelHandle, options: &SolveOptions) -> Result<SolveResult, SolveError> {
        if model.num_vars() == 0 {
            return Err(SolveError::Model(ModelError::EmptyModel));
        }
        let start = Instant::now();
        let direction = match model.sense() {
            Sense::Minimize => microlp::OptimizationDirection::Minimize,
            Sense::Maximize => microlp::OptimizationDirection::Maximize,
        };
        let mut problem = microlp::Problem::new(direction);
        let objective = model.objective();
        let mut engine_vars = Vec::with_capacity(model.num_vars());
        for (i, info) in model.vars().iter().enumerate() {
            let var = VarRef {
                model_id: model.model_id(),
                index: i as u32,
            };
            let obj = objective.coeff(var);
            let v = match info.domain {
                Domain::Continuous => problem.add_var(obj, (info.lo, info.hi)),
                Domain::Binary | Domain::Integer => {
                    let lo = info.lo.ceil();
                    let hi = info.hi.floor();
                    if lo < i32::MIN as f64 || hi > i32::MAX as f64 {
                        return Err(SolveError::Backend(format!(
                            "integer bounds for `{}` exceed backend range",
                            info.name
                        )));
                    }
                    if lo > hi {
                        // Integral bounds admit no value: trivially infeasible.
                        return Ok(infeasible_result(model, start));
                    }
                    problem.add_integer_var(obj, (lo as i32, hi as i32))
                }
            };
            engine_vars.push(v);
        }
        for c in model.constraints() {
            if c.expr.is_empty() {
                // Constant comparison; either vacuous or unsatisfiable.
                let ok = match c.cmp {
                    Cmp::Le => 0.0 <= c.rhs + 1e-12,
                    Cmp::Eq => c.rhs.abs() <= 1e-12,
                    Cmp::Ge => 0.0 >= c.rhs - 1e-12,
                };
                if ok {
                    continue;
                }
                return Ok(infeasible_result(model, start));
            }
            let op = match c.cmp {
                Cmp::Le => microlp::ComparisonOp::Le,
                Cmp::Eq => microlp::ComparisonOp::Eq,
                Cmp::Ge => microlp::ComparisonOp::Ge,
            };
            // LinExpr iterates in variable order, which the engine requires.
            let terms: Vec<(microlp::Variable, f64)> = c
                .expr
                .terms()
                .map(|(v, coeff)| (engine_vars[v.index()], coeff))
                .collect();
            problem.add_constraint(terms, op, c.rhs);
        }

        let mut solve_options = microlp::SolveOptions::default();
        solve_options.mip_gap = options.gap.max(0.0);
        solve_options.time_limit = options.time_limit;
        let outcome = match problem.solve_with(solve_options) {
            Ok(outcome) => outcome,
            Err(microlp::Error::Infeasible) => return Ok(infeasible_result(model, start)),
            Err(microlp::Error::Unbounded) => {
                return Ok(SolveResult {
                    status: SolveStatus::Unbounded,
                    objective: match model.sense() {
                        Sense::Maximize => f64::INFINITY,
                        Sense::Minimize => f64::NEG_INFINITY,
                    },
                    gap: None,
                    wall: start.elapsed(),
                    model_id: model.model_id(),
                    assignment: None,
                })
            }
            Err(e) => return Err(SolveError::Backend(e.to_string())),
        };

        let status = match outcome.termination_reason() {
            microlp::TerminationReason::ProvenOptimal | microlp::TerminationReason::MipGap => {
                SolveStatus::Optimal
            }
            _ => SolveStatus::Limit,
        };
        let (objective, gap, assignment) = match outcome.solution() {
            Some(sol) => {
                let values: Vec<f64> = engine_vars.iter().map(|v| sol.var_value(*v)).collect();
                // The objective constant is not part of the engine model.
                let objective = sol.objective() + objective.constant_part();
                (objective, sol.gap(), Some(values))
            }
            None => (f64::NAN, None, None),
        };
        Ok(SolveResult {
            status,
            objective,
            gap,
            wall: start.elapsed(),
            model_id: model.model_id(),
            assignment,
        })
    }
}

fn infeasible_result(model: &ModelHandle, start: Instant) -> SolveResult {
    SolveResult {
        status: SolveStatus::Infeasible,
        objective: f64::NAN,
        gap: None,
        wall: start.elapsed(),
        model_id: model.model_id(),
        assignment: None,
    }
}
