//! Model construction: variables, constraints, objective.

use crate::expr::{LinExpr, VarRef};
use std::sync::atomic::{AtomicU64, Ordering};
use thiserror::Error;

static NEXT_MODEL_ID: AtomicU64 = AtomicU64::new(1);

/// The values a variable may take.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    Continuous,
    Binary,
    Integer,
}

/// Objective direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

/// Comparison operator of a constraint.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cmp {
    Le,
    Eq,
    Ge,
}

impl Cmp {
    pub fn symbol(&self) -> &'static str {
        match self {
            Cmp::Le => "<=",
            Cmp::Eq => "=",
            Cmp::Ge => ">=",
        }
    }
}

#[derive(Debug, Clone)]
pub struct VarInfo {
    pub name: String,
    pub domain: Domain,
    pub lo: f64,
    pub hi: f64,
}

/// A normalized constraint `expr cmp rhs` (expression constant folded into rhs).
#[derive(Debug, Clone)]
pub struct Constraint {
    pub name: String,
    pub expr: LinExpr,
    pub cmp: Cmp,
    pub rhs: f64,
}

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("variable `{var}` belongs to another model (used in {context})")]
    ForeignVariable { var: String, context: String },
    #[error("non-finite coefficient or constant in {context}")]
    NonFinite { context: String },
    #[error("invalid bounds [{lo}, {hi}] for `{name}`")]
    BadBounds { name: String, lo: f64, hi: f64 },
    #[error("big-M product `{name}` requires a finite upper bound on the continuous factor")]
    BigMUnbounded { name: String },
    #[error("big-M product `{name}`: {reason}")]
    BigMShape { name: String, reason: String },
    #[error("assignment covers {got} variables, model has {want}")]
    AssignmentSize { got: usize, want: usize },
    #[error("model has no variables")]
    EmptyModel,
}

/// Per-domain variable counts, used by model-audit tests.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct VarCensus {
    pub continuous: usize,
    pub binary: usize,
    pub integer: usize,
}

/// A mutable linear model under construction. [`Model::freeze`] turns it into
/// an immutable [`ModelHandle`] that backends accept.
#[derive(Debug, Clone)]
pub struct Model {
    id: u64,
    name: String,
    sense: Sense,
    vars: Vec<VarInfo>,
    constraints: Vec<Constraint>,
    objective: LinExpr,
}

impl Model {
    pub fn new(name: impl Into<String>, sense: Sense) -> Self {
        Self {
            id: NEXT_MODEL_ID.fetch_add(1, Ordering::Relaxed),
            name: name.into(),
            sense,
            vars: Vec::new(),
            constraints: Vec::new(),
            objective: LinExpr::new(),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn sense(&self) -> Sense {
        self.sense
    }

    /// Registers a variable. Binary variables get bounds [0, 1] regardless of
    /// the arguments.
    pub fn add_var(
        &mut self,
        name: impl Into<String>,
        domain: Domain,
        lo: f64,
        hi: f64,
    ) -> Result<VarRef, ModelError> {
        let name = name.into();
        let (lo, hi) = match domain {
            Domain::Binary => (0.0, 1.0),
            _ => (lo, hi),
        };
        if lo.is_nan() || hi.is_nan() || lo > hi || lo == f64::INFINITY || hi == f64::NEG_INFINITY
        {
            return Err(ModelError::BadBounds { name, lo, hi });
        }
        let index = self.vars.len() as u32;
        self.vars.push(VarInfo {
            name,
            domain,
            lo,
            hi,
        });
        Ok(VarRef {
            model_id: self.id,
            index,
        })
    }

    /// Replaces the bounds of an existing variable (bound tightening).
    pub fn set_bounds(&mut self, var: VarRef, lo: f64, hi: f64) -> Result<(), ModelError> {
        self.check_var(var, "set_bounds")?;
        let info = &mut self.vars[var.index()];
        if lo.is_nan() || hi.is_nan() || lo > hi {
            return Err(ModelError::BadBounds {
                name: info.name.clone(),
                lo,
                hi,
            });
        }
        info.lo = lo;
        info.hi = hi;
        Ok(())
    }

    /// Adds `lhs cmp rhs`. Both sides may be arbitrary linear expressions;
    /// the stored constraint is normalized to `expr cmp constant`.
    pub fn add_constraint(
        &mut self,
        name: impl Into<String>,
        lhs: impl Into<LinExpr>,
        cmp: Cmp,
        rhs: impl Into<LinExpr>,
    ) -> Result<(), ModelError> {
        let name = name.into();
        let mut expr = lhs.into() - rhs.into();
        let rhs_const = -expr.constant_part();
        expr.add_constant(-expr.constant_part());
        if !expr.is_finite() || !rhs_const.is_finite() {
            return Err(ModelError::NonFinite {
                context: format!("constraint `{name}`"),
            });
        }
        self.check_expr(&expr, &format!("constraint `{name}`"))?;
        self.constraints.push(Constraint {
            name,
            expr,
            cmp,
            rhs: rhs_const,
        });
        Ok(())
    }

    pub fn set_objective(&mut self, expr: impl Into<LinExpr>) -> Result<(), ModelError> {
        let expr = expr.into();
        if !expr.is_finite() {
            return Err(ModelError::NonFinite {
                context: "objective".into(),
            });
        }
        self.check_expr(&expr, "objective")?;
        self.objective = expr;
        Ok(())
    }

    pub fn var_info(&self, var: VarRef) -> &VarInfo {
        &self.vars[var.index()]
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn census(&self) -> VarCensus {
        let mut c = VarCensus::default();
        for v in &self.vars {
            match v.domain {
                Domain::Continuous => c.continuous += 1,
                Domain::Binary => c.binary += 1,
                Domain::Integer => c.integer += 1,
            }
        }
        c
    }

    /// Freezes the model. No further edits are possible through the handle.
    pub fn freeze(self) -> ModelHandle {
        ModelHandle { inner: self }
    }

    pub(crate) fn check_var(&self, var: VarRef, context: &str) -> Result<(), ModelError> {
        if var.model_id != self.id || var.index() >= self.vars.len() {
            return Err(ModelError::ForeignVariable {
                var: format!("#{}", var.index()),
                context: context.to_string(),
            });
        }
        Ok(())
    }

    fn check_expr(&self, expr: &LinExpr, context: &str) -> Result<(), ModelError> {
        for (v, _) in expr.terms() {
            self.check_var(v, context)?;
        }
        Ok(())
    }
}

/// An immutable model ready for a backend. Shareable across threads.
#[derive(Debug, Clone)]
pub struct ModelHandle {
    inner: Model,
}

impl ModelHandle {
    pub fn name(&self) -> &str {
        self.inner.name()
    }

    pub fn sense(&self) -> Sense {
        self.inner.sense
    }

    pub fn num_vars(&self) -> usize {
        self.inner.num_vars()
    }

    pub fn num_constraints(&self) -> usize {
        self.inner.num_constraints()
    }

    pub fn vars(&self) -> &[VarInfo] {
        &self.inner.vars
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.inner.constraints
    }

    pub fn objective(&self) -> &LinExpr {
        &self.inner.objective
    }

    pub fn census(&self) -> VarCensus {
        self.inner.census()
    }

    pub(crate) fn model_id(&self) -> u64 {
        self.inner.id
    }
}
