//! Exact linearization of binary-continuous products.

use crate::expr::{LinExpr, VarRef};
use crate::model::{Cmp, Domain, Model, ModelError};

/// Introduces `z = b * w` for a binary `b` and a continuous `w` with bounds
/// `[0, W]`, `W` finite.
///
/// Emits `z <= W*b`, `z <= w`, `z >= w - W*(1-b)`, `z >= 0`; at any
/// integer-feasible point these force `z = b*w` exactly.
pub fn big_m_product(
    model: &mut Model,
    b: VarRef,
    w: VarRef,
    name: &str,
) -> Result<VarRef, ModelError> {
    model.check_var(b, name)?;
    model.check_var(w, name)?;
    if model.var_info(b).domain != Domain::Binary {
        return Err(ModelError::BigMShape {
            name: name.to_string(),
            reason: "first factor must be binary".into(),
        });
    }
    let w_info = model.var_info(w).clone();
    if w_info.domain != Domain::Continuous {
        return Err(ModelError::BigMShape {
            name: name.to_string(),
            reason: "second factor must be continuous".into(),
        });
    }
    if w_info.lo < 0.0 {
        return Err(ModelError::BigMShape {
            name: name.to_string(),
            reason: format!("factor `{}` must be non-negative", w_info.name),
        });
    }
    if !w_info.hi.is_finite() {
        return Err(ModelError::BigMUnbounded {
            name: name.to_string(),
        });
    }
    let big_m = w_info.hi;
    let z = model.add_var(name, Domain::Continuous, 0.0, big_m)?;
    model.add_constraint(
        format!("{name}_ub_bin"),
        LinExpr::from(z),
        Cmp::Le,
        LinExpr::term(b, big_m),
    )?;
    model.add_constraint(
        format!("{name}_ub_cont"),
        LinExpr::from(z),
        Cmp::Le,
        LinExpr::from(w),
    )?;
    // z >= w - W*(1-b)  <=>  z - w - W*b >= -W
    let mut lb = LinExpr::from(z);
    lb.add_term(w, -1.0);
    lb.add_term(b, -big_m);
    model.add_constraint(format!("{name}_lb"), lb, Cmp::Ge, -big_m)?;
    Ok(z)
}
