//! Linear expressions over model variables.

use std::collections::BTreeMap;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

/// Opaque handle to a variable registered in a [`Model`](crate::Model).
///
/// Carries the owning model's id so that using a variable with the wrong
/// model is caught instead of silently mixing indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarRef {
    pub(crate) model_id: u64,
    pub(crate) index: u32,
}

impl VarRef {
    /// Position of the variable in its model (also its column in exports).
    pub fn index(&self) -> usize {
        self.index as usize
    }
}

/// A linear expression `sum(coeff_i * var_i) + constant`.
///
/// Terms are kept in a sorted map so iteration order is deterministic and
/// coefficients for the same variable merge. Zero coefficients are dropped.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LinExpr {
    terms: BTreeMap<VarRef, f64>,
    constant: f64,
}

impl LinExpr {
    pub fn new() -> Self {
        Self::default()
    }

    /// A single `coeff * var` term.
    pub fn term(var: VarRef, coeff: f64) -> Self {
        let mut e = Self::new();
        e.add_term(var, coeff);
        e
    }

    /// A constant expression.
    pub fn constant(value: f64) -> Self {
        Self {
            terms: BTreeMap::new(),
            constant: value,
        }
    }

    /// Sum of `coeff * var` terms; duplicate variables merge.
    pub fn sum<I: IntoIterator<Item = (VarRef, f64)>>(terms: I) -> Self {
        let mut e = Self::new();
        for (v, c) in terms {
            e.add_term(v, c);
        }
        e
    }

    /// Adds `coeff * var`, merging with an existing term for `var`.
    pub fn add_term(&mut self, var: VarRef, coeff: f64) {
        let entry = self.terms.entry(var).or_insert(0.0);
        *entry += coeff;
        if *entry == 0.0 {
            self.terms.remove(&var);
        }
    }

    pub fn add_constant(&mut self, value: f64) {
        self.constant += value;
    }

    pub fn constant_part(&self) -> f64 {
        self.constant
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in ascending variable order.
    pub fn terms(&self) -> impl Iterator<Item = (VarRef, f64)> + '_ {
        self.terms.iter().map(|(v, c)| (*v, *c))
    }

    pub fn coeff(&self, var: VarRef) -> f64 {
        self.terms.get(&var).copied().unwrap_or(0.0)
    }

    /// Evaluates the expression under `value(var)`.
    pub fn eval(&self, mut value: impl FnMut(VarRef) -> f64) -> f64 {
        self.terms
            .iter()
            .map(|(v, c)| c * value(*v))
            .sum::<f64>()
            + self.constant
    }

    /// True when every coefficient and the constant are finite.
    pub fn is_finite(&self) -> bool {
        self.constant.is_finite() && self.terms.values().all(|c| c.is_finite())
    }
}

impl From<VarRef> for LinExpr {
    fn from(v: VarRef) -> Self {
        LinExpr::term(v, 1.0)
    }
}

impl From<f64> for LinExpr {
    fn from(c: f64) -> Self {
        LinExpr::constant(c)
    }
}

impl Add for LinExpr {
    type Output = LinExpr;
    fn add(mut self, rhs: LinExpr) -> LinExpr {
        self += rhs;
        self
    }
}

impl AddAssign for LinExpr {
    fn add_assign(&mut self, rhs: LinExpr) {
        for (v, c) in rhs.terms {
            self.add_term(v, c);
        }
        self.constant += rhs.constant;
    }
}

impl Sub for LinExpr {
    type Output = LinExpr;
    fn sub(mut self, rhs: LinExpr) -> LinExpr {
        self -= rhs;
        self
    }
}

impl SubAssign for LinExpr {
    fn sub_assign(&mut self, rhs: LinExpr) {
        for (v, c) in rhs.terms {
            self.add_term(v, -c);
        }
        self.constant -= rhs.constant;
    }
}

impl Mul<f64> for LinExpr {
    type Output = LinExpr;
    fn mul(mut self, k: f64) -> LinExpr {
        if k == 0.0 {
            return LinExpr::new();
        }
        for c in self.terms.values_mut() {
            *c *= k;
        }
        self.constant *= k;
        self
    }
}

impl Neg for LinExpr {
    type Output = LinExpr;
    fn neg(self) -> LinExpr {
        self * -1.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn var(i: u32) -> VarRef {
        VarRef { model_id: 7, index: i }
    }

    #[test]
    fn merges_and_drops_zero_terms() {
        let mut e = LinExpr::term(var(0), 2.0);
        e.add_term(var(0), -2.0);
        assert!(e.is_empty());
        e.add_term(var(1), 3.0);
        e.add_term(var(1), 1.0);
        assert_eq!(e.coeff(var(1)), 4.0);
        assert_eq!(e.num_terms(), 1);
    }

    #[test]
    fn eval_includes_constant() {
        let mut e = LinExpr::sum([(var(0), 2.0), (var(1), -1.0)]);
        e.add_constant(5.0);
        let vals = [3.0, 4.0];
        assert_eq!(e.eval(|v| vals[v.index()]), 2.0 * 3.0 - 4.0 + 5.0);
    }

    #[test]
    fn operators_compose() {
        let a = LinExpr::term(var(0), 1.0) + LinExpr::term(var(1), 2.0);
        let b = (a.clone() - LinExpr::term(var(1), 2.0)) * 3.0;
        assert_eq!(b.coeff(var(0)), 3.0);
        assert_eq!(b.coeff(var(1)), 0.0);
        assert_eq!((-a).coeff(var(0)), -1.0);
    }
}
