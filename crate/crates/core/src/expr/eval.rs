use std::ops::{Add, Mul, Neg, Sub};

use super::{EvalError, Expr, ParamBinding, Var};
use crate::geom::Point3;

/// Number type the evaluators are generic over: plain `f64` for values and
/// [`Dual3`] for values together with the spatial gradient.
pub trait Scalar: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Neg<Output = Self> {
    fn constant(v: f64) -> Self;
    fn value(self) -> f64;
    /// `None` when the divisor's value is exactly zero.
    fn checked_div(self, rhs: Self) -> Option<Self>;

    /// Integer power by binary exponentiation. Every evaluator goes through
    /// this so that tree and tape results agree bit for bit.
    #[inline(always)]
    fn ipow(self, mut n: u32) -> Self {
        let mut acc = Self::constant(1.0);
        let mut base = self;
        while n > 0 {
            if n & 1 == 1 {
                acc = acc * base;
            }
            n >>= 1;
            if n > 0 {
                base = base * base;
            }
        }
        acc
    }
}

impl Scalar for f64 {
    #[inline(always)]
    fn constant(v: f64) -> Self {
        v
    }
    #[inline(always)]
    fn value(self) -> f64 {
        self
    }
    #[inline(always)]
    fn checked_div(self, rhs: Self) -> Option<Self> {
        (rhs != 0.0).then(|| self / rhs)
    }
}

/// Forward-mode dual number carrying d/dx, d/dy, d/dz.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dual3 {
    pub v: f64,
    pub d: [f64; 3],
}

impl Dual3 {
    pub fn seed(v: f64, axis: usize) -> Self {
        let mut d = [0.0; 3];
        d[axis] = 1.0;
        Self { v, d }
    }
}

impl Add for Dual3 {
    type Output = Self;
    #[inline]
    fn add(self, r: Self) -> Self {
        Self { v: self.v + r.v, d: [self.d[0] + r.d[0], self.d[1] + r.d[1], self.d[2] + r.d[2]] }
    }
}

impl Sub for Dual3 {
    type Output = Self;
    #[inline]
    fn sub(self, r: Self) -> Self {
        Self { v: self.v - r.v, d: [self.d[0] - r.d[0], self.d[1] - r.d[1], self.d[2] - r.d[2]] }
    }
}

impl Mul for Dual3 {
    type Output = Self;
    #[inline]
    fn mul(self, r: Self) -> Self {
        let d = |i: usize| self.d[i] * r.v + self.v * r.d[i];
        Self { v: self.v * r.v, d: [d(0), d(1), d(2)] }
    }
}

impl Neg for Dual3 {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self { v: -self.v, d: [-self.d[0], -self.d[1], -self.d[2]] }
    }
}

impl Scalar for Dual3 {
    fn constant(v: f64) -> Self {
        Self { v, d: [0.0; 3] }
    }
    fn value(self) -> f64 {
        self.v
    }
    fn checked_div(self, r: Self) -> Option<Self> {
        if r.v == 0.0 {
            return None;
        }
        let q = self.v / r.v;
        let d = |i: usize| (self.d[i] - q * r.d[i]) / r.v;
        Some(Self { v: q, d: [d(0), d(1), d(2)] })
    }
}

pub(super) fn eval_tree<S: Scalar>(e: &Expr, vars: &[S; 3], params: &ParamBinding) -> Result<S, EvalError> {
    Ok(match e {
        Expr::Const(c) => S::constant(*c),
        Expr::Var(Var::X) => vars[0],
        Expr::Var(Var::Y) => vars[1],
        Expr::Var(Var::Z) => vars[2],
        Expr::Param(name) => S::constant(params.get(name).ok_or_else(|| EvalError::UnboundParameter(name.clone()))?),
        Expr::Add(a, b) => eval_tree(a, vars, params)? + eval_tree(b, vars, params)?,
        Expr::Sub(a, b) => eval_tree(a, vars, params)? - eval_tree(b, vars, params)?,
        Expr::Mul(a, b) => eval_tree(a, vars, params)? * eval_tree(b, vars, params)?,
        Expr::Div(a, b) => {
            let num = eval_tree(a, vars, params)?;
            num.checked_div(eval_tree(b, vars, params)?).ok_or(EvalError::DivisionByZero)?
        }
        Expr::Neg(a) => -eval_tree(a, vars, params)?,
        Expr::Pow(a, n) => eval_tree(a, vars, params)?.ipow(*n),
    })
}

impl Expr {
    /// Value of the expression at `p`.
    pub fn evaluate(&self, p: Point3, params: &ParamBinding) -> Result<f64, EvalError> {
        eval_tree(self, &[p.x, p.y, p.z], params).map_err(|e| self.report_unbound_first(e, params))
    }

    fn report_unbound_first(&self, e: EvalError, params: &ParamBinding) -> EvalError {
        match params.missing_for(self).into_iter().next() {
            Some(name) => EvalError::UnboundParameter(name),
            None => e,
        }
    }

    /// Value and spatial gradient at `p`, by forward-mode differentiation.
    pub fn value_and_gradient(&self, p: Point3, params: &ParamBinding) -> Result<(f64, Point3), EvalError> {
        let vars = [Dual3::seed(p.x, 0), Dual3::seed(p.y, 1), Dual3::seed(p.z, 2)];
        let r = eval_tree(self, &vars, params).map_err(|e| self.report_unbound_first(e, params))?;
        Ok((r.v, Point3::from(r.d)))
    }

    /// `(∂f/∂x, ∂f/∂y, ∂f/∂z)` at `p`.
    pub fn gradient(&self, p: Point3, params: &ParamBinding) -> Result<Point3, EvalError> {
        self.value_and_gradient(p, params).map(|(_, g)| g)
    }
}
