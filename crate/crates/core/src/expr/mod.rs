//! Surfer-style implicit equations in `x`, `y`, `z`.
//!
//! An [`Expr`] is a plain tree. Its zero set `expr = 0` is the surface; every
//! single-letter identifier other than `x`, `y`, `z` is a free scalar
//! parameter that has to be bound (see [`ParamBinding`]) before evaluation.
//!
//! ```
//! use surfmotif::expr::{Expr, ParamBinding};
//! use surfmotif::Point3;
//!
//! let sphere = Expr::parse("x^2+y^2+z^2-1").unwrap();
//! assert_eq!(sphere.degree(), Some(2));
//! assert_eq!(sphere.to_string(), "x^2+y^2+z^2-1");
//! let v = sphere.evaluate(Point3::ORIGIN, &ParamBinding::new()).unwrap();
//! assert_eq!(v, -1.0);
//! ```

mod compose;
mod degree;
mod eval;
mod parse;
mod print;
mod tape;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use compose::{intersect_sos, product, scale_sub};
pub use eval::{Dual3, Scalar};
pub use parse::{ParseError, MAX_EXPONENT};
pub use tape::{RayEvaluator, Tape, LANES};

/// One of the three spatial coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Var {
    X,
    Y,
    Z,
}

impl Var {
    pub fn name(self) -> char {
        match self {
            Var::X => 'x',
            Var::Y => 'y',
            Var::Z => 'z',
        }
    }
}

/// Expression tree.
///
/// Constants are finite and non-negative; a negative literal is spelled as
/// [`Expr::Neg`] of a positive constant, which is what the parser produces.
/// Use [`Expr::num`] to build constants from arbitrary reals.
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(Var),
    Param(String),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Pow(Box<Expr>, u32),
}

impl Expr {
    /// Parses equation text. A trailing `=0` is accepted and dropped.
    pub fn parse(text: &str) -> Result<Expr, ParseError> {
        parse::parse(text)
    }

    /// Constant from any finite real; negative values become `Neg(Const)`.
    pub fn num(value: f64) -> Expr {
        debug_assert!(value.is_finite());
        if value.is_sign_negative() && value != 0.0 {
            Expr::Neg(Box::new(Expr::Const(-value)))
        } else {
            Expr::Const(value.abs())
        }
    }

    pub fn var(v: Var) -> Expr {
        Expr::Var(v)
    }

    pub fn param(name: impl Into<String>) -> Expr {
        Expr::Param(name.into())
    }

    pub fn pow(self, exponent: u32) -> Expr {
        Expr::Pow(Box::new(self), exponent)
    }

    /// Names of all parameters that occur in the tree, sorted.
    pub fn parameters(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit(&mut |e| {
            if let Expr::Param(name) = e {
                out.insert(name.clone());
            }
        });
        out
    }

    /// True when the tree mentions `x`, `y` or `z`.
    pub fn depends_on_variables(&self) -> bool {
        let mut found = false;
        self.visit(&mut |e| found |= matches!(e, Expr::Var(_)));
        found
    }

    /// Number of nodes.
    pub fn size(&self) -> usize {
        let mut n = 0;
        self.visit(&mut |_| n += 1);
        n
    }

    /// Pre-order traversal.
    pub fn visit<'a>(&'a self, f: &mut impl FnMut(&'a Expr)) {
        f(self);
        match self {
            Expr::Const(_) | Expr::Var(_) | Expr::Param(_) => {}
            Expr::Neg(a) | Expr::Pow(a, _) => a.visit(f),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.visit(f);
                b.visit(f);
            }
        }
    }

    /// Rebuilds the tree bottom-up, replacing each variable by `f(var)`.
    pub fn substitute_vars(&self, f: &impl Fn(Var) -> Expr) -> Expr {
        let bin = |a: &Expr, b: &Expr| (Box::new(a.substitute_vars(f)), Box::new(b.substitute_vars(f)));
        match self {
            Expr::Const(_) | Expr::Param(_) => self.clone(),
            Expr::Var(v) => f(*v),
            Expr::Neg(a) => Expr::Neg(Box::new(a.substitute_vars(f))),
            Expr::Pow(a, n) => Expr::Pow(Box::new(a.substitute_vars(f)), *n),
            Expr::Add(a, b) => {
                let (a, b) = bin(a, b);
                Expr::Add(a, b)
            }
            Expr::Sub(a, b) => {
                let (a, b) = bin(a, b);
                Expr::Sub(a, b)
            }
            Expr::Mul(a, b) => {
                let (a, b) = bin(a, b);
                Expr::Mul(a, b)
            }
            Expr::Div(a, b) => {
                let (a, b) = bin(a, b);
                Expr::Div(a, b)
            }
        }
    }
}

macro_rules! impl_binop {
    ($trait:ident, $method:ident, $variant:ident) => {
        impl std::ops::$trait for Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                Expr::$variant(Box::new(self), Box::new(rhs))
            }
        }
    };
}

impl_binop!(Add, add, Add);
impl_binop!(Sub, sub, Sub);
impl_binop!(Mul, mul, Mul);
impl_binop!(Div, div, Div);

impl std::ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::Neg(Box::new(self))
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        print::write_expr(f, self)
    }
}

impl std::str::FromStr for Expr {
    type Err = ParseError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Expr::parse(s)
    }
}

/// Values for the free parameters of an equation.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ParamBinding(BTreeMap<String, f64>);

impl ParamBinding {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, name: impl Into<String>, value: f64) -> Self {
        self.insert(name, value);
        self
    }

    pub fn insert(&mut self, name: impl Into<String>, value: f64) {
        self.0.insert(name.into(), value);
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.0.get(name).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.0.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Parameters of `expr` that have no value here.
    pub fn missing_for(&self, expr: &Expr) -> Vec<String> {
        expr.parameters().into_iter().filter(|p| !self.0.contains_key(p)).collect()
    }
}

impl<K: Into<String>> FromIterator<(K, f64)> for ParamBinding {
    fn from_iter<I: IntoIterator<Item = (K, f64)>>(iter: I) -> Self {
        Self(iter.into_iter().map(|(k, v)| (k.into(), v)).collect())
    }
}

/// Default slider range for a free parameter.
pub const DEFAULT_PARAM_RANGE: (f64, f64) = (0.0, 1.0);

/// True for names the grammar accepts as parameters: one lowercase ASCII
/// letter other than `x`, `y`, `z`.
pub fn is_parameter_name(name: &str) -> bool {
    let mut chars = name.chars();
    matches!((chars.next(), chars.next()), (Some(c), None) if c.is_ascii_lowercase() && !matches!(c, 'x' | 'y' | 'z'))
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("parameter '{0}' is not bound")]
    UnboundParameter(String),
    #[error("division by zero")]
    DivisionByZero,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ComposeError {
    #[error("product of an empty list")]
    EmptyProduct,
    #[error("scale factor must be non-zero and finite, got {0}")]
    InvalidScale(f64),
    #[error("epsilon scale must be finite and non-negative, got {0}")]
    NegativeEpsilon(f64),
    #[error("'{0}' is not a valid parameter name")]
    InvalidParameterName(String),
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn num_normalizes_sign() {
        assert_eq!(Expr::num(2.0), Expr::Const(2.0));
        assert_eq!(Expr::num(-2.0), -Expr::Const(2.0));
        assert_eq!(Expr::num(-0.0), Expr::Const(0.0));
    }

    #[test]
    fn parameter_names() {
        assert!(is_parameter_name("a"));
        assert!(is_parameter_name("w"));
        assert!(!is_parameter_name("x"));
        assert!(!is_parameter_name("ab"));
        assert!(!is_parameter_name("A"));
        assert!(!is_parameter_name(""));
    }

    #[test]
    fn collects_parameters() {
        let e = Expr::parse("(x-a)*(y+b)-a").unwrap();
        let names: Vec<_> = e.parameters().into_iter().collect();
        assert_eq!(names, ["a", "b"]);
        let bound = ParamBinding::new().with("a", 1.0);
        assert_eq!(bound.missing_for(&e), ["b"]);
    }
}
