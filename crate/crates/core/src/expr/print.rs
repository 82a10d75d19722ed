use std::fmt::{self, Write};

use super::Expr;

// Binding strength, loosest first.
const SUM: u8 = 1;
const PRODUCT: u8 = 2;
const UNARY: u8 = 3;
const ATOM: u8 = 5;

fn level(e: &Expr) -> u8 {
    match e {
        Expr::Add(..) | Expr::Sub(..) => SUM,
        Expr::Mul(..) | Expr::Div(..) => PRODUCT,
        Expr::Neg(_) => UNARY,
        Expr::Pow(..) => 4,
        Expr::Const(_) | Expr::Var(_) | Expr::Param(_) => ATOM,
    }
}

fn child<W: Write>(out: &mut W, e: &Expr, min: u8) -> fmt::Result {
    if level(e) < min {
        out.write_char('(')?;
        write_expr(out, e)?;
        out.write_char(')')
    } else {
        write_expr(out, e)
    }
}

/// Writes `e` with the fewest parentheses that still re-parse to the same
/// tree. Binary operators are left-associative, so right operands of equal
/// strength are parenthesized.
pub(super) fn write_expr<W: Write>(out: &mut W, e: &Expr) -> fmt::Result {
    let binary = |out: &mut W, a: &Expr, op: char, b: &Expr, lvl: u8| -> fmt::Result {
        child(out, a, lvl)?;
        out.write_char(op)?;
        child(out, b, lvl + 1)
    };
    match e {
        Expr::Const(v) => write!(out, "{v}"),
        Expr::Var(v) => out.write_char(v.name()),
        Expr::Param(p) => out.write_str(p),
        Expr::Add(a, b) => binary(out, a, '+', b, SUM),
        Expr::Sub(a, b) => binary(out, a, '-', b, SUM),
        Expr::Mul(a, b) => binary(out, a, '*', b, PRODUCT),
        Expr::Div(a, b) => binary(out, a, '/', b, PRODUCT),
        Expr::Neg(a) => {
            out.write_char('-')?;
            child(out, a, UNARY)
        }
        Expr::Pow(a, n) => {
            child(out, a, ATOM)?;
            write!(out, "^{n}")
        }
    }
}
