//! Building new surfaces out of old ones.

use super::{is_parameter_name, ComposeError, Expr};

/// `f₁ * f₂ * … * fₙ`, whose zero set is the union of the factors' zero
/// sets. A single factor is returned unchanged.
pub fn product<I: IntoIterator<Item = Expr>>(exprs: I) -> Result<Expr, ComposeError> {
    exprs.into_iter().reduce(|acc, f| acc * f).ok_or(ComposeError::EmptyProduct)
}

/// Replaces every variable `v` by `v/k`, dilating the zero set by `k` about
/// the origin: `scale_sub(f, k)` at `k·p` equals `f` at `p`.
pub fn scale_sub(expr: &Expr, k: f64) -> Result<Expr, ComposeError> {
    if k == 0.0 || !k.is_finite() {
        return Err(ComposeError::InvalidScale(k));
    }
    Ok(expr.substitute_vars(&|v| Expr::Var(v) / Expr::num(k)))
}

/// `f^2 + g^2 - ε·a`: a thin solid around the curve `f = g = 0`, thickened
/// by the parameter `a`. With `ε·a = 0` the zero set is exactly the curve,
/// which sign-change ray casting cannot see, so renders need `ε·a > 0`.
pub fn intersect_sos(f: &Expr, g: &Expr, param: &str, epsilon_scale: f64) -> Result<Expr, ComposeError> {
    if !(epsilon_scale >= 0.0 && epsilon_scale.is_finite()) {
        return Err(ComposeError::NegativeEpsilon(epsilon_scale));
    }
    if !is_parameter_name(param) {
        return Err(ComposeError::InvalidParameterName(param.to_string()));
    }
    let sos = f.clone().pow(2) + g.clone().pow(2);
    Ok(sos - Expr::num(epsilon_scale) * Expr::param(param))
}
