//! Total degree by sparse polynomial expansion.
//!
//! Parameters, and any divisor that does not involve `x`, `y`, `z`, are
//! treated as opaque constant atoms so that `a*x - a*x` cancels. Float
//! coefficients carry the magnitude of everything that was summed into them;
//! a coefficient below rounding level relative to that magnitude counts as
//! cancelled.

use std::collections::{BTreeMap, HashMap};

use super::{Expr, ParamBinding, Var};

/// Upper bound on monomial-pair products per expansion; beyond it the
/// structural bound is reported instead.
const WORK_BUDGET: u64 = 2_000_000;
const CANCEL_TOLERANCE: f64 = 64.0 * f64::EPSILON;

#[derive(Clone, Copy, Debug)]
struct Coef {
    value: f64,
    mass: f64,
}

type Mono = Box<[u32]>;

#[derive(Clone, Debug, Default)]
struct Poly {
    terms: BTreeMap<Mono, Coef>,
}

struct OverBudget;

struct Expander {
    atoms: HashMap<String, usize>,
    width: usize,
    budget: u64,
}

impl Expander {
    fn unit(&self) -> Mono {
        vec![0; self.width].into_boxed_slice()
    }

    fn constant(&self, c: f64) -> Poly {
        let mut p = Poly::default();
        if c != 0.0 {
            p.terms.insert(self.unit(), Coef { value: c, mass: c.abs() });
        }
        p
    }

    fn atom(&self, slot: usize) -> Poly {
        let mut m = self.unit();
        m[slot] = 1;
        let mut p = Poly::default();
        p.terms.insert(m, Coef { value: 1.0, mass: 1.0 });
        p
    }

    fn add(&self, mut a: Poly, b: Poly, sign: f64) -> Poly {
        for (m, c) in b.terms {
            let e = a.terms.entry(m).or_insert(Coef { value: 0.0, mass: 0.0 });
            e.value += sign * c.value;
            e.mass += c.mass;
        }
        prune(a)
    }

    fn mul(&mut self, a: &Poly, b: &Poly) -> Result<Poly, OverBudget> {
        let work = (a.terms.len() as u64).saturating_mul(b.terms.len() as u64);
        self.budget = self.budget.checked_sub(work).ok_or(OverBudget)?;
        let mut out: BTreeMap<Mono, Coef> = BTreeMap::new();
        for (ma, ca) in &a.terms {
            for (mb, cb) in &b.terms {
                let m: Mono = ma.iter().zip(mb.iter()).map(|(x, y)| x + y).collect();
                let e = out.entry(m).or_insert(Coef { value: 0.0, mass: 0.0 });
                e.value += ca.value * cb.value;
                e.mass += ca.mass * cb.mass;
            }
        }
        Ok(prune(Poly { terms: out }))
    }

    fn pow(&mut self, base: &Poly, mut n: u32) -> Result<Poly, OverBudget> {
        let mut acc = self.constant(1.0);
        let mut b = base.clone();
        while n > 0 {
            if n & 1 == 1 {
                acc = self.mul(&acc, &b)?;
            }
            n >>= 1;
            if n > 0 {
                b = self.mul(&b, &b)?;
            }
        }
        Ok(acc)
    }

    fn expand(&mut self, e: &Expr) -> Result<Poly, OverBudget> {
        Ok(match e {
            Expr::Const(c) => self.constant(*c),
            Expr::Var(v) => self.atom(*v as usize),
            Expr::Param(name) => self.atom(self.atoms[name.as_str()]),
            Expr::Add(a, b) => {
                let (a, b) = (self.expand(a)?, self.expand(b)?);
                self.add(a, b, 1.0)
            }
            Expr::Sub(a, b) => {
                let (a, b) = (self.expand(a)?, self.expand(b)?);
                self.add(a, b, -1.0)
            }
            Expr::Neg(a) => {
                let a = self.expand(a)?;
                self.add(Poly::default(), a, -1.0)
            }
            Expr::Mul(a, b) => {
                let (a, b) = (self.expand(a)?, self.expand(b)?);
                self.mul(&a, &b)?
            }
            Expr::Div(a, b) => {
                let num = self.expand(a)?;
                let recip = match constant_value(b) {
                    Some(v) if v != 0.0 => self.constant(1.0 / v),
                    _ => self.atom(self.atoms[&reciprocal_key(b)]),
                };
                self.mul(&num, &recip)?
            }
            Expr::Pow(a, n) => {
                let a = self.expand(a)?;
                self.pow(&a, *n)?
            }
        })
    }
}

fn prune(mut p: Poly) -> Poly {
    p.terms.retain(|_, c| c.value.abs() > CANCEL_TOLERANCE * c.mass);
    p
}

fn constant_value(e: &Expr) -> Option<f64> {
    if e.depends_on_variables() || !e.parameters().is_empty() {
        return None;
    }
    e.evaluate(crate::Point3::ORIGIN, &ParamBinding::new()).ok()
}

fn reciprocal_key(divisor: &Expr) -> String {
    format!("1/({divisor})")
}

/// Collects opaque atoms; `None` if some divisor depends on x, y or z.
fn collect_atoms(e: &Expr) -> Option<HashMap<String, usize>> {
    let mut atoms = HashMap::new();
    let mut polynomial = true;
    e.visit(&mut |node| match node {
        Expr::Param(name) => {
            let next = 3 + atoms.len();
            atoms.entry(name.clone()).or_insert(next);
        }
        Expr::Div(_, b) => {
            if b.depends_on_variables() {
                polynomial = false;
            } else if !matches!(constant_value(b), Some(v) if v != 0.0) {
                let next = 3 + atoms.len();
                atoms.entry(reciprocal_key(b)).or_insert(next);
            }
        }
        _ => {}
    });
    polynomial.then_some(atoms)
}

/// Degree read off the tree without expanding: an upper bound on the true
/// degree that is exact whenever leading terms do not cancel.
pub(crate) fn structural_degree(e: &Expr) -> Option<u32> {
    Some(match e {
        Expr::Const(_) | Expr::Param(_) => 0,
        Expr::Var(_) => 1,
        Expr::Add(a, b) | Expr::Sub(a, b) => structural_degree(a)?.max(structural_degree(b)?),
        Expr::Mul(a, b) => structural_degree(a)?.saturating_add(structural_degree(b)?),
        Expr::Div(a, b) => {
            if b.depends_on_variables() {
                return None;
            }
            structural_degree(a)?
        }
        Expr::Neg(a) => structural_degree(a)?,
        Expr::Pow(a, n) => structural_degree(a)?.saturating_mul(*n),
    })
}

impl Expr {
    /// Total degree in `x`, `y`, `z`, i.e. the largest `i+j+k` over the
    /// monomials `x^i y^j z^k` of the expanded polynomial, with parameters
    /// held constant. `None` when the expression divides by something that
    /// depends on a variable. The zero polynomial reports degree 0.
    pub fn degree(&self) -> Option<u32> {
        let atoms = collect_atoms(self)?;
        let width = 3 + atoms.len();
        let mut ex = Expander { atoms, width, budget: WORK_BUDGET };
        match ex.expand(self) {
            Ok(poly) => Some(
                poly.terms
                    .keys()
                    .map(|m| m[Var::X as usize] + m[Var::Y as usize] + m[Var::Z as usize])
                    .max()
                    .unwrap_or(0),
            ),
            Err(OverBudget) => structural_degree(self),
        }
    }

    /// Upper bound on [`Expr::degree`] computed from the tree shape alone.
    pub fn structural_degree(&self) -> Option<u32> {
        structural_degree(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn deg(s: &str) -> Option<u32> {
        Expr::parse(s).unwrap().degree()
    }

    #[test]
    fn basic_degrees() {
        assert_eq!(deg("7"), Some(0));
        assert_eq!(deg("0"), Some(0));
        assert_eq!(deg("x"), Some(1));
        assert_eq!(deg("x*y*z+1"), Some(3));
        assert_eq!(deg("(x^2+1)^3"), Some(6));
        assert_eq!(deg("x^0"), Some(0));
    }

    #[test]
    fn cancellation_is_detected() {
        assert_eq!(deg("(x+1)-x"), Some(0));
        assert_eq!(deg("a*x^3-x^3*a+y"), Some(1));
        assert_eq!(deg("(x+y)^2-x^2-2*x*y-y^2"), Some(0));
        assert_eq!(deg("0.1*x*3-0.3*x+1"), Some(0));
        assert_eq!(Expr::parse("(x+1)-x").unwrap().structural_degree(), Some(1));
    }

    #[test]
    fn division() {
        assert_eq!(deg("x/2+y^2/4"), Some(2));
        assert_eq!(deg("x^3/a"), Some(3));
        assert_eq!(deg("x^3/(a+b)-x^3/(a+b)"), Some(0));
        assert_eq!(deg("x^2/(1-1)"), Some(2));
        assert_eq!(deg("1/x"), None);
        assert_eq!(deg("y^2/(x-x)"), None);
    }

    #[test]
    fn over_budget_falls_back_to_structure() {
        assert_eq!(deg("((x+y+z+1)^64)^64"), Some(4096));
    }
}
