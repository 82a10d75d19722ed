//! Flat instruction tape for hot evaluation loops.
//!
//! Parameters are folded into constants at compile time. Each instruction
//! writes its own register, and operands always refer to earlier registers.
//! The tape performs exactly the same floating-point operations in the same
//! order as [`Expr::evaluate`], so both give bit-identical results.
//!
//! [`RayEvaluator`] evaluates many points along one ray at once. When the
//! ray is parallel to a coordinate axis, every instruction that does not
//! depend on a moving coordinate is computed once per ray and broadcast.

use super::eval::Scalar;
use super::{EvalError, Expr, ParamBinding, Var};
use crate::geom::Point3;

/// Points evaluated per batch by [`RayEvaluator`].
pub const LANES: usize = 32;

#[derive(Clone, Copy, Debug, PartialEq)]
enum Op {
    Const(f64),
    Var(Var),
    Add(u32, u32),
    Sub(u32, u32),
    Mul(u32, u32),
    Div(u32, u32),
    Neg(u32),
    Pow(u32, u32),
}

/// An [`Expr`] with bound parameters, compiled for repeated evaluation.
#[derive(Clone, Debug)]
pub struct Tape {
    ops: Vec<Op>,
}

impl Tape {
    pub fn compile(expr: &Expr, params: &ParamBinding) -> Result<Tape, EvalError> {
        let mut ops = Vec::with_capacity(expr.size());
        emit(expr, params, &mut ops)?;
        Ok(Tape { ops })
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    /// Evaluates at one point. `regs` is scratch space reused across calls.
    pub fn eval_with<S: Scalar>(&self, p: [S; 3], regs: &mut Vec<S>) -> Result<S, EvalError> {
        regs.clear();
        for op in &self.ops {
            let r = |i: &u32| regs[*i as usize];
            let v = match op {
                Op::Const(c) => S::constant(*c),
                Op::Var(v) => p[*v as usize],
                Op::Add(a, b) => r(a) + r(b),
                Op::Sub(a, b) => r(a) - r(b),
                Op::Mul(a, b) => r(a) * r(b),
                Op::Div(a, b) => r(a).checked_div(r(b)).ok_or(EvalError::DivisionByZero)?,
                Op::Neg(a) => -r(a),
                Op::Pow(a, n) => r(a).ipow(*n),
            };
            regs.push(v);
        }
        Ok(*regs.last().expect("tape is never empty"))
    }

    pub fn eval(&self, p: Point3) -> Result<f64, EvalError> {
        self.eval_with([p.x, p.y, p.z], &mut Vec::with_capacity(self.ops.len()))
    }
}

fn emit(e: &Expr, params: &ParamBinding, ops: &mut Vec<Op>) -> Result<u32, EvalError> {
    let bin = |a: &Expr, b: &Expr, ops: &mut Vec<Op>, f: fn(u32, u32) -> Op| -> Result<Op, EvalError> {
        let a = emit(a, params, ops)?;
        let b = emit(b, params, ops)?;
        Ok(f(a, b))
    };
    let op = match e {
        Expr::Const(c) => Op::Const(*c),
        Expr::Var(v) => Op::Var(*v),
        Expr::Param(name) => Op::Const(params.get(name).ok_or_else(|| EvalError::UnboundParameter(name.clone()))?),
        Expr::Add(a, b) => bin(a, b, ops, Op::Add)?,
        Expr::Sub(a, b) => bin(a, b, ops, Op::Sub)?,
        Expr::Mul(a, b) => bin(a, b, ops, Op::Mul)?,
        Expr::Div(a, b) => bin(a, b, ops, Op::Div)?,
        Expr::Neg(a) => Op::Neg(emit(a, params, ops)?),
        Expr::Pow(a, n) => Op::Pow(emit(a, params, ops)?, *n),
    };
    ops.push(op);
    Ok(ops.len() as u32 - 1)
}

/// Batched evaluation along a family of rays sharing a direction.
pub struct RayEvaluator<'t> {
    tape: &'t Tape,
    moving: [bool; 3],
    varying: Vec<bool>,
    regs: Vec<f64>,
    scalar_regs: Vec<f64>,
    invariant_error: bool,
}

impl<'t> RayEvaluator<'t> {
    /// `direction` decides which coordinates change along the ray.
    pub fn new(tape: &'t Tape, direction: Point3) -> Self {
        let moving = [direction.x != 0.0, direction.y != 0.0, direction.z != 0.0];
        let mut varying = Vec::with_capacity(tape.ops.len());
        for op in &tape.ops {
            let v = |i: &u32| varying[*i as usize];
            let this = match op {
                Op::Const(_) => false,
                Op::Var(var) => moving[*var as usize],
                Op::Add(a, b) | Op::Sub(a, b) | Op::Mul(a, b) | Op::Div(a, b) => v(a) || v(b),
                Op::Neg(a) | Op::Pow(a, _) => v(a),
            };
            varying.push(this);
        }
        Self {
            tape,
            moving,
            varying,
            regs: vec![0.0; tape.ops.len() * LANES],
            scalar_regs: Vec::with_capacity(tape.ops.len()),
            invariant_error: false,
        }
    }

    /// Fixes the ray. Coordinates that do not move take their value from
    /// `origin` for the whole ray.
    pub fn set_ray(&mut self, origin: Point3) {
        let p = origin.to_array();
        self.invariant_error = false;
        self.scalar_regs.clear();
        for (i, op) in self.tape.ops.iter().enumerate() {
            if self.varying[i] {
                self.scalar_regs.push(f64::NAN);
                continue;
            }
            let r = |j: &u32| self.scalar_regs[*j as usize];
            let v = match op {
                Op::Const(c) => *c,
                Op::Var(var) => p[*var as usize],
                Op::Add(a, b) => r(a) + r(b),
                Op::Sub(a, b) => r(a) - r(b),
                Op::Mul(a, b) => r(a) * r(b),
                Op::Div(a, b) => {
                    if r(b) == 0.0 {
                        self.invariant_error = true;
                    }
                    r(a) / r(b)
                }
                Op::Neg(a) => -r(a),
                Op::Pow(a, n) => r(a).ipow(*n),
            };
            self.scalar_regs.push(v);
            self.regs[i * LANES..(i + 1) * LANES].fill(v);
        }
    }

    /// Evaluates at `LANES` points. Returns a bit mask of lanes that hit a
    /// division by zero.
    pub fn eval_lanes(&mut self, pts: &[[f64; LANES]; 3], out: &mut [f64; LANES]) -> u64 {
        let mut errors = if self.invariant_error { u64::MAX } else { 0 };
        for (i, op) in self.tape.ops.iter().enumerate() {
            if !self.varying[i] {
                continue;
            }
            let (lo, hi) = self.regs.split_at_mut(i * LANES);
            let dst = &mut hi[..LANES];
            let src = |j: &u32| &lo[*j as usize * LANES..(*j as usize + 1) * LANES];
            match op {
                Op::Const(_) => unreachable!("constants never vary"),
                Op::Var(var) => dst.copy_from_slice(&pts[*var as usize]),
                Op::Add(a, b) => lanewise(dst, src(a), src(b), |x, y| x + y),
                Op::Sub(a, b) => lanewise(dst, src(a), src(b), |x, y| x - y),
                Op::Mul(a, b) => lanewise(dst, src(a), src(b), |x, y| x * y),
                Op::Div(a, b) => {
                    let (num, den) = (src(a), src(b));
                    for l in 0..LANES {
                        if den[l] == 0.0 {
                            errors |= 1 << l;
                        }
                        dst[l] = num[l] / den[l];
                    }
                }
                Op::Neg(a) => {
                    for (d, s) in dst.iter_mut().zip(src(a)) {
                        *d = -*s;
                    }
                }
                Op::Pow(a, n) => {
                    for (d, s) in dst.iter_mut().zip(src(a)) {
                        *d = s.ipow(*n);
                    }
                }
            }
        }
        let last = self.tape.ops.len() - 1;
        out.copy_from_slice(&self.regs[last * LANES..(last + 1) * LANES]);
        errors
    }

    pub fn moving(&self) -> [bool; 3] {
        self.moving
    }

    /// Single-point evaluation reusing this evaluator's scratch space.
    pub fn eval_point(&mut self, p: Point3) -> Result<f64, EvalError> {
        let mut regs = std::mem::take(&mut self.scalar_regs);
        let r = self.tape.eval_with([p.x, p.y, p.z], &mut regs);
        self.scalar_regs = regs;
        r
    }
}

#[inline(always)]
fn lanewise(dst: &mut [f64], a: &[f64], b: &[f64], f: impl Fn(f64, f64) -> f64) {
    for ((d, x), y) in dst.iter_mut().zip(a).zip(b) {
        *d = f(*x, *y);
    }
}
