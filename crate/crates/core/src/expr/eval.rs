use std::collections::BTreeMap;

use num_traits::{Signed, ToPrimitive};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Expr, Func, Symbol, VAR_NAME};
use crate::dd::DoubleDouble;
use crate::quadrature::{adaptive, GaussLegendre, QuadError};
use crate::scalar::{Precision, Scalar};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("pole at {expr}")]
    Pole { expr: String },
    #[error("outside the real domain: {expr}")]
    Domain { expr: String },
    #[error("unbound symbol {0}")]
    Unbound(String),
    #[error("quadrature did not converge for {expr}")]
    Quadrature { expr: String },
    #[error("unsupported precision of {0} bits")]
    Precision(u32),
    #[error("power with non-constant exponent: {expr}")]
    Unsupported { expr: String },
}

/// Symbol values and integration settings for one evaluation.
#[derive(Debug, Clone)]
pub struct EvalContext<T> {
    pub values: BTreeMap<Symbol, T>,
    /// Lower limit used for `Integral` nodes.
    pub integral_base: T,
    rule: GaussLegendre<T>,
    tol: T,
}

impl<T: Scalar> EvalContext<T> {
    pub fn new(values: BTreeMap<Symbol, T>) -> Self {
        EvalContext {
            values,
            integral_base: T::zero(),
            rule: GaussLegendre::new(20),
            tol: T::epsilon() * T::from_f64(64.0),
        }
    }

    pub fn with_integral_base(mut self, base: T) -> Self {
        self.integral_base = base;
        self
    }

    pub fn set(&mut self, name: &str, v: T) {
        self.values.insert(Symbol::new(name), v);
    }

    pub fn set_x(&mut self, v: T) {
        self.set(VAR_NAME, v);
    }
}

fn pole(e: &Expr) -> EvalError {
    EvalError::Pole { expr: e.to_string() }
}

fn finite<T: Scalar>(v: T, e: &Expr) -> Result<T, EvalError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(pole(e))
    }
}

/// Evaluate `e` in the scalar type `T`.
pub fn eval_scalar<T: Scalar>(e: &Expr, ctx: &EvalContext<T>) -> Result<T, EvalError> {
    match e {
        Expr::Int(i) => Ok(T::from_bigint(i)),
        Expr::Rational(q) => Ok(T::from_rational(q)),
        Expr::Param(s) | Expr::Var(s) => ctx.values.get(s).copied().ok_or_else(|| EvalError::Unbound(s.to_string())),
        Expr::Sum(xs) => {
            let mut acc = T::zero();
            for x in xs.iter() {
                acc = acc + eval_scalar(x, ctx)?;
            }
            finite(acc, e)
        }
        Expr::Product(xs) => {
            let mut acc = T::one();
            for x in xs.iter() {
                acc = acc * eval_scalar(x, ctx)?;
            }
            finite(acc, e)
        }
        Expr::Power(b, x) => {
            let bv = eval_scalar(b, ctx)?;
            match &**x {
                Expr::Int(k) => {
                    let k = k.to_i32().ok_or_else(|| EvalError::Unsupported { expr: e.to_string() })?;
                    if k < 0 && bv == T::zero() {
                        return Err(pole(e));
                    }
                    finite(bv.powi(k), e)
                }
                Expr::Rational(q) => {
                    if bv < T::zero() {
                        return Err(EvalError::Domain { expr: e.to_string() });
                    }
                    if q.is_negative() && bv == T::zero() {
                        return Err(pole(e));
                    }
                    if bv == T::zero() {
                        return Ok(T::zero());
                    }
                    // sqrt is correctly rounded; route halves through it.
                    let twice = q * num_rational::BigRational::from_integer(2.into());
                    if twice.is_integer() {
                        let k = twice.to_integer().to_i32().ok_or_else(|| EvalError::Unsupported { expr: e.to_string() })?;
                        return finite(bv.sqrt().powi(k), e);
                    }
                    finite(bv.powf(T::from_rational(q)), e)
                }
                other => {
                    let xv = eval_scalar(other, ctx)?;
                    if bv <= T::zero() {
                        return Err(if bv == T::zero() { pole(e) } else { EvalError::Domain { expr: e.to_string() } });
                    }
                    finite(bv.powf(xv), e)
                }
            }
        }
        Expr::Func(f, a) => {
            let v = eval_scalar(a, ctx)?;
            let r = match f {
                Func::Exp => v.exp(),
                Func::Sin => v.sin(),
                Func::Cos => v.cos(),
                Func::Sinh => v.sinh(),
                Func::Cosh => v.cosh(),
            };
            finite(r, e)
        }
        Expr::Sqrt(a) => {
            let v = eval_scalar(a, ctx)?;
            if v < T::zero() {
                return Err(EvalError::Domain { expr: e.to_string() });
            }
            Ok(v.sqrt())
        }
        Expr::Integral(f, var) => {
            let upper = ctx.values.get(var).copied().ok_or_else(|| EvalError::Unbound(var.to_string()))?;
            let mut inner = ctx.clone();
            let mut integrand = |t: T| {
                inner.values.insert(var.clone(), t);
                eval_scalar(f, &inner)
            };
            let scale = T::one().max_of((upper - ctx.integral_base).abs());
            match adaptive(&ctx.rule, &mut integrand, ctx.integral_base, upper, ctx.tol * scale, 40) {
                Ok(q) => finite(q.value, e),
                Err(QuadError::Integrand(err)) => Err(err),
                Err(QuadError::NotConverged { .. }) => Err(EvalError::Quadrature { expr: e.to_string() }),
            }
        }
    }
}

/// A numeric value with an error bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    /// Low word of the double-double value; zero at double precision.
    pub lo: f64,
    pub error_bound: f64,
    pub precision: Precision,
}

/// Evaluate at a point with at least `bits` significand bits of working
/// precision; integrals start at zero.
pub fn eval_numeric(e: &Expr, point: &BTreeMap<Symbol, f64>, bits: u32) -> Result<Estimate, EvalError> {
    eval_numeric_with_base(e, point, bits, 0.0)
}

pub fn eval_numeric_with_base(
    e: &Expr,
    point: &BTreeMap<Symbol, f64>,
    bits: u32,
    integral_base: f64,
) -> Result<Estimate, EvalError> {
    let precision = Precision::from_bits(bits).ok_or(EvalError::Precision(bits))?;
    let dd_ctx = EvalContext::new(point.iter().map(|(k, v)| (k.clone(), DoubleDouble::from(*v))).collect())
        .with_integral_base(DoubleDouble::from(integral_base));
    let dd = eval_scalar(e, &dd_ctx)?;
    let f_ctx = EvalContext::new(point.clone()).with_integral_base(integral_base);
    let fv = eval_scalar(e, &f_ctx);
    let ddv = dd.hi() + dd.lo();
    let delta = match fv {
        Ok(v) => (ddv - v).abs(),
        Err(_) => f64::EPSILON * ddv.abs(),
    };
    Ok(match precision {
        Precision::Double => Estimate {
            value: fv.unwrap_or(ddv),
            lo: 0.0,
            error_bound: delta.max(f64::EPSILON * ddv.abs()),
            precision,
        },
        Precision::DoubleDouble => {
            let eps = DoubleDouble::EPSILON.hi();
            Estimate {
                value: dd.hi(),
                lo: dd.lo(),
                error_bound: (delta * eps / f64::EPSILON).max(eps * ddv.abs()),
                precision,
            }
        }
    })
}
