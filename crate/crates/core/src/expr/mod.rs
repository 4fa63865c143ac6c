//! Immutable symbolic expressions over a closed kernel set.
//!
//! Trees are cheap to clone (children sit behind `Arc`) and never mutated.
//! Every transformation returns a new tree. [`normalize`] brings a tree to a
//! canonical rational form; [`differentiate`], [`substitute`] and
//! [`eval_numeric`] are built on top of it.

mod canon;
mod diff;
mod eval;
mod latex;
mod prefix;

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

pub use canon::{denominator_factors, is_zero, normalize, normalized_eq};
pub use diff::differentiate;
pub use eval::{eval_numeric, eval_numeric_with_base, eval_scalar, EvalContext, EvalError, Estimate};
pub use latex::to_latex;
pub use prefix::{parse_prefix, to_prefix};

/// A symbol name for parameters and the independent variable.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Symbol(Arc<str>);

impl Symbol {
    pub fn new(name: &str) -> Self {
        match name {
            "lambda" | "λ" | "ℓ" => Symbol(Arc::from("l")),
            _ => Symbol(Arc::from(name)),
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Symbol {
    fn from(s: &str) -> Self {
        Symbol::new(s)
    }
}

/// The five transcendental kernels.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Func {
    Exp,
    Sin,
    Cos,
    Sinh,
    Cosh,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
        }
    }
}

/// Expression tree node.
///
/// The derived ordering (node kind first, then children) is the fixed total
/// order used for canonical layouts.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Expr {
    Int(BigInt),
    /// Non-integer rational constant.
    Rational(BigRational),
    Param(Symbol),
    Var(Symbol),
    Sum(Arc<[Expr]>),
    Product(Arc<[Expr]>),
    Power(Arc<Expr>, Arc<Expr>),
    Func(Func, Arc<Expr>),
    Sqrt(Arc<Expr>),
    /// Antiderivative of the integrand in the given variable, no constant.
    Integral(Arc<Expr>, Symbol),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExprError {
    #[error("unsupported construct for {op}: {detail}")]
    Unsupported { op: &'static str, detail: String },
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
}

/// Simultaneous substitution map from parameter or variable names.
pub type Bindings = BTreeMap<Symbol, Expr>;

pub const VAR_NAME: &str = "x";

impl Expr {
    pub fn int(v: i64) -> Expr {
        Expr::Int(BigInt::from(v))
    }

    pub fn zero() -> Expr {
        Expr::int(0)
    }

    pub fn one() -> Expr {
        Expr::int(1)
    }

    /// Rational constant, reduced; integers come back as `Int`.
    pub fn rational(q: BigRational) -> Expr {
        if q.is_integer() {
            Expr::Int(q.to_integer())
        } else {
            Expr::Rational(q)
        }
    }

    pub fn frac(num: i64, den: i64) -> Expr {
        Expr::rational(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn param(name: &str) -> Expr {
        Expr::Param(Symbol::new(name))
    }

    /// The independent variable `x`.
    pub fn x() -> Expr {
        Expr::Var(Symbol::new(VAR_NAME))
    }

    pub fn var(name: &str) -> Expr {
        Expr::Var(Symbol::new(name))
    }

    pub fn sum<I: IntoIterator<Item = Expr>>(terms: I) -> Expr {
        let v: Vec<Expr> = terms.into_iter().collect();
        match v.len() {
            0 => Expr::zero(),
            1 => v.into_iter().next().expect("one element"),
            _ => Expr::Sum(v.into()),
        }
    }

    pub fn product<I: IntoIterator<Item = Expr>>(factors: I) -> Expr {
        let v: Vec<Expr> = factors.into_iter().collect();
        match v.len() {
            0 => Expr::one(),
            1 => v.into_iter().next().expect("one element"),
            _ => Expr::Product(v.into()),
        }
    }

    pub fn pow(self, exponent: Expr) -> Expr {
        Expr::Power(Arc::new(self), Arc::new(exponent))
    }

    pub fn powi(self, k: i64) -> Expr {
        self.pow(Expr::int(k))
    }

    pub fn recip(self) -> Expr {
        self.powi(-1)
    }

    pub fn apply(f: Func, arg: Expr) -> Expr {
        Expr::Func(f, Arc::new(arg))
    }

    pub fn exp(arg: Expr) -> Expr {
        Expr::apply(Func::Exp, arg)
    }

    pub fn sin(arg: Expr) -> Expr {
        Expr::apply(Func::Sin, arg)
    }

    pub fn cos(arg: Expr) -> Expr {
        Expr::apply(Func::Cos, arg)
    }

    pub fn sinh(arg: Expr) -> Expr {
        Expr::apply(Func::Sinh, arg)
    }

    pub fn cosh(arg: Expr) -> Expr {
        Expr::apply(Func::Cosh, arg)
    }

    pub fn sqrt(arg: Expr) -> Expr {
        Expr::Sqrt(Arc::new(arg))
    }

    // Display-level kernels, rewritten over the five primitive ones.

    pub fn tan(arg: Expr) -> Expr {
        Expr::sin(arg.clone()) * Expr::cos(arg).recip()
    }

    pub fn cot(arg: Expr) -> Expr {
        Expr::cos(arg.clone()) * Expr::sin(arg).recip()
    }

    pub fn sec(arg: Expr) -> Expr {
        Expr::cos(arg).recip()
    }

    pub fn csc(arg: Expr) -> Expr {
        Expr::sin(arg).recip()
    }

    pub fn tanh(arg: Expr) -> Expr {
        Expr::sinh(arg.clone()) * Expr::cosh(arg).recip()
    }

    pub fn coth(arg: Expr) -> Expr {
        Expr::cosh(arg.clone()) * Expr::sinh(arg).recip()
    }

    pub fn sech(arg: Expr) -> Expr {
        Expr::cosh(arg).recip()
    }

    pub fn csch(arg: Expr) -> Expr {
        Expr::sinh(arg).recip()
    }

    pub fn integral(integrand: Expr, var: &Symbol) -> Expr {
        Expr::Integral(Arc::new(integrand), var.clone())
    }

    /// The value as an exact rational, if this node is a constant literal.
    pub fn as_rational(&self) -> Option<BigRational> {
        match self {
            Expr::Int(i) => Some(BigRational::from_integer(i.clone())),
            Expr::Rational(q) => Some(q.clone()),
            _ => None,
        }
    }

    pub fn as_integer(&self) -> Option<i64> {
        match self {
            Expr::Int(i) => i.to_i64(),
            _ => None,
        }
    }

    pub fn is_literal_zero(&self) -> bool {
        matches!(self, Expr::Int(i) if i.is_zero())
    }

    pub fn is_literal_one(&self) -> bool {
        matches!(self, Expr::Int(i) if i.is_one())
    }

    /// True when `sym` (parameter or variable) occurs anywhere in the tree.
    pub fn contains_symbol(&self, sym: &Symbol) -> bool {
        match self {
            Expr::Int(_) | Expr::Rational(_) => false,
            Expr::Param(s) | Expr::Var(s) => s == sym,
            Expr::Sum(xs) | Expr::Product(xs) => xs.iter().any(|e| e.contains_symbol(sym)),
            Expr::Power(b, e) => b.contains_symbol(sym) || e.contains_symbol(sym),
            Expr::Func(_, a) | Expr::Sqrt(a) => a.contains_symbol(sym),
            Expr::Integral(f, v) => v == sym || f.contains_symbol(sym),
        }
    }

    /// All parameter and variable names in the tree.
    pub fn free_symbols(&self) -> std::collections::BTreeSet<Symbol> {
        let mut out = std::collections::BTreeSet::new();
        self.collect_symbols(&mut out);
        out
    }

    fn collect_symbols(&self, out: &mut std::collections::BTreeSet<Symbol>) {
        match self {
            Expr::Int(_) | Expr::Rational(_) => {}
            Expr::Param(s) | Expr::Var(s) => {
                out.insert(s.clone());
            }
            Expr::Sum(xs) | Expr::Product(xs) => xs.iter().for_each(|e| e.collect_symbols(out)),
            Expr::Power(b, e) => {
                b.collect_symbols(out);
                e.collect_symbols(out);
            }
            Expr::Func(_, a) | Expr::Sqrt(a) => a.collect_symbols(out),
            Expr::Integral(f, v) => {
                out.insert(v.clone());
                f.collect_symbols(out);
            }
        }
    }

    /// Number of nodes.
    pub fn size(&self) -> usize {
        1 + match self {
            Expr::Int(_) | Expr::Rational(_) | Expr::Param(_) | Expr::Var(_) => 0,
            Expr::Sum(xs) | Expr::Product(xs) => xs.iter().map(Expr::size).sum(),
            Expr::Power(b, e) => b.size() + e.size(),
            Expr::Func(_, a) | Expr::Sqrt(a) => a.size(),
            Expr::Integral(f, _) => f.size(),
        }
    }

    /// Structural replacement of symbols, without normalizing.
    pub fn replace_symbols(&self, bindings: &Bindings) -> Expr {
        match self {
            Expr::Int(_) | Expr::Rational(_) => self.clone(),
            Expr::Param(s) | Expr::Var(s) => bindings.get(s).cloned().unwrap_or_else(|| self.clone()),
            Expr::Sum(xs) => Expr::Sum(xs.iter().map(|e| e.replace_symbols(bindings)).collect()),
            Expr::Product(xs) => Expr::Product(xs.iter().map(|e| e.replace_symbols(bindings)).collect()),
            Expr::Power(b, e) => b.replace_symbols(bindings).pow(e.replace_symbols(bindings)),
            Expr::Func(f, a) => Expr::apply(*f, a.replace_symbols(bindings)),
            Expr::Sqrt(a) => Expr::sqrt(a.replace_symbols(bindings)),
            Expr::Integral(f, v) => match bindings.get(v) {
                // Changing the integration variable x -> g(x) turns the
                // antiderivative F(x) into F(g(x)), i.e. the integral of f(g)*g'.
                Some(g) => {
                    let inner = f.replace_symbols(bindings);
                    let dg = differentiate(g, v).unwrap_or_else(|_| Expr::one());
                    Expr::integral(inner * dg, v)
                }
                None => Expr::integral(f.replace_symbols(bindings), v),
            },
        }
    }
}

/// Simultaneous substitution followed by normalization.
pub fn substitute(e: &Expr, bindings: &Bindings) -> Expr {
    normalize(&e.replace_symbols(bindings))
}

/// Convenience for building substitution maps.
pub fn bindings<'a, I: IntoIterator<Item = (&'a str, Expr)>>(pairs: I) -> Bindings {
    pairs.into_iter().map(|(k, v)| (Symbol::new(k), v)).collect()
}

impl From<i64> for Expr {
    fn from(v: i64) -> Self {
        Expr::int(v)
    }
}

impl From<BigRational> for Expr {
    fn from(q: BigRational) -> Self {
        Expr::rational(q)
    }
}

impl Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        Expr::Sum(vec![self, rhs].into())
    }
}

impl Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        Expr::Sum(vec![self, -rhs].into())
    }
}

impl Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        Expr::Product(vec![self, rhs].into())
    }
}

impl Div for Expr {
    type Output = Expr;
    fn div(self, rhs: Expr) -> Expr {
        Expr::Product(vec![self, rhs.recip()].into())
    }
}

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        match self {
            Expr::Int(i) => Expr::Int(-i),
            Expr::Rational(q) => Expr::Rational(-q),
            other => Expr::Product(vec![Expr::int(-1), other].into()),
        }
    }
}

macro_rules! ref_ops {
    ($tr:ident, $m:ident) => {
        impl $tr<&Expr> for &Expr {
            type Output = Expr;
            fn $m(self, rhs: &Expr) -> Expr {
                self.clone().$m(rhs.clone())
            }
        }
    };
}
ref_ops!(Add, add);
ref_ops!(Sub, sub);
ref_ops!(Mul, mul);
ref_ops!(Div, div);

// Infix rendering for the text output format.

fn prec(e: &Expr) -> u8 {
    match e {
        Expr::Sum(_) => 1,
        Expr::Product(_) => 2,
        Expr::Int(i) if i.is_negative() => 1,
        Expr::Rational(_) => 2,
        Expr::Power(..) => 3,
        _ => 4,
    }
}

fn write_wrapped(f: &mut fmt::Formatter<'_>, e: &Expr, min: u8) -> fmt::Result {
    if prec(e) < min {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

fn negated_term(e: &Expr) -> Option<Expr> {
    match e {
        Expr::Int(i) if i.is_negative() => Some(Expr::Int(-i)),
        Expr::Rational(q) if q.is_negative() => Some(Expr::Rational(-q)),
        Expr::Product(xs) => {
            let c = xs.first()?.as_rational()?;
            if !c.is_negative() {
                return None;
            }
            let c = -c;
            let mut rest: Vec<Expr> = xs[1..].to_vec();
            if !c.is_one() {
                rest.insert(0, Expr::rational(c));
            }
            Some(Expr::product(rest))
        }
        _ => None,
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Int(i) => write!(f, "{i}"),
            Expr::Rational(q) => write!(f, "{}/{}", q.numer(), q.denom()),
            Expr::Param(s) | Expr::Var(s) => write!(f, "{s}"),
            Expr::Sum(xs) => {
                for (i, t) in xs.iter().enumerate() {
                    match (i, negated_term(t)) {
                        (0, _) => write_wrapped(f, t, 2)?,
                        (_, Some(n)) => {
                            f.write_str(" - ")?;
                            write_wrapped(f, &n, 2)?;
                        }
                        (_, None) => {
                            f.write_str(" + ")?;
                            write_wrapped(f, t, 2)?;
                        }
                    }
                }
                Ok(())
            }
            Expr::Product(xs) => {
                if let Some(first) = xs.first() {
                    if matches!(first, Expr::Int(i) if *i == BigInt::from(-1)) && xs.len() > 1 {
                        f.write_str("-")?;
                        for (i, t) in xs[1..].iter().enumerate() {
                            if i > 0 {
                                f.write_str("*")?;
                            }
                            write_wrapped(f, t, 3)?;
                        }
                        return Ok(());
                    }
                }
                for (i, t) in xs.iter().enumerate() {
                    match (i, t) {
                        (0, Expr::Int(_)) => write!(f, "{t}")?,
                        (0, _) => write_wrapped(f, t, 3)?,
                        _ => {
                            f.write_str("*")?;
                            write_wrapped(f, t, 3)?;
                        }
                    }
                }
                Ok(())
            }
            Expr::Power(b, e) => {
                write_wrapped(f, b, 4)?;
                f.write_str("^")?;
                match &**e {
                    Expr::Int(_) => write!(f, "{e}"),
                    _ => write!(f, "({e})"),
                }
            }
            Expr::Func(k, a) => write!(f, "{}({a})", k.name()),
            Expr::Sqrt(a) => write!(f, "sqrt({a})"),
            Expr::Integral(g, v) => write!(f, "int({g}, {v})"),
        }
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&to_prefix(self))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symbol_aliases_collapse_to_l() {
        assert_eq!(Symbol::new("lambda"), Symbol::new("l"));
        assert_eq!(Symbol::new("λ"), Symbol::new("l"));
    }

    #[test]
    fn infix_display() {
        let e = Expr::param("l") - Expr::int(2) * Expr::cosh(Expr::x()).powi(-2);
        assert_eq!(e.to_string(), "l - 2*cosh(x)^-2");
    }

    #[test]
    fn contains_and_free_symbols() {
        let e = Expr::sin(Expr::param("m") * Expr::x());
        assert!(e.contains_symbol(&Symbol::new("m")));
        assert!(!e.contains_symbol(&Symbol::new("a")));
        assert_eq!(e.free_symbols().len(), 2);
    }
}
