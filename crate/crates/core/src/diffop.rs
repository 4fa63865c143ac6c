//! First-order operators `beta*D + alpha`, their chains, and solutions of
//! factorized second-order equations.

use std::fmt;

use num_rational::BigRational;
use num_traits::Signed;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{differentiate, is_zero, normalize, to_latex, to_prefix, Expr, ExprError, Func, Symbol};
use crate::families::{reduction_integral, ReductionKind};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiffOpError {
    #[error("operator has zero leading coefficient")]
    ZeroLeading,
    #[error(transparent)]
    Expr(#[from] ExprError),
}

fn x() -> Symbol {
    Symbol::new("x")
}

fn d(e: &Expr) -> Result<Expr, ExprError> {
    differentiate(e, &x())
}

/// The operator `beta*D + alpha`.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FirstOrderOp {
    #[serde(with = "crate::record::prefix_expr")]
    pub beta: Expr,
    #[serde(with = "crate::record::prefix_expr")]
    pub alpha: Expr,
}

impl FirstOrderOp {
    pub fn new(beta: Expr, alpha: Expr) -> Result<Self, DiffOpError> {
        let beta = normalize(&beta);
        if beta.is_literal_zero() {
            return Err(DiffOpError::ZeroLeading);
        }
        Ok(FirstOrderOp { beta, alpha: normalize(&alpha) })
    }

    /// `D - alpha`.
    pub fn shift(alpha: &Expr) -> Self {
        FirstOrderOp { beta: Expr::one(), alpha: normalize(&-alpha.clone()) }
    }

    /// `D`.
    pub fn derivative() -> Self {
        FirstOrderOp { beta: Expr::one(), alpha: Expr::zero() }
    }

    /// The partner `beta*D - alpha - beta'` of `beta*D + alpha`.
    pub fn partner(&self) -> Result<Self, DiffOpError> {
        let alpha = normalize(&(-self.alpha.clone() - d(&self.beta)?));
        Ok(FirstOrderOp { beta: self.beta.clone(), alpha })
    }

    /// `beta*f' + alpha*f`, normalized.
    pub fn apply(&self, f: &Expr) -> Result<Expr, DiffOpError> {
        let df = d(f)?;
        Ok(normalize(&(&self.beta * &df + &self.alpha * f)))
    }

    pub fn to_latex(&self) -> String {
        let (neg, body) = match self.alpha.as_rational() {
            Some(q) => (q.is_negative(), Expr::rational(q.abs())),
            None => {
                let n = normalize(&-self.alpha.clone());
                let l = to_latex(&n);
                if l.len() < to_latex(&self.alpha).len() {
                    (true, n)
                } else {
                    (false, self.alpha.clone())
                }
            }
        };
        let lead = if self.beta.is_literal_one() { "D".to_string() } else { format!("{} D", to_latex(&self.beta)) };
        if body.is_literal_zero() {
            return format!("\\left({lead}\\right)");
        }
        let sign = if neg { "-" } else { "+" };
        format!("\\left({lead} {sign} {}\\right)", to_latex(&body))
    }
}

impl fmt::Display for FirstOrderOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let lead = if self.beta.is_literal_one() { "D".to_string() } else { format!("({})*D", self.beta) };
        if self.alpha.is_literal_zero() {
            return write!(f, "({lead})");
        }
        let neg = normalize(&-self.alpha.clone());
        if neg.to_string().len() < self.alpha.to_string().len() {
            write!(f, "({lead} - {neg})")
        } else {
            write!(f, "({lead} + {})", self.alpha)
        }
    }
}

impl fmt::Debug for FirstOrderOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(op {} {})", to_prefix(&self.beta), to_prefix(&self.alpha))
    }
}

/// Operators applied in order: `ops[0]` first.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OperatorChain {
    pub ops: Vec<FirstOrderOp>,
}

impl OperatorChain {
    pub fn new(ops: Vec<FirstOrderOp>) -> Self {
        OperatorChain { ops }
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn push(&mut self, op: FirstOrderOp) {
        self.ops.push(op);
    }

    /// Factors written left to right as they act, last-applied first.
    pub fn to_latex(&self) -> String {
        self.ops.iter().rev().map(FirstOrderOp::to_latex).collect::<Vec<_>>().join("")
    }
}

impl fmt::Display for OperatorChain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.ops.is_empty() {
            return f.write_str("1");
        }
        for op in self.ops.iter().rev() {
            write!(f, "{op}")?;
        }
        Ok(())
    }
}

pub fn apply(op: &FirstOrderOp, f: &Expr) -> Result<Expr, DiffOpError> {
    op.apply(f)
}

pub fn apply_chain(chain: &OperatorChain, f: &Expr) -> Result<Expr, DiffOpError> {
    let mut acc = normalize(f);
    for op in &chain.ops {
        acc = op.apply(&acc)?;
    }
    Ok(acc)
}

/// `alpha' + alpha^2 + a0 - lambda`.
pub fn riccati_residual(alpha: &Expr, a0: &Expr, lambda: &Expr) -> Result<Expr, ExprError> {
    let da = d(alpha)?;
    Ok(normalize(&(da + alpha * alpha + a0.clone() - lambda.clone())))
}

/// General solution of `(D - alpha2)(D - alpha1) y = 0`.
pub fn solution_from_factorization(alpha1: &Expr, alpha2: &Expr, c1: &Expr, c2: &Expr) -> Expr {
    let e1 = exp_of_integral(alpha1);
    let e21 = exp_of_integral(&normalize(&(alpha2 - alpha1)));
    let inner = antiderivative(&e21);
    normalize(&(e1 * (c1.clone() + c2.clone() * inner)))
}

fn terms(e: &Expr) -> Vec<Expr> {
    match e {
        Expr::Sum(xs) => xs.to_vec(),
        other => vec![other.clone()],
    }
}

fn factors(e: &Expr) -> Vec<Expr> {
    match e {
        Expr::Product(xs) => xs.to_vec(),
        other => vec![other.clone()],
    }
}

/// Split a term into its x-free coefficient and x-dependent part.
fn split_constant(t: &Expr) -> (Expr, Expr) {
    let var = x();
    let (c, g): (Vec<Expr>, Vec<Expr>) = factors(t).into_iter().partition(|f| !f.contains_symbol(&var));
    (Expr::product(c), Expr::product(g))
}

/// `exp` of an antiderivative of `alpha`, matched termwise against
/// `c`, `c/x` and `k*B'/B`; anything else stays as `exp(int alpha)`.
pub fn exp_of_integral(alpha: &Expr) -> Expr {
    let alpha = normalize(alpha);
    let var = x();
    let mut out: Vec<Expr> = Vec::new();
    let mut rest: Vec<Expr> = Vec::new();
    for t in terms(&alpha) {
        if t.is_literal_zero() {
            continue;
        }
        if !t.contains_symbol(&var) {
            out.push(Expr::exp(t * Expr::x()));
            continue;
        }
        match log_power(&t) {
            Some(e) => out.push(e),
            None => rest.push(t),
        }
    }
    if !rest.is_empty() {
        out.push(Expr::exp(Expr::integral(normalize(&Expr::sum(rest)), &var)));
    }
    normalize(&Expr::product(out))
}

/// `t = k*B'/B` with constant `k` gives `B^k`.
fn log_power(t: &Expr) -> Option<Expr> {
    let var = x();
    for f in factors(t) {
        let Expr::Power(b, e) = &f else { continue };
        if !e.as_rational().is_some_and(|q| q == -BigRational::from_integer(1.into())) {
            continue;
        }
        if !b.contains_symbol(&var) {
            continue;
        }
        let db = d(b).ok()?;
        if is_zero(&db) {
            continue;
        }
        let k = normalize(&(t * &(**b).clone() / db));
        if !k.contains_symbol(&var) {
            return Some((**b).clone().pow(k));
        }
    }
    None
}

fn linear_slope(u: &Expr) -> Option<Expr> {
    let du = d(u).ok()?;
    if du.contains_symbol(&x()) || du.is_literal_zero() {
        None
    } else {
        Some(du)
    }
}

/// Antiderivative by pattern table; unmatched terms become `Integral` nodes.
pub fn antiderivative(f: &Expr) -> Expr {
    let f = normalize(f);
    let var = x();
    let mut out = Vec::new();
    for t in terms(&f) {
        let (c, g) = split_constant(&t);
        let piece = match integrate_kernel(&g) {
            Some(a) => c * a,
            None => c * Expr::integral(g, &var),
        };
        out.push(piece);
    }
    normalize(&Expr::sum(out))
}

fn integrate_kernel(g: &Expr) -> Option<Expr> {
    let var = x();
    if !g.contains_symbol(&var) {
        return Some(g.clone() * Expr::x());
    }
    match g {
        Expr::Var(_) => Some(Expr::frac(1, 2) * Expr::x().powi(2)),
        Expr::Power(b, e) => {
            let q = e.as_rational()?;
            let slope = linear_slope(b);
            if let Some(s) = slope {
                if q == -BigRational::from_integer(1.into()) {
                    return None;
                }
                let k1 = Expr::rational(q + BigRational::from_integer(1.into()));
                return Some((**b).clone().pow(k1.clone()) / (s * k1));
            }
            let k = q.to_integer();
            if !q.is_integer() || k >= 0.into() || k.clone() % 2 != 0.into() {
                return None;
            }
            let j = i64::try_from(-k / num_bigint::BigInt::from(2)).ok()?;
            let (kind, u) = match &**b {
                Expr::Func(Func::Cosh, u) => (ReductionKind::Sech, u),
                Expr::Func(Func::Sinh, u) => (ReductionKind::Csch, u),
                Expr::Func(Func::Cos, u) => (ReductionKind::Sec, u),
                Expr::Func(Func::Sin, u) => (ReductionKind::Csc, u),
                _ => return None,
            };
            let s = linear_slope(u)?;
            let base = reduction_integral(kind, (j - 1) as u32);
            let shifted = base.replace_symbols(&[(var.clone(), (**u).clone())].into_iter().collect());
            Some(shifted / s)
        }
        Expr::Func(f, u) => {
            let s = linear_slope(u)?;
            let u = (**u).clone();
            let anti = match f {
                Func::Exp => Expr::exp(u),
                Func::Sin => -Expr::cos(u),
                Func::Cos => Expr::sin(u),
                Func::Sinh => Expr::cosh(u),
                Func::Cosh => Expr::sinh(u),
            };
            Some(anti / s)
        }
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{normalized_eq, parse_prefix};

    fn p(s: &str) -> Expr {
        parse_prefix(s).unwrap()
    }

    #[test]
    fn apply_examples() {
        let op = FirstOrderOp::shift(&p("(^ x -1)"));
        let r = op.apply(&p("(sin x)")).unwrap();
        assert!(normalized_eq(&r, &p("(+ (cos x) (* -1 (sin x) (^ x -1)))")));
        let r = FirstOrderOp::derivative().apply(&p("(^ x 2)")).unwrap();
        assert_eq!(r, normalize(&p("(* 2 x)")));
        let r = FirstOrderOp::shift(&p("(tanh x)")).apply(&p("(cosh x)")).unwrap();
        assert!(r.is_literal_zero());
    }

    #[test]
    fn zero_leading_rejected() {
        assert_eq!(FirstOrderOp::new(Expr::zero(), Expr::one()), Err(DiffOpError::ZeroLeading));
    }

    #[test]
    fn empty_chain_is_identity() {
        let f = p("(sin x)");
        assert_eq!(apply_chain(&OperatorChain::default(), &f).unwrap(), normalize(&f));
    }

    #[test]
    fn riccati_seeds() {
        assert!(riccati_residual(&p("(^ (+ x c) -1)"), &Expr::zero(), &Expr::zero()).unwrap().is_literal_zero());
        assert!(riccati_residual(&p("(tanh x)"), &Expr::zero(), &Expr::one()).unwrap().is_literal_zero());
        assert!(riccati_residual(&p("(* -1 (tan x))"), &Expr::zero(), &Expr::int(-1)).unwrap().is_literal_zero());
    }

    #[test]
    fn exp_integral_patterns() {
        assert_eq!(exp_of_integral(&p("(* 2 (^ x -1))")), normalize(&p("(^ x 2)")));
        assert_eq!(exp_of_integral(&p("(tanh x)")), normalize(&p("(cosh x)")));
        assert_eq!(exp_of_integral(&p("(* -1 (tan x))")), normalize(&p("(cos x)")));
        assert_eq!(exp_of_integral(&p("3")), normalize(&p("(exp (* 3 x))")));
    }

    #[test]
    fn factorization_solutions() {
        let c1 = Expr::param("c1");
        let c2 = Expr::param("c2");
        let y = solution_from_factorization(&p("(* 2 (^ x -1))"), &p("(* -2 (^ x -1))"), &c1, &c2);
        assert!(normalized_eq(&y, &p("(+ (* c1 (^ x 2)) (* -1/3 c2 (^ x -1)))")));
        let y = solution_from_factorization(&Expr::zero(), &Expr::zero(), &c1, &c2);
        assert!(normalized_eq(&y, &p("(+ c1 (* c2 x))")));
        let y = solution_from_factorization(&p("(* 2 (tanh x))"), &p("(* -2 (tanh x))"), &c1, &c2);
        assert!(!format!("{y:?}").contains("int"));
        let r = normalize(&(d(&d(&y).unwrap()).unwrap() - (Expr::int(4) - Expr::int(2) * p("(^ (cosh x) -2)")) * y));
        assert!(r.is_literal_zero(), "{r}");
    }

    #[test]
    fn antiderivatives() {
        for s in ["(exp (* 3 x))", "(* a (cosh (* 2 x)))", "(^ (+ (* 2 x) 1) 3)", "(^ (cosh (* 2 x)) -4)", "(^ (sin x) -6)"] {
            let f = p(s);
            let a = antiderivative(&f);
            assert!(!format!("{a:?}").contains("int"), "{s}");
            assert!(normalized_eq(&d(&a).unwrap(), &f), "{s}");
        }
        let a = antiderivative(&p("(^ x -1)"));
        assert!(matches!(a, Expr::Integral(..)));
    }
}
