//! Lossless s-expression syntax.
//!
//! ```text
//! (+ a b ...)  (* a b ...)  (- a b)  (/ a b)  (^ base exponent)
//! (exp u) (sin u) (cos u) (sinh u) (cosh u) (sqrt u) (int f x)
//! (tan u) (cot u) (sec u) (csc u) (tanh u) (coth u) (sech u) (csch u)
//! 3  -3  3/4  x  l  a_1
//! ```
//!
//! The symbol `x` is the independent variable; any other symbol is a
//! parameter. `lambda` and `λ` are read as `l`.

use std::fmt::Write;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use super::{Expr, ExprError, Func, Symbol, VAR_NAME};

pub fn to_prefix(e: &Expr) -> String {
    let mut s = String::new();
    write_prefix(&mut s, e);
    s
}

fn write_list(out: &mut String, head: &str, items: &[&Expr]) {
    out.push('(');
    out.push_str(head);
    for it in items {
        out.push(' ');
        write_prefix(out, it);
    }
    out.push(')');
}

fn write_prefix(out: &mut String, e: &Expr) {
    match e {
        Expr::Int(i) => {
            let _ = write!(out, "{i}");
        }
        Expr::Rational(q) => {
            let _ = write!(out, "{}/{}", q.numer(), q.denom());
        }
        Expr::Param(s) | Expr::Var(s) => out.push_str(s.as_str()),
        Expr::Sum(xs) => write_list(out, "+", &xs.iter().collect::<Vec<_>>()),
        Expr::Product(xs) => write_list(out, "*", &xs.iter().collect::<Vec<_>>()),
        Expr::Power(b, x) => write_list(out, "^", &[b, x]),
        Expr::Func(f, a) => write_list(out, f.name(), &[a]),
        Expr::Sqrt(a) => write_list(out, "sqrt", &[a]),
        Expr::Integral(f, v) => {
            out.push_str("(int ");
            write_prefix(out, f);
            out.push(' ');
            out.push_str(v.as_str());
            out.push(')');
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Open(usize),
    Close(usize),
    Atom(usize, String),
}

fn tokenize(s: &str) -> Vec<Tok> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut start = 0;
    for (i, c) in s.char_indices() {
        match c {
            '(' | ')' => {
                if !cur.is_empty() {
                    out.push(Tok::Atom(start, std::mem::take(&mut cur)));
                }
                out.push(if c == '(' { Tok::Open(i) } else { Tok::Close(i) });
            }
            c if c.is_whitespace() => {
                if !cur.is_empty() {
                    out.push(Tok::Atom(start, std::mem::take(&mut cur)));
                }
            }
            c => {
                if cur.is_empty() {
                    start = i;
                }
                cur.push(c);
            }
        }
    }
    if !cur.is_empty() {
        out.push(Tok::Atom(start, cur));
    }
    out
}

fn err(pos: usize, msg: impl Into<String>) -> ExprError {
    ExprError::Parse { pos, msg: msg.into() }
}

fn parse_number(pos: usize, s: &str) -> Result<Option<Expr>, ExprError> {
    let body = s.strip_prefix('-').unwrap_or(s);
    if !body.starts_with(|c: char| c.is_ascii_digit()) {
        return Ok(None);
    }
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.parse().map_err(|_| err(pos, format!("bad numerator in {s}")))?;
        let d: BigInt = d.parse().map_err(|_| err(pos, format!("bad denominator in {s}")))?;
        if d.is_zero() {
            return Err(err(pos, "zero denominator"));
        }
        return Ok(Some(Expr::rational(BigRational::new(n, d))));
    }
    if s.contains('.') || s.contains('e') || s.contains('E') {
        let v: f64 = s.parse().map_err(|_| err(pos, format!("bad number {s}")))?;
        let q = BigRational::from_float(v).ok_or_else(|| err(pos, format!("non-finite number {s}")))?;
        return Ok(Some(Expr::rational(q)));
    }
    let n: BigInt = s.parse().map_err(|_| err(pos, format!("bad integer {s}")))?;
    Ok(Some(Expr::Int(n)))
}

fn parse_symbol(pos: usize, s: &str) -> Result<Expr, ExprError> {
    let ok = s.chars().enumerate().all(|(i, c)| c.is_alphabetic() || c == '_' || (i > 0 && c.is_ascii_digit()));
    if !ok {
        return Err(err(pos, format!("invalid symbol {s}")));
    }
    let sym = Symbol::new(s);
    Ok(if sym.as_str() == VAR_NAME { Expr::Var(sym) } else { Expr::Param(sym) })
}

struct Parser {
    toks: Vec<Tok>,
    i: usize,
    len: usize,
}

impl Parser {
    fn expr(&mut self) -> Result<Expr, ExprError> {
        let tok = self.toks.get(self.i).cloned().ok_or_else(|| err(self.len, "unexpected end of input"))?;
        self.i += 1;
        match tok {
            Tok::Close(p) => Err(err(p, "unexpected ')'")),
            Tok::Atom(p, s) => match parse_number(p, &s)? {
                Some(n) => Ok(n),
                None => parse_symbol(p, &s),
            },
            Tok::Open(p) => {
                let head = match self.toks.get(self.i).cloned() {
                    Some(Tok::Atom(_, h)) => h,
                    _ => return Err(err(p, "expected operator after '('")),
                };
                self.i += 1;
                let mut args = Vec::new();
                loop {
                    match self.toks.get(self.i) {
                        Some(Tok::Close(_)) => {
                            self.i += 1;
                            break;
                        }
                        Some(_) => args.push(self.expr()?),
                        None => return Err(err(self.len, "unclosed '('")),
                    }
                }
                build(p, &head, args)
            }
        }
    }
}

fn build(pos: usize, head: &str, mut args: Vec<Expr>) -> Result<Expr, ExprError> {
    let arity = |n: usize, args: &Vec<Expr>| -> Result<(), ExprError> {
        if args.len() == n {
            Ok(())
        } else {
            Err(err(pos, format!("{head} takes {n} argument(s), got {}", args.len())))
        }
    };
    let unary = |f: fn(Expr) -> Expr, args: Vec<Expr>| -> Result<Expr, ExprError> {
        arity(1, &args)?;
        Ok(f(args.into_iter().next().expect("one argument")))
    };
    match head {
        "+" => Ok(Expr::Sum(args.into())),
        "*" => Ok(Expr::Product(args.into())),
        "-" => match args.len() {
            1 => Ok(-args.pop().expect("one argument")),
            2 => {
                let b = args.pop().expect("two arguments");
                let a = args.pop().expect("two arguments");
                Ok(a - b)
            }
            n => Err(err(pos, format!("- takes 1 or 2 arguments, got {n}"))),
        },
        "/" => {
            arity(2, &args)?;
            let b = args.pop().expect("two arguments");
            let a = args.pop().expect("two arguments");
            Ok(a / b)
        }
        "^" => {
            arity(2, &args)?;
            let e = args.pop().expect("two arguments");
            let b = args.pop().expect("two arguments");
            Ok(b.pow(e))
        }
        "exp" => unary(|a| Expr::apply(Func::Exp, a), args),
        "sin" => unary(Expr::sin, args),
        "cos" => unary(Expr::cos, args),
        "sinh" => unary(Expr::sinh, args),
        "cosh" => unary(Expr::cosh, args),
        "sqrt" => unary(Expr::sqrt, args),
        "tan" => unary(Expr::tan, args),
        "cot" => unary(Expr::cot, args),
        "sec" => unary(Expr::sec, args),
        "csc" => unary(Expr::csc, args),
        "tanh" => unary(Expr::tanh, args),
        "coth" => unary(Expr::coth, args),
        "sech" => unary(Expr::sech, args),
        "csch" => unary(Expr::csch, args),
        "int" => {
            arity(2, &args)?;
            let v = args.pop().expect("two arguments");
            let f = args.pop().expect("two arguments");
            match v {
                Expr::Var(s) | Expr::Param(s) => Ok(Expr::integral(f, &s)),
                other => Err(err(pos, format!("integration variable must be a symbol, got {other}"))),
            }
        }
        other => Err(err(pos, format!("unknown operator {other}"))),
    }
}

/// Parse the prefix syntax. `print(parse(s))` reproduces any printed tree.
pub fn parse_prefix(s: &str) -> Result<Expr, ExprError> {
    let toks = tokenize(s);
    let mut p = Parser { toks, i: 0, len: s.len() };
    let e = p.expr()?;
    if let Some(t) = p.toks.get(p.i) {
        let pos = match t {
            Tok::Open(p) | Tok::Close(p) | Tok::Atom(p, _) => *p,
        };
        return Err(err(pos, "trailing input"));
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        for s in ["(+ l (* -2 (^ (cosh x) -2)))", "(int (^ (sin x) -4) x)", "(* 3/4 (sqrt a) (exp (* -1 x)))"] {
            assert_eq!(to_prefix(&parse_prefix(s).unwrap()), s);
        }
    }

    #[test]
    fn errors_carry_positions() {
        match parse_prefix("(+ x (foo 1))") {
            Err(ExprError::Parse { pos, .. }) => assert_eq!(pos, 5),
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse_prefix("(+ x").is_err());
        assert!(parse_prefix("x y").is_err());
        assert!(parse_prefix("1/0").is_err());
    }

    #[test]
    fn aliases() {
        assert_eq!(parse_prefix("lambda").unwrap(), Expr::param("l"));
        assert_eq!(parse_prefix("x").unwrap(), Expr::x());
    }
}
