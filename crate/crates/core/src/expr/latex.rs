use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed};

use super::{Expr, Func};

/// LaTeX rendering. Quotients of kernels are written as negative powers;
/// any other quotient becomes `\frac`.
pub fn to_latex(e: &Expr) -> String {
    let (neg, body) = split_sign(e);
    let s = render(&body);
    if neg {
        format!("-{s}")
    } else {
        s
    }
}

fn split_sign(e: &Expr) -> (bool, Expr) {
    match e {
        Expr::Int(i) if i.is_negative() => (true, Expr::Int(-i)),
        Expr::Rational(q) if q.is_negative() => (true, Expr::Rational(-q)),
        Expr::Product(xs) => match xs.first().and_then(Expr::as_rational) {
            Some(c) if c.is_negative() => {
                let c = -c;
                let mut rest: Vec<Expr> = Vec::with_capacity(xs.len());
                if !c.is_one() {
                    rest.push(Expr::rational(c));
                }
                rest.extend(xs[1..].iter().cloned());
                (true, Expr::product(rest))
            }
            _ => (false, e.clone()),
        },
        _ => (false, e.clone()),
    }
}

fn symbol(name: &str) -> String {
    if let Some((a, b)) = name.split_once('_') {
        return format!("{a}_{{{b}}}");
    }
    let stem = name.trim_end_matches(|c: char| c.is_ascii_digit());
    if stem.is_empty() || stem.len() == name.len() {
        name.to_string()
    } else {
        format!("{stem}_{{{}}}", &name[stem.len()..])
    }
}

fn rational(q: &BigRational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("\\frac{{{}}}{{{}}}", q.numer(), q.denom())
    }
}

fn is_kernel(e: &Expr) -> bool {
    matches!(e, Expr::Func(f, _) if *f != Func::Exp)
}

fn simple_arg(e: &Expr) -> bool {
    matches!(e, Expr::Var(_) | Expr::Param(_) | Expr::Int(_))
}

fn func_name(f: Func) -> &'static str {
    match f {
        Func::Exp => "\\exp",
        Func::Sin => "\\sin",
        Func::Cos => "\\cos",
        Func::Sinh => "\\sinh",
        Func::Cosh => "\\cosh",
    }
}

fn render_func(f: Func, a: &Expr) -> String {
    if f == Func::Exp {
        return format!("e^{{{}}}", to_latex(a));
    }
    if simple_arg(a) {
        format!("{} {}", func_name(f), render(a))
    } else {
        format!("{}\\left({}\\right)", func_name(f), to_latex(a))
    }
}

fn wrap(e: &Expr) -> String {
    match e {
        Expr::Sum(_) => format!("\\left({}\\right)", to_latex(e)),
        Expr::Product(_) => format!("\\left({}\\right)", to_latex(e)),
        Expr::Int(i) if i.is_negative() => format!("\\left({i}\\right)"),
        Expr::Rational(_) => format!("\\left({}\\right)", to_latex(e)),
        _ => render(e),
    }
}

fn render_power(b: &Expr, x: &Expr) -> String {
    if let Some(q) = x.as_rational() {
        let half = BigRational::new(BigInt::from(1), BigInt::from(2));
        if q == half {
            return format!("\\sqrt{{{}}}", to_latex(b));
        }
        let base = if is_kernel(b) || matches!(b, Expr::Func(..) | Expr::Power(..)) {
            format!("\\left({}\\right)", render(b))
        } else {
            wrap(b)
        };
        return format!("{base}^{{{}}}", exponent(&q));
    }
    format!("{}^{{{}}}", wrap(b), to_latex(x))
}

fn exponent(q: &BigRational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

fn render_product(xs: &[Expr]) -> String {
    let mut coef: Option<BigRational> = None;
    let mut num: Vec<String> = Vec::new();
    let mut den: Vec<(Expr, BigRational)> = Vec::new();
    for f in xs {
        if let Some(c) = f.as_rational() {
            coef = Some(coef.map_or(c.clone(), |k| k * c));
            continue;
        }
        if let Expr::Power(b, x) = f {
            if let Some(q) = x.as_rational() {
                if q.is_negative() {
                    den.push(((**b).clone(), -q));
                    continue;
                }
            }
        }
        num.push(match f {
            Expr::Sum(_) => wrap(f),
            _ => render(f),
        });
    }
    let all_kernels = den.iter().all(|(b, _)| is_kernel(b));
    if den.is_empty() || all_kernels {
        let mut parts: Vec<String> = Vec::new();
        if let Some(c) = &coef {
            if !c.is_one() || (num.is_empty() && den.is_empty()) {
                parts.push(rational(c));
            }
        }
        parts.extend(num);
        for (b, q) in &den {
            parts.push(format!("\\left({}\\right)^{{-{}}}", render(b), exponent(q)));
        }
        if parts.is_empty() {
            return "1".into();
        }
        return parts.join(" ");
    }
    let mut top: Vec<String> = Vec::new();
    let mut bottom: Vec<String> = Vec::new();
    if let Some(c) = &coef {
        if !c.numer().is_one() {
            top.push(c.numer().to_string());
        }
        if !c.denom().is_one() {
            bottom.push(c.denom().to_string());
        }
    }
    top.extend(num);
    for (b, q) in &den {
        bottom.push(if q.is_one() {
            match b {
                Expr::Sum(_) if den.len() + bottom.len() > 1 => wrap(b),
                _ => render(b),
            }
        } else {
            render_power(b, &Expr::rational(q.clone()))
        });
    }
    let top = if top.is_empty() { "1".to_string() } else { top.join(" ") };
    format!("\\frac{{{top}}}{{{}}}", bottom.join(" "))
}

fn render(e: &Expr) -> String {
    match e {
        Expr::Int(i) => i.to_string(),
        Expr::Rational(q) => rational(q),
        Expr::Param(s) | Expr::Var(s) => symbol(s.as_str()),
        Expr::Sum(xs) => {
            let mut out = String::new();
            for (i, t) in xs.iter().enumerate() {
                let (neg, body) = split_sign(t);
                let s = match &body {
                    Expr::Sum(_) => wrap(&body),
                    _ => render(&body),
                };
                match (i, neg) {
                    (0, true) => out.push_str(&format!("-{s}")),
                    (0, false) => out.push_str(&s),
                    (_, true) => out.push_str(&format!(" - {s}")),
                    (_, false) => out.push_str(&format!(" + {s}")),
                }
            }
            out
        }
        Expr::Product(xs) => render_product(xs),
        Expr::Power(b, x) => {
            if let Some(q) = x.as_rational() {
                if q.is_negative() {
                    return render_product(std::slice::from_ref(e));
                }
            }
            render_power(b, x)
        }
        Expr::Func(f, a) => render_func(*f, a),
        Expr::Sqrt(a) => format!("\\sqrt{{{}}}", to_latex(a)),
        Expr::Integral(f, v) => format!("\\int {} \\, d{}", to_latex(f), v),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_prefix;

    fn l(s: &str) -> String {
        to_latex(&parse_prefix(s).unwrap())
    }

    #[test]
    fn kernel_quotients_as_negative_powers() {
        assert_eq!(l("(+ l (* -2 (^ (cosh x) -2)))"), "l - 2 \\left(\\cosh x\\right)^{-2}");
    }

    #[test]
    fn general_quotients_as_frac() {
        assert_eq!(l("(* 2 (^ (+ x 1) -1))"), "\\frac{2}{x + 1}");
        assert_eq!(l("(* 1/2 (^ x 3))"), "\\frac{1}{2} x^{3}");
    }

    #[test]
    fn radicals_and_exponentials() {
        assert_eq!(l("(* (sqrt l) (exp (* (sqrt l) x)))"), "\\sqrt{l} e^{\\sqrt{l} x}");
        assert_eq!(l("(sin (* 2 x))"), "\\sin\\left(2 x\\right)");
        assert_eq!(l("(^ (cos x) 2)"), "\\left(\\cos x\\right)^{2}");
        assert_eq!(l("(* c1 y_0)"), "c_{1} y_{0}");
    }
}
