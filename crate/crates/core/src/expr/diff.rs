use super::{normalize, Expr, ExprError, Func, Symbol};

/// Derivative of `e` with respect to `var`, normalized.
pub fn differentiate(e: &Expr, var: &Symbol) -> Result<Expr, ExprError> {
    Ok(normalize(&raw(e, var)?))
}

fn raw(e: &Expr, var: &Symbol) -> Result<Expr, ExprError> {
    if !e.contains_symbol(var) {
        return Ok(Expr::zero());
    }
    Ok(match e {
        Expr::Int(_) | Expr::Rational(_) | Expr::Param(_) => Expr::zero(),
        Expr::Var(s) => {
            if s == var {
                Expr::one()
            } else {
                Expr::zero()
            }
        }
        Expr::Sum(xs) => Expr::sum(xs.iter().map(|t| raw(t, var)).collect::<Result<Vec<_>, _>>()?),
        Expr::Product(xs) => {
            let mut terms = Vec::new();
            for i in 0..xs.len() {
                if !xs[i].contains_symbol(var) {
                    continue;
                }
                let d = raw(&xs[i], var)?;
                let mut factors: Vec<Expr> = Vec::with_capacity(xs.len());
                for (j, f) in xs.iter().enumerate() {
                    factors.push(if i == j { d.clone() } else { f.clone() });
                }
                terms.push(Expr::product(factors));
            }
            Expr::sum(terms)
        }
        Expr::Power(b, ex) => {
            if ex.contains_symbol(var) {
                return Err(ExprError::Unsupported {
                    op: "differentiate",
                    detail: format!("power with variable exponent: {e}"),
                });
            }
            let ex = (**ex).clone();
            let lowered = (**b).clone().pow(ex.clone() - Expr::one());
            Expr::product([ex, lowered, raw(b, var)?])
        }
        Expr::Func(f, a) => {
            let inner = raw(a, var)?;
            let a = (**a).clone();
            let outer = match f {
                Func::Exp => Expr::exp(a),
                Func::Sin => Expr::cos(a),
                Func::Cos => -Expr::sin(a),
                Func::Sinh => Expr::cosh(a),
                Func::Cosh => Expr::sinh(a),
            };
            outer * inner
        }
        Expr::Sqrt(a) => raw(a, var)? * (Expr::int(2) * Expr::sqrt((**a).clone())).recip(),
        Expr::Integral(f, v) => {
            if v == var {
                (**f).clone()
            } else {
                return Err(ExprError::Unsupported {
                    op: "differentiate",
                    detail: format!("integral in {v} differentiated in {var}"),
                });
            }
        }
    })
}
