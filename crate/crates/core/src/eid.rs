//! Eigenfunction-driven transforms of normal-form equations `y'' + A y = 0`.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::diffop::{exp_of_integral, DiffOpError, FirstOrderOp, OperatorChain};
use crate::families::{FamilyKind, IteratedForm};
use crate::expr::{differentiate, eval_scalar, normalize, EvalContext, Expr, ExprError, Symbol};
use crate::verify::sample_points;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EidError {
    #[error("eigenfunction is identically zero")]
    ZeroEigenfunction,
    #[error("not an eigenfunction at the given eigenvalue (relative residual {residual:e})")]
    NotEigenfunction { residual: f64 },
    #[error("could not evaluate the eigenfunction check at enough points")]
    Unverifiable,
    #[error("first integral vanishes identically; the transform has no inverse")]
    Degenerate,
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    DiffOp(#[from] DiffOpError),
}

/// `y'' + coeff * y = 0`, optionally with a symbol playing the spectral role.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormalODE {
    pub coeff: Expr,
    pub spectral: Option<Symbol>,
}

impl NormalODE {
    pub fn new(coeff: Expr) -> Self {
        NormalODE { coeff: normalize(&coeff), spectral: None }
    }

    pub fn with_spectral(coeff: Expr, spectral: Symbol) -> Self {
        NormalODE { coeff: normalize(&coeff), spectral: Some(spectral) }
    }

    /// The coefficient of the eigenproblem at `lambda`.
    pub fn coeff_at(&self, lambda: &Expr) -> Expr {
        match &self.spectral {
            Some(s) if self.coeff.contains_symbol(s) => {
                normalize(&self.coeff.replace_symbols(&[(s.clone(), lambda.clone())].into_iter().collect()))
            }
            _ => normalize(&(self.coeff.clone() - lambda.clone())),
        }
    }

    /// `y'' + coeff * y` for a candidate `y`.
    pub fn residual(&self, y: &Expr) -> Result<Expr, ExprError> {
        let x = Symbol::new("x");
        let d2 = differentiate(&differentiate(y, &x)?, &x)?;
        Ok(normalize(&(d2 + self.coeff.clone() * y.clone())))
    }
}

impl fmt::Display for NormalODE {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "y'' + ({}) y = 0", self.coeff)
    }
}

fn d(e: &Expr) -> Result<Expr, ExprError> {
    differentiate(e, &Symbol::new("x"))
}

/// 2x2 matrix of expressions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransferMatrix(pub [[Expr; 2]; 2]);

impl TransferMatrix {
    /// Matrix taking `(y, y')` to `(z, z')` for `z = beta y' - alpha y`.
    pub fn new(alpha: &Expr, beta: &Expr, a0: &Expr) -> Result<Self, ExprError> {
        let na = normalize(&-alpha.clone());
        Ok(TransferMatrix([
            [na.clone(), normalize(beta)],
            [normalize(&(-d(alpha)? - beta.clone() * a0.clone())), normalize(&(na + d(beta)?))],
        ]))
    }

    pub fn companion(a0: &Expr) -> Self {
        TransferMatrix([[Expr::zero(), Expr::one()], [normalize(&-a0.clone()), Expr::zero()]])
    }

    pub fn det(&self) -> Expr {
        let m = &self.0;
        normalize(&(m[0][0].clone() * m[1][1].clone() - m[0][1].clone() * m[1][0].clone()))
    }

    pub fn mul(&self, other: &Self) -> Self {
        let (a, b) = (&self.0, &other.0);
        let e = |i: usize, j: usize| normalize(&(a[i][0].clone() * b[0][j].clone() + a[i][1].clone() * b[1][j].clone()));
        TransferMatrix([[e(0, 0), e(0, 1)], [e(1, 0), e(1, 1)]])
    }

    pub fn derivative(&self) -> Result<Self, ExprError> {
        let m = &self.0;
        Ok(TransferMatrix([[d(&m[0][0])?, d(&m[0][1])?], [d(&m[1][0])?, d(&m[1][1])?]]))
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().flatten().all(Expr::is_literal_zero)
    }
}

/// `T' - B T + T A` for companion matrices of `a0` and `b0`.
pub fn intertwining_residual(t: &TransferMatrix, a0: &Expr, b0: &Expr) -> Result<TransferMatrix, ExprError> {
    let dt = t.derivative()?;
    let bt = TransferMatrix::companion(b0).mul(t);
    let ta = t.mul(&TransferMatrix::companion(a0));
    let m = |i: usize, j: usize| normalize(&(dt.0[i][j].clone() - bt.0[i][j].clone() + ta.0[i][j].clone()));
    Ok(TransferMatrix([[m(0, 0), m(0, 1)], [m(1, 0), m(1, 1)]]))
}

/// Conserved quantity of the transform, expressed through `a0`.
pub fn first_integral(alpha: &Expr, beta: &Expr, a0: &Expr) -> Result<Expr, ExprError> {
    let e = alpha.clone() * alpha.clone() - alpha.clone() * d(beta)? + beta.clone() * d(alpha)?
        + a0.clone() * beta.clone() * beta.clone();
    Ok(normalize(&e))
}

/// The same quantity expressed through the target coefficient `b0`.
pub fn first_integral_alt(alpha: &Expr, beta: &Expr, b0: &Expr) -> Result<Expr, ExprError> {
    let db = d(beta)?;
    let e = -(alpha.clone() * db.clone()) - beta.clone() * d(alpha)? + alpha.clone() * alpha.clone()
        + beta.clone() * d(&db)?
        + b0.clone() * beta.clone() * beta.clone();
    Ok(normalize(&e))
}

/// Inverse of `beta D - alpha` on solutions, given its first integral `k`.
pub fn inverse_op(alpha: &Expr, beta: &Expr, k: &Expr) -> Result<FirstOrderOp, EidError> {
    let k = normalize(k);
    if k.is_literal_zero() {
        return Err(EidError::Degenerate);
    }
    let kinv = k.recip();
    let b = normalize(&(-beta.clone() * kinv.clone()));
    let a = normalize(&((d(beta)? - alpha.clone()) * kinv));
    Ok(FirstOrderOp::new(b, a)?)
}

/// Residuals of the two factorization relations between `P = beta D - alpha`
/// and `Q = beta D + alpha - beta'` applied to `f`.
pub fn commutation_residual(
    alpha: &Expr,
    beta: &Expr,
    a0: &Expr,
    k: &Expr,
    f: &Expr,
) -> Result<(Expr, Expr), EidError> {
    let p = FirstOrderOp::new(beta.clone(), normalize(&-alpha.clone()))?;
    let q = FirstOrderOp::new(beta.clone(), normalize(&(alpha.clone() - d(beta)?)))?;
    let b2 = beta.clone() * beta.clone();
    let l0 = |g: &Expr| -> Result<Expr, ExprError> {
        Ok(normalize(&(b2.clone() * (d(&d(g)?)? + a0.clone() * g.clone()))))
    };
    let pq_k = |g: &Expr| -> Result<Expr, EidError> {
        Ok(normalize(&(p.apply(&q.apply(g)?)? + k.clone() * g.clone())))
    };
    let r1 = normalize(&(l0(&q.apply(f)?)? - q.apply(&pq_k(f)?)?));
    let r2 = normalize(&(p.apply(&l0(f)?)? - pq_k(&p.apply(f)?)?));
    Ok((r1, r2))
}

/// Normal form of `y'' + a1 y' + a0 y = 0`: the new coefficient and the
/// factor `y = factor * u`.
pub fn reduce_to_normal_form(a1: &Expr, a0: &Expr) -> Result<(Expr, Expr), ExprError> {
    let coeff = normalize(&(a0.clone() - a1.clone() * a1.clone() * Expr::frac(1, 4) - d(a1)? * Expr::frac(1, 2)));
    let factor = exp_of_integral(&normalize(&(a1.clone() * Expr::frac(-1, 2))));
    Ok((coeff, factor))
}

/// One transform of a chain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainStep {
    pub eigenfunction: Expr,
    pub eigenvalue: Expr,
    pub log_derivative: Expr,
    pub new_coeff: Expr,
    pub invertible: bool,
    pub first_integral: Expr,
}

impl ChainStep {
    pub fn operator(&self) -> FirstOrderOp {
        FirstOrderOp::shift(&self.log_derivative)
    }
}

const CHECK_POINTS: usize = 20;
const CHECK_TOL: f64 = 1e-8;

/// Values for symbols left free in a check.
pub fn test_bindings(e: &Expr) -> BTreeMap<Symbol, f64> {
    e.free_symbols()
        .into_iter()
        .filter(|s| s.as_str() != "x")
        .enumerate()
        .map(|(i, s)| (s, 0.7 + 0.173 * i as f64))
        .collect()
}

fn check_eigen(residual: &Expr, y: &Expr, d2: &Expr) -> Result<(), EidError> {
    if residual.is_literal_zero() {
        return Ok(());
    }
    let binds = test_bindings(&Expr::sum([residual.clone(), y.clone()]));
    let mut ctx = EvalContext::<f64>::new(binds);
    let mut worst = 0.0f64;
    let mut used = 0;
    for p in sample_points(0.15, 1.45, CHECK_POINTS, 0) {
        ctx.set_x(p);
        let (Ok(r), Ok(v), Ok(w)) = (eval_scalar(residual, &ctx), eval_scalar(y, &ctx), eval_scalar(d2, &ctx)) else {
            continue;
        };
        if !(r.is_finite() && v.is_finite() && w.is_finite()) {
            continue;
        }
        used += 1;
        worst = worst.max(r.abs() / 1f64.max(v.abs()).max(w.abs()));
    }
    if used < CHECK_POINTS / 2 {
        return Err(EidError::Unverifiable);
    }
    if worst > CHECK_TOL {
        return Err(EidError::NotEigenfunction { residual: worst });
    }
    Ok(())
}

/// Transforms `ode` with the eigenfunction `ytilde` at `lambda`.
pub fn eid_step(ode: &NormalODE, ytilde: &Expr, lambda: &Expr) -> Result<(NormalODE, ChainStep), EidError> {
    let ytilde = normalize(ytilde);
    if ytilde.is_literal_zero() {
        return Err(EidError::ZeroEigenfunction);
    }
    let a_lambda = ode.coeff_at(lambda);
    let dy = d(&ytilde)?;
    let d2 = d(&dy)?;
    let residual = normalize(&(d2.clone() + a_lambda * ytilde.clone()));
    check_eigen(&residual, &ytilde, &d2)?;
    let alpha = normalize(&(dy / ytilde.clone()));
    let new_coeff = normalize(&(ode.coeff.clone() + Expr::int(2) * d(&alpha)?));
    let k = first_integral(&alpha, &Expr::one(), &ode.coeff)?;
    let step = ChainStep {
        eigenfunction: ytilde,
        eigenvalue: normalize(lambda),
        log_derivative: alpha,
        new_coeff: new_coeff.clone(),
        invertible: !k.is_literal_zero(),
        first_integral: k,
    };
    let next = NormalODE { coeff: new_coeff, spectral: ode.spectral.clone() };
    Ok((next, step))
}

/// A sequence of transforms and the equation it ends at.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EidChain {
    pub start: NormalODE,
    pub ode: NormalODE,
    pub steps: Vec<ChainStep>,
}

impl EidChain {
    pub fn operators(&self) -> OperatorChain {
        OperatorChain::new(self.steps.iter().map(ChainStep::operator).collect())
    }

    /// Carries a solution of the starting equation to the final one.
    pub fn transform(&self, y: &Expr) -> Result<Expr, EidError> {
        Ok(crate::diffop::apply_chain(&self.operators(), y)?)
    }
}

/// Applies [`eid_step`] for each `(eigenfunction, eigenvalue)` pair in turn.
pub fn chain(ode: &NormalODE, eigen: &[(Expr, Expr)]) -> Result<EidChain, EidError> {
    let mut cur = ode.clone();
    let mut steps = Vec::with_capacity(eigen.len());
    for (y, lambda) in eigen {
        let (next, step) = eid_step(&cur, y, lambda)?;
        steps.push(step);
        cur = next;
    }
    Ok(EidChain { start: ode.clone(), ode: cur, steps })
}

/// How a generated solution is presented.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolutionForm {
    Expanded,
    /// `operator` applied to an antiderivative of `seed`.
    Chain { seed: Expr, operator: IteratedForm },
}

/// A generated equation with its general solution. `solution` is always the
/// expanded expression.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratedProblem {
    pub ode: NormalODE,
    pub solution: Expr,
    pub trace: Vec<ChainStep>,
    pub resonant: bool,
    pub constants: (Symbol, Symbol),
    pub form: SolutionForm,
}

/// Verification window for a family when none is given.
pub fn default_window(kind: FamilyKind) -> (f64, f64) {
    match kind {
        FamilyKind::Rational => (0.5, 3.0),
        FamilyKind::Trigonometric => (0.1, 1.4),
        FamilyKind::Exponential | FamilyKind::Hyperbolic => (0.1, 2.0),
    }
}
