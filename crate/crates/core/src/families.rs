//! The four solvable potential families, their operational identities, seed
//! solutions, resonance solutions and reduction integrals.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Signed;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diffop::{antiderivative, apply_chain, FirstOrderOp, OperatorChain};
use crate::eid::NormalODE;
use crate::expr::{
    differentiate, eval_scalar, normalize, normalized_eq, EvalContext, EvalError, Expr, ExprError, Symbol,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FamilyError {
    #[error("invalid family spec: {0}")]
    Invalid(String),
    #[error("seed form {form} needs l {need}, got l = {l}")]
    SeedSign { form: SeedForm, need: &'static str, l: String },
    #[error("l = {l} is not the resonant value {resonant}")]
    NotResonant { l: String, resonant: String },
    #[error("l = {l} makes the operator chain annihilate a seed solution (k = {k})")]
    DegenerateChain { l: String, k: u32 },
    #[error("unknown {what}: {name}")]
    Unknown { what: &'static str, name: String },
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

impl From<crate::diffop::DiffOpError> for FamilyError {
    fn from(e: crate::diffop::DiffOpError) -> Self {
        match e {
            crate::diffop::DiffOpError::Expr(e) => FamilyError::Expr(e),
            other => FamilyError::Invalid(other.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyKind {
    Rational,
    Exponential,
    Hyperbolic,
    Trigonometric,
}

impl FamilyKind {
    pub const ALL: [FamilyKind; 4] =
        [FamilyKind::Rational, FamilyKind::Exponential, FamilyKind::Hyperbolic, FamilyKind::Trigonometric];

    pub fn name(self) -> &'static str {
        match self {
            FamilyKind::Rational => "rational",
            FamilyKind::Exponential => "exponential",
            FamilyKind::Hyperbolic => "hyperbolic",
            FamilyKind::Trigonometric => "trigonometric",
        }
    }

    /// Short token: `lin`, `expon`, `hyp`, `trig`.
    pub fn token(self) -> &'static str {
        match self {
            FamilyKind::Rational => "lin",
            FamilyKind::Exponential => "expon",
            FamilyKind::Hyperbolic => "hyp",
            FamilyKind::Trigonometric => "trig",
        }
    }
}

impl fmt::Display for FamilyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FamilyKind {
    type Err = FamilyError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        FamilyKind::ALL
            .into_iter()
            .find(|k| k.name() == s || k.token() == s)
            .ok_or_else(|| FamilyError::Unknown { what: "family", name: s.to_string() })
    }
}

/// Form of the seed solution of `y'' - l y = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SeedForm {
    Expon,
    Hyp,
    Trig,
}

impl SeedForm {
    pub fn name(self) -> &'static str {
        match self {
            SeedForm::Expon => "expon",
            SeedForm::Hyp => "hyp",
            SeedForm::Trig => "trig",
        }
    }
}

impl fmt::Display for SeedForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SeedForm {
    type Err = FamilyError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "expon" | "exp" => Ok(SeedForm::Expon),
            "hyp" => Ok(SeedForm::Hyp),
            "trig" => Ok(SeedForm::Trig),
            other => Err(FamilyError::Unknown { what: "seed form", name: other.to_string() }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FamilySpec {
    pub kind: FamilyKind,
    pub n: u32,
    pub a: Expr,
    pub b: Expr,
    pub m: Expr,
    pub l: Expr,
    pub seed_form: SeedForm,
    pub c1: Expr,
    pub c2: Expr,
}

impl FamilySpec {
    /// Defaults: `a = 1, b = 0, m = 1`, symbolic `l`, exponential seed.
    pub fn new(kind: FamilyKind, n: u32) -> Self {
        FamilySpec {
            kind,
            n,
            a: Expr::one(),
            b: Expr::zero(),
            m: Expr::one(),
            l: Expr::param("l"),
            seed_form: SeedForm::Expon,
            c1: Expr::param("c1"),
            c2: Expr::param("c2"),
        }
    }

    pub fn with_ab(mut self, a: Expr, b: Expr) -> Self {
        self.a = a;
        self.b = b;
        self
    }

    pub fn with_m(mut self, m: Expr) -> Self {
        self.m = m;
        self
    }

    pub fn with_l(mut self, l: Expr) -> Self {
        self.l = l;
        self
    }

    pub fn with_seed(mut self, seed: SeedForm) -> Self {
        self.seed_form = seed;
        self
    }

    /// Named special cases 1 to 5: rational `x`, `cosh`, `sinh`, `cos`, `sin`.
    pub fn preset(index: u8, n: u32) -> Option<Self> {
        let (kind, a, b) = match index {
            1 => (FamilyKind::Rational, 1, 0),
            2 => (FamilyKind::Hyperbolic, 1, 0),
            3 => (FamilyKind::Hyperbolic, 0, 1),
            4 => (FamilyKind::Trigonometric, 1, 0),
            5 => (FamilyKind::Trigonometric, 0, 1),
            _ => return None,
        };
        Some(FamilySpec::new(kind, n).with_ab(Expr::int(a), Expr::int(b)))
    }

    pub fn validate(&self) -> Result<(), FamilyError> {
        let a = normalize(&self.a);
        let b = normalize(&self.b);
        if a.is_literal_zero() && b.is_literal_zero() {
            return Err(FamilyError::Invalid("a and b are both zero".into()));
        }
        if self.kind != FamilyKind::Rational && normalize(&self.m).is_literal_zero() {
            return Err(FamilyError::Invalid("m is zero".into()));
        }
        if self.kind == FamilyKind::Rational && a.is_literal_zero() {
            return Err(FamilyError::Invalid("rational family needs a != 0".into()));
        }
        check_seed_sign(self.seed_form, &self.l)
    }
}

fn check_seed_sign(form: SeedForm, l: &Expr) -> Result<(), FamilyError> {
    let Some(v) = normalize(l).as_rational() else { return Ok(()) };
    match form {
        SeedForm::Hyp if !v.is_positive() => Err(FamilyError::SeedSign { form, need: "> 0", l: v.to_string() }),
        SeedForm::Trig if !v.is_negative() => Err(FamilyError::SeedSign { form, need: "< 0", l: v.to_string() }),
        _ => Ok(()),
    }
}

/// The eigenfunction every member of a family is built from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BaseEigenfunction {
    pub ytilde0: Expr,
    pub log_derivative: Expr,
}

pub fn base_eigenfunction(spec: &FamilySpec) -> Result<BaseEigenfunction, FamilyError> {
    let (a, b, m) = (spec.a.clone(), spec.b.clone(), spec.m.clone());
    let mx = m.clone() * Expr::x();
    let y = match spec.kind {
        FamilyKind::Rational => a * Expr::x() + b,
        FamilyKind::Exponential => a * Expr::exp(mx.clone()) + b * Expr::exp(-mx),
        FamilyKind::Hyperbolic => a * Expr::cosh(mx.clone()) + b * Expr::sinh(mx),
        FamilyKind::Trigonometric => a * Expr::cos(mx.clone()) + b * Expr::sin(mx),
    };
    let ytilde0 = normalize(&y);
    let dy = differentiate(&ytilde0, &Symbol::new("x"))?;
    let log_derivative = normalize(&(dy / ytilde0.clone()));
    Ok(BaseEigenfunction { ytilde0, log_derivative })
}

fn nn1(n: u32) -> Expr {
    Expr::int(n as i64 * (n as i64 + 1))
}

/// The `W` in `y'' - (l + W) y = 0`.
pub fn potential_term(spec: &FamilySpec) -> Result<Expr, FamilyError> {
    spec.validate()?;
    let base = base_eigenfunction(spec)?;
    let (a, b, m) = (spec.a.clone(), spec.b.clone(), spec.m.clone());
    let k = nn1(spec.n);
    let m2 = m.clone() * m;
    let num = match spec.kind {
        FamilyKind::Rational => k * a.clone() * a,
        FamilyKind::Exponential => Expr::int(-4) * a * b * m2 * k,
        FamilyKind::Hyperbolic => -(k * m2 * (a.clone() * a - b.clone() * b)),
        FamilyKind::Trigonometric => k * m2 * (a.clone() * a + b.clone() * b),
    };
    Ok(normalize(&(num * base.ytilde0.powi(-2))))
}

/// The family equation as `y'' + A y = 0` with `A = -(l + W)`.
pub fn potential(spec: &FamilySpec) -> Result<NormalODE, FamilyError> {
    let w = potential_term(spec)?;
    let coeff = normalize(&-(spec.l.clone() + w));
    Ok(NormalODE::with_spectral(coeff, Symbol::new("l")))
}

/// General solution of `y'' - l y = 0` in the requested form.
pub fn seed_solution(form: SeedForm, l: &Expr, c1: &Expr, c2: &Expr) -> Result<Expr, FamilyError> {
    check_seed_sign(form, l)?;
    let x = Expr::x();
    let e = match form {
        SeedForm::Expon => {
            let k = Expr::sqrt(l.clone()) * x;
            c1.clone() * Expr::exp(k.clone()) + c2.clone() * Expr::exp(-k)
        }
        SeedForm::Hyp => {
            let k = Expr::sqrt(l.clone()) * x;
            c1.clone() * Expr::cosh(k.clone()) + c2.clone() * Expr::sinh(k)
        }
        SeedForm::Trig => {
            let k = Expr::sqrt(-l.clone()) * x;
            c1.clone() * Expr::cos(k.clone()) + c2.clone() * Expr::sin(k)
        }
    };
    Ok(normalize(&e))
}

/// Which side of an operational identity is applied first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum IterOrder {
    /// `prefactor * ((weight) D)^count`
    WeightThenD,
    /// `prefactor * (D (weight))^count`
    DThenWeight,
}

/// `prefactor * (weight . D)^count` or `prefactor * (D . weight)^count`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IteratedForm {
    pub prefactor: Expr,
    pub weight: Expr,
    pub count: u32,
    pub order: IterOrder,
}

impl IteratedForm {
    pub fn apply(&self, f: &Expr) -> Result<Expr, ExprError> {
        let x = Symbol::new("x");
        let mut acc = normalize(f);
        for _ in 0..self.count {
            acc = match self.order {
                IterOrder::WeightThenD => normalize(&(self.weight.clone() * differentiate(&acc, &x)?)),
                IterOrder::DThenWeight => differentiate(&normalize(&(self.weight.clone() * acc)), &x)?,
            };
        }
        Ok(normalize(&(self.prefactor.clone() * acc)))
    }
}

/// Both representations of the family solution operator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolutionOperator {
    /// `ytilde0^(n+1) (ytilde0^-1 D)^(n+1)`
    pub iterated: IteratedForm,
    /// `(D - n alpha0) ... (D - alpha0) D`
    pub chain: OperatorChain,
}

/// Factors `(D - k alpha0)` for `k` from `lo` up to `hi`, applied in that order.
pub fn factor_chain(alpha0: &Expr, lo: u32, hi: u32) -> OperatorChain {
    OperatorChain::new((lo..=hi).map(|k| FirstOrderOp::shift(&(Expr::int(k as i64) * alpha0.clone()))).collect())
}

pub fn solution_operator(spec: &FamilySpec) -> Result<SolutionOperator, FamilyError> {
    spec.validate()?;
    let base = base_eigenfunction(spec)?;
    let iterated = IteratedForm {
        prefactor: normalize(&base.ytilde0.clone().powi(spec.n as i64 + 1)),
        weight: normalize(&base.ytilde0.clone().recip()),
        count: spec.n + 1,
        order: IterOrder::WeightThenD,
    };
    Ok(SolutionOperator { iterated, chain: factor_chain(&base.log_derivative, 0, spec.n) })
}

/// The `l` at which the family operator factorizes globally.
pub fn resonant_lambda(spec: &FamilySpec) -> Option<Expr> {
    let k = Expr::int(spec.n as i64 + 1);
    let m2k2 = spec.m.clone() * spec.m.clone() * k.clone() * k;
    Some(normalize(&match spec.kind {
        FamilyKind::Rational => Expr::zero(),
        FamilyKind::Exponential | FamilyKind::Hyperbolic => m2k2,
        FamilyKind::Trigonometric => -m2k2,
    }))
}

pub fn is_resonant(spec: &FamilySpec) -> bool {
    resonant_lambda(spec).is_some_and(|r| normalized_eq(&r, &spec.l))
}

/// Numeric `l` values below resonance at which the chain loses a solution.
pub fn degenerate_level(spec: &FamilySpec) -> Option<u32> {
    let l = normalize(&spec.l).as_rational()?;
    let m = normalize(&spec.m).as_rational()?;
    if spec.kind == FamilyKind::Rational {
        return None;
    }
    let sign = if spec.kind == FamilyKind::Trigonometric { -1 } else { 1 };
    (1..=spec.n).find(|k| {
        let kk = BigRational::from_integer(BigInt::from(*k as i64 * *k as i64 * sign));
        l == &m * &m * kk
    })
}

/// General solution at the resonant `l`.
pub fn degenerate_solution(spec: &FamilySpec) -> Result<Expr, FamilyError> {
    spec.validate()?;
    let resonant = resonant_lambda(spec).expect("every family has a resonant value");
    if !normalized_eq(&resonant, &spec.l) {
        return Err(FamilyError::NotResonant { l: spec.l.to_string(), resonant: resonant.to_string() });
    }
    let n = spec.n as i64;
    let base = base_eigenfunction(spec)?;
    let (c1, c2) = (spec.c1.clone(), spec.c2.clone());
    if spec.kind == FamilyKind::Rational {
        let y = base.ytilde0;
        return Ok(normalize(&(c1 * y.clone().powi(n + 1) + c2 * y.powi(-n))));
    }
    let weight = resonance_integral(spec, &base.ytilde0)?;
    Ok(normalize(&(base.ytilde0.powi(n + 1) * (c1 + c2 * weight))))
}

/// An antiderivative of `ytilde0^(-2(n+1))`, closed when one of `a`, `b`
/// vanishes.
fn resonance_integral(spec: &FamilySpec, ytilde0: &Expr) -> Result<Expr, FamilyError> {
    let n = spec.n;
    let a_zero = normalize(&spec.a).is_literal_zero();
    let b_zero = normalize(&spec.b).is_literal_zero();
    let integrand = normalize(&ytilde0.clone().powi(-2 * (n as i64 + 1)));
    let kind = match (spec.kind, a_zero, b_zero) {
        (FamilyKind::Hyperbolic, false, true) => Some((ReductionKind::Sech, spec.a.clone())),
        (FamilyKind::Hyperbolic, true, false) => Some((ReductionKind::Csch, spec.b.clone())),
        (FamilyKind::Trigonometric, false, true) => Some((ReductionKind::Sec, spec.a.clone())),
        (FamilyKind::Trigonometric, true, false) => Some((ReductionKind::Csc, spec.b.clone())),
        _ => None,
    };
    match kind {
        Some((k, coef)) => {
            let mx = spec.m.clone() * Expr::x();
            let closed = reduction_integral(k, n).replace_symbols(&[(Symbol::new("x"), mx)].into_iter().collect());
            let scale = coef.powi(-2 * (n as i64 + 1)) * spec.m.clone().recip();
            Ok(normalize(&(scale * closed)))
        }
        None => Ok(antiderivative(&integrand)),
    }
}

/// Kernels with a closed reduction formula for `kernel^(2(n+1))`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReductionKind {
    Sech,
    Csch,
    Sec,
    Csc,
}

impl ReductionKind {
    pub const ALL: [ReductionKind; 4] = [ReductionKind::Sech, ReductionKind::Csch, ReductionKind::Sec, ReductionKind::Csc];

    pub fn kernel(self) -> Expr {
        let x = Expr::x();
        match self {
            ReductionKind::Sech => Expr::sech(x),
            ReductionKind::Csch => Expr::csch(x),
            ReductionKind::Sec => Expr::sec(x),
            ReductionKind::Csc => Expr::csc(x),
        }
    }
}

/// `kernel(x)^(2(n+1))`.
pub fn reduction_integrand(kind: ReductionKind, n: u32) -> Expr {
    normalize(&kind.kernel().powi(2 * (n as i64 + 1)))
}

fn reduction_coef(n: u32, k: u32) -> BigRational {
    let mut num = BigInt::from(1) << k;
    let mut den = BigInt::from(1);
    for j in 0..k {
        num *= BigInt::from(n - j);
        den *= BigInt::from(2 * (n - j) - 1);
    }
    BigRational::new(num, den)
}

/// Closed antiderivative of `kernel(x)^(2(n+1))`.
pub fn reduction_integral(kind: ReductionKind, n: u32) -> Expr {
    let x = Expr::x();
    let kern = kind.kernel();
    let top = 2 * n as i64 + 1;
    let mut inner: Vec<Expr> = Vec::new();
    let lead_sign = if kind == ReductionKind::Csch { -1 } else { 1 };
    inner.push(Expr::int(lead_sign) * kern.clone().powi(top));
    for k in 1..=n {
        let mut c = reduction_coef(n, k);
        if kind == ReductionKind::Csch && k % 2 == 0 {
            c = -c;
        }
        inner.push(Expr::rational(c) * kern.clone().powi(top - 2 * k as i64));
    }
    let outer = match kind {
        ReductionKind::Sech => Expr::sinh(x),
        ReductionKind::Csch => Expr::cosh(x),
        ReductionKind::Sec => Expr::sin(x),
        ReductionKind::Csc => -Expr::cos(x),
    };
    normalize(&(outer * Expr::frac(1, top) * Expr::sum(inner)))
}

/// Max `|chain(f) - iterated(f)|` over the points, with the spec's parameters
/// bound by `bindings` where they are symbolic.
pub fn identity_residual_with(
    spec: &FamilySpec,
    testfn: &Expr,
    points: &[f64],
    bindings: &BTreeMap<Symbol, f64>,
) -> Result<f64, FamilyError> {
    let op = solution_operator(spec)?;
    let lhs = apply_chain(&op.chain, testfn)?;
    let rhs = op.iterated.apply(testfn)?;
    let mut ctx = EvalContext::<f64>::new(bindings.clone());
    let mut worst = 0.0f64;
    for &p in points {
        ctx.set_x(p);
        let l = eval_scalar(&lhs, &ctx)?;
        let r = eval_scalar(&rhs, &ctx)?;
        worst = worst.max((l - r).abs() / 1f64.max(l.abs()));
    }
    Ok(worst)
}

pub fn identity_residual(spec: &FamilySpec, testfn: &Expr, points: &[f64]) -> Result<f64, FamilyError> {
    identity_residual_with(spec, testfn, points, &BTreeMap::new())
}

/// True when `a`, `b`, `m` are free of symbols.
pub fn has_numeric_shape(spec: &FamilySpec) -> bool {
    [&spec.a, &spec.b, &spec.m].iter().all(|e| normalize(e).as_rational().is_some())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_prefix;

    fn p(s: &str) -> Expr {
        parse_prefix(s).unwrap()
    }

    #[test]
    fn potentials_match_named_cases() {
        let ode = potential(&FamilySpec::preset(1, 1).unwrap()).unwrap();
        assert!(normalized_eq(&ode.coeff, &p("(* -1 (+ l (* 2 (^ x -2))))")));
        let ode = potential(&FamilySpec::preset(2, 1).unwrap()).unwrap();
        assert!(normalized_eq(&ode.coeff, &p("(* -1 (+ l (* -2 (^ (cosh x) -2))))")));
        let ode = potential(&FamilySpec::preset(5, 2).unwrap()).unwrap();
        assert!(normalized_eq(&ode.coeff, &p("(* -1 (+ l (* 6 (^ (sin x) -2))))")));
    }

    #[test]
    fn seeds_solve_the_free_equation() {
        let x = Symbol::new("x");
        for form in [SeedForm::Expon, SeedForm::Hyp, SeedForm::Trig] {
            let y = seed_solution(form, &Expr::param("l"), &Expr::param("c1"), &Expr::param("c2")).unwrap();
            let d2 = differentiate(&differentiate(&y, &x).unwrap(), &x).unwrap();
            assert!(normalized_eq(&d2, &(Expr::param("l") * y)), "{form}");
        }
        assert!(seed_solution(SeedForm::Trig, &Expr::int(2), &Expr::one(), &Expr::one()).is_err());
        assert!(seed_solution(SeedForm::Hyp, &Expr::int(-2), &Expr::one(), &Expr::one()).is_err());
    }

    #[test]
    fn resonant_values() {
        let h = FamilySpec::new(FamilyKind::Hyperbolic, 1);
        assert_eq!(resonant_lambda(&h), Some(Expr::int(4)));
        let t = FamilySpec::new(FamilyKind::Trigonometric, 0).with_m(Expr::int(2));
        assert_eq!(resonant_lambda(&t), Some(Expr::int(-4)));
        assert_eq!(resonant_lambda(&FamilySpec::new(FamilyKind::Rational, 3)), Some(Expr::zero()));
    }

    #[test]
    fn reduction_small_cases() {
        assert!(normalized_eq(&reduction_integral(ReductionKind::Sech, 0), &p("(tanh x)")));
        assert!(normalized_eq(&reduction_integral(ReductionKind::Csc, 0), &p("(* -1 (cot x))")));
        assert!(normalized_eq(
            &reduction_integral(ReductionKind::Sech, 1),
            &p("(* 1/3 (sinh x) (+ (^ (sech x) 3) (* 2 (sech x))))")
        ));
        assert!(normalized_eq(
            &reduction_integral(ReductionKind::Csch, 1),
            &p("(+ (* -1/3 (^ (coth x) 3)) (coth x))")
        ));
    }

    #[test]
    fn reduction_derivatives() {
        let x = Symbol::new("x");
        for kind in ReductionKind::ALL {
            for n in 0..=3 {
                let d = differentiate(&reduction_integral(kind, n), &x).unwrap();
                assert_eq!(d, reduction_integrand(kind, n), "{kind:?} {n}");
            }
        }
    }

    #[test]
    fn degenerate_requires_resonance() {
        let spec = FamilySpec::preset(2, 1).unwrap();
        assert!(matches!(degenerate_solution(&spec), Err(FamilyError::NotResonant { .. })));
        let spec = spec.with_l(Expr::int(4));
        let y = degenerate_solution(&spec).unwrap();
        let x = Symbol::new("x");
        let ode = potential(&spec).unwrap();
        let d2 = differentiate(&differentiate(&y, &x).unwrap(), &x).unwrap();
        assert!(normalize(&(d2 + ode.coeff * y)).is_literal_zero());
    }

    #[test]
    fn identity_small_n() {
        let spec = FamilySpec::new(FamilyKind::Rational, 3);
        let r = identity_residual(&spec, &p("(sin x)"), &[0.6, 1.1, 2.3]).unwrap();
        assert!(r < 1e-9);
        let spec = FamilySpec::new(FamilyKind::Hyperbolic, 0);
        let r = identity_residual(&spec, &p("(exp x)"), &[0.3]).unwrap();
        assert_eq!(r, 0.0);
    }

    #[test]
    fn names_and_aliases() {
        assert_eq!("hyp".parse::<FamilyKind>().unwrap(), FamilyKind::Hyperbolic);
        assert_eq!("lin".parse::<FamilyKind>().unwrap(), FamilyKind::Rational);
        assert!("cubic".parse::<FamilyKind>().is_err());
    }
}
