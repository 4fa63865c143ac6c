//! Numerical checks of generated equations and operator identities.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dd::DoubleDouble;
use crate::diffop::{apply_chain, DiffOpError, OperatorChain};
use crate::eid::{test_bindings, NormalODE};
use crate::expr::{denominator_factors, differentiate, eval_scalar, EvalContext, EvalError, Expr, ExprError, Symbol};
use crate::families::IteratedForm;
use crate::quadrature::{adaptive, GaussLegendre, QuadError};
use crate::scalar::{Precision, Scalar};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VerifyError {
    #[error("no pole-free window of width {width} near [{lo}, {hi}]")]
    Window { lo: f64, hi: f64, width: f64 },
    #[error("invalid window [{lo}, {hi}]")]
    BadWindow { lo: f64, hi: f64 },
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    DiffOp(#[from] DiffOpError),
    #[error("quadrature did not converge (error estimate {error:e})")]
    Quadrature { error: f64 },
}

/// Deterministic low-discrepancy points in `(lo, hi)`.
pub fn sample_points(lo: f64, hi: f64, count: usize, seed: u64) -> Vec<f64> {
    const PHI_INV: f64 = 0.618_033_988_749_894_9;
    let shift = (seed as f64 * 0.754_877_666_246_692_7).fract();
    (0..count)
        .map(|i| {
            let u = (0.5 + shift + (i as f64 + 1.0) * PHI_INV).fract();
            lo + (hi - lo) * u
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyOptions {
    pub window: (f64, f64),
    pub points: usize,
    pub seed: u64,
    pub tolerance: f64,
    pub precision: Precision,
    pub bindings: BTreeMap<Symbol, f64>,
    /// Move the window off poles and domain boundaries.
    pub adjust_window: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            window: (0.1, 2.0),
            points: 20,
            seed: 0,
            tolerance: 1e-8,
            precision: Precision::Double,
            bindings: BTreeMap::new(),
            adjust_window: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub max_residual: f64,
    pub per_point: Vec<(f64, f64)>,
    pub window: (f64, f64),
    pub bindings: BTreeMap<String, f64>,
    pub precision: Precision,
    pub tolerance: f64,
    pub passed: bool,
}

fn with_defaults(exprs: &[&Expr], given: &BTreeMap<Symbol, f64>) -> BTreeMap<Symbol, f64> {
    let mut out = given.clone();
    for e in exprs {
        for (k, v) in test_bindings(e) {
            out.entry(k).or_insert(v);
        }
    }
    out
}

fn eval_all<T: Scalar>(exprs: &[&Expr], ctx: &EvalContext<T>) -> Result<Vec<T>, EvalError> {
    exprs.iter().map(|e| eval_scalar(e, ctx)).collect()
}

fn context<T: Scalar>(bindings: &BTreeMap<Symbol, f64>, base: f64) -> EvalContext<T> {
    EvalContext::new(bindings.iter().map(|(k, v)| (k.clone(), T::from_f64(*v))).collect())
        .with_integral_base(T::from_f64(base))
}

/// Replaces each integral by its integrand: a cheap stand-in with the same
/// poles for window scans.
fn inline_integrals(e: &Expr) -> Expr {
    match e {
        Expr::Sum(xs) => Expr::sum(xs.iter().map(inline_integrals)),
        Expr::Product(xs) => Expr::product(xs.iter().map(inline_integrals)),
        Expr::Power(b, x) => inline_integrals(b).pow(inline_integrals(x)),
        Expr::Func(f, a) => Expr::apply(*f, inline_integrals(a)),
        Expr::Sqrt(a) => Expr::sqrt(inline_integrals(a)),
        Expr::Integral(f, _) => inline_integrals(f),
        _ => e.clone(),
    }
}

/// A window of the same width as `preferred` on which every expression
/// evaluates and no denominator changes sign or comes near zero.
pub fn select_window(
    exprs: &[&Expr],
    preferred: (f64, f64),
    bindings: &BTreeMap<Symbol, f64>,
) -> Result<(f64, f64), VerifyError> {
    let (lo, hi) = preferred;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(VerifyError::BadWindow { lo, hi });
    }
    let w = hi - lo;
    let inlined: Vec<Expr> = exprs.iter().map(|e| inline_integrals(e)).collect();
    let exprs: Vec<&Expr> = inlined.iter().collect();
    let exprs = exprs.as_slice();
    let dens: Vec<Expr> = exprs.iter().flat_map(|e| denominator_factors(e)).collect();
    let den_refs: Vec<&Expr> = dens.iter().collect();
    let mut all: Vec<&Expr> = exprs.to_vec();
    all.extend(den_refs.iter().copied());
    let binds = with_defaults(&all, bindings);
    const GRID: usize = 2000;
    let (glo, ghi) = (lo - 4.0 * w, hi + 4.0 * w);
    let step = (ghi - glo) / GRID as f64;
    let mut ctx = context::<f64>(&binds, lo);
    let mut samples: Vec<Option<Vec<f64>>> = Vec::with_capacity(GRID + 1);
    for i in 0..=GRID {
        ctx.set_x(glo + step * i as f64);
        let ok = eval_all(exprs, &ctx).map(|v| v.iter().all(|y| y.is_finite())).unwrap_or(false);
        samples.push(if ok { eval_all(&den_refs, &ctx).ok() } else { None });
    }
    // local magnitude of each denominator within a quarter window
    let reach = ((0.25 * w / step) as usize).max(1);
    let local_scale = |i: usize, j: usize| -> f64 {
        let (a, b) = (i.saturating_sub(reach), (i + reach).min(GRID));
        samples[a..=b].iter().flatten().map(|s| s[j].abs()).fold(0.0, f64::max)
    };
    let mut good = vec![false; GRID + 1];
    for i in 0..=GRID {
        let Some(s) = &samples[i] else { continue };
        let near = s.iter().enumerate().any(|(j, v)| !v.is_finite() || v.abs() < 1e-3 * local_scale(i, j));
        let flips = i > 0
            && match &samples[i - 1] {
                Some(prev) => prev.iter().zip(s).any(|(a, b)| a.signum() != b.signum()),
                None => false,
            };
        good[i] = !near && !flips;
    }
    // clean runs of grid points as (start, end) abscissae
    let mut runs: Vec<(f64, f64)> = Vec::new();
    let mut start: Option<usize> = None;
    for i in 0..=GRID + 1 {
        let g = i <= GRID && good[i];
        match (g, start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                if i - 1 > s {
                    runs.push((glo + step * s as f64, glo + step * (i - 1) as f64));
                }
                start = None;
            }
            _ => {}
        }
    }
    let centre = 0.5 * (lo + hi);
    let best = runs
        .into_iter()
        .map(|(a, b)| {
            let m = 0.05 * (b - a);
            (a + m, b - m)
        })
        .filter(|(a, b)| b > a)
        .max_by(|x, y| {
            let ov = |r: &(f64, f64)| (r.1.min(hi) - r.0.max(lo)).max(0.0);
            let dist = |r: &(f64, f64)| (centre.clamp(r.0, r.1) - centre).abs();
            ov(x).total_cmp(&ov(y)).then(dist(y).total_cmp(&dist(x))).then((x.1 - x.0).total_cmp(&(y.1 - y.0)))
        })
        .ok_or(VerifyError::Window { lo, hi, width: w })?;
    let (a, b) = best;
    if a <= lo && b >= hi {
        return Ok(preferred);
    }
    if b - a <= w {
        if b - a < 0.05 * w {
            return Err(VerifyError::Window { lo, hi, width: w });
        }
        return Ok((a, b));
    }
    let c = centre.clamp(a + 0.5 * w, b - 0.5 * w);
    Ok((c - 0.5 * w, c + 0.5 * w))
}

struct PointCheck {
    per_point: Vec<(f64, f64)>,
    max: f64,
}

fn residual_points<T: Scalar>(
    y: &Expr,
    d2: &Expr,
    a: &Expr,
    xs: &[f64],
    binds: &BTreeMap<Symbol, f64>,
    base: f64,
) -> Result<PointCheck, EvalError> {
    let mut ctx = context::<T>(binds, base);
    let mut per_point = Vec::with_capacity(xs.len());
    let mut max = 0.0f64;
    for &x in xs {
        ctx.set_x(T::from_f64(x));
        let v = eval_all(&[y, d2, a], &ctx)?;
        let r = (v[1] + v[2] * v[0]).abs().to_f64();
        let scale = 1f64.max(v[0].abs().to_f64()).max(v[1].abs().to_f64());
        let rel = if r.is_finite() { r / scale } else { f64::INFINITY };
        max = max.max(rel);
        per_point.push((x, rel));
    }
    Ok(PointCheck { per_point, max })
}

/// Relative residual `|y'' + A y| / max(1, |y|, |y''|)` of `y` against `ode`.
pub fn residual(ode: &NormalODE, y: &Expr, opts: &VerifyOptions) -> Result<VerificationReport, VerifyError> {
    let x = Symbol::new("x");
    let d2 = differentiate(&differentiate(y, &x)?, &x)?;
    let binds = with_defaults(&[y, &ode.coeff], &opts.bindings);
    let window = if opts.adjust_window {
        select_window(&[y, &d2, &ode.coeff], opts.window, &binds)?
    } else {
        opts.window
    };
    let xs = sample_points(window.0, window.1, opts.points, opts.seed);
    let run = |p: Precision| match p {
        Precision::Double => residual_points::<f64>(y, &d2, &ode.coeff, &xs, &binds, window.0),
        Precision::DoubleDouble => residual_points::<DoubleDouble>(y, &d2, &ode.coeff, &xs, &binds, window.0),
    };
    let mut precision = opts.precision;
    let mut check = run(precision);
    let failed = |c: &Result<PointCheck, EvalError>| match c {
        Ok(c) => !(c.max < opts.tolerance),
        Err(_) => true,
    };
    if precision == Precision::Double && failed(&check) {
        precision = Precision::DoubleDouble;
        check = run(precision);
    }
    let check = check?;
    Ok(VerificationReport {
        max_residual: check.max,
        per_point: check.per_point,
        window,
        bindings: binds.iter().map(|(k, v)| (k.as_str().to_string(), *v)).collect(),
        precision,
        tolerance: opts.tolerance,
        passed: check.max < opts.tolerance,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WronskianReport {
    pub mean: f64,
    pub stdev: f64,
    pub window: (f64, f64),
    pub passed: bool,
}

/// Checks that `W(y1, y2)` is a nonzero constant on the window.
pub fn wronskian_check(y1: &Expr, y2: &Expr, opts: &VerifyOptions) -> Result<WronskianReport, VerifyError> {
    let x = Symbol::new("x");
    let w = crate::expr::normalize(&(y1.clone() * differentiate(y2, &x)? - differentiate(y1, &x)? * y2.clone()));
    let binds = with_defaults(&[y1, y2], &opts.bindings);
    let window = if opts.adjust_window { select_window(&[y1, y2, &w], opts.window, &binds)? } else { opts.window };
    let xs = sample_points(window.0, window.1, opts.points, opts.seed);
    let mut ctx = context::<DoubleDouble>(&binds, window.0);
    let mut vals = Vec::with_capacity(xs.len());
    for x in xs {
        ctx.set_x(DoubleDouble::from(x));
        vals.push(eval_scalar(&w, &ctx)?.to_f64());
    }
    let n = vals.len() as f64;
    let mean = vals.iter().sum::<f64>() / n;
    let stdev = (vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
    let passed = mean.abs() > 1e-12 && stdev < 1e-9 * mean.abs();
    Ok(WronskianReport { mean, stdev, window, passed })
}

/// One side of an operator identity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OperatorForm {
    Chain(OperatorChain),
    Iterated(IteratedForm),
}

impl OperatorForm {
    pub fn apply(&self, f: &Expr) -> Result<Expr, VerifyError> {
        Ok(match self {
            OperatorForm::Chain(c) => apply_chain(c, f)?,
            OperatorForm::Iterated(it) => it.apply(f)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub max_residual: f64,
    pub points: usize,
    pub passed: bool,
}

/// Compares two operator forms applied to `f` at the given points. The
/// residual is relative to `max(1, |lhs|)`.
pub fn operator_identity_check(
    lhs: &OperatorForm,
    rhs: &OperatorForm,
    f: &Expr,
    points: &[f64],
    bindings: &BTreeMap<Symbol, f64>,
    tolerance: f64,
) -> Result<IdentityReport, VerifyError> {
    let l = lhs.apply(f)?;
    let r = rhs.apply(f)?;
    let binds = with_defaults(&[&l, &r], bindings);
    let mut ctx = context::<DoubleDouble>(&binds, 0.0);
    let mut worst = 0.0f64;
    for &x in points {
        ctx.set_x(DoubleDouble::from(x));
        let a = eval_scalar(&l, &ctx)?;
        let b = eval_scalar(&r, &ctx)?;
        worst = worst.max((a - b).abs().to_f64() / 1f64.max(a.abs().to_f64()));
    }
    Ok(IdentityReport { max_residual: worst, points: points.len(), passed: worst < tolerance })
}

/// Definite integral of `integrand` over `[lo, hi]`.
pub fn quadrature(
    integrand: &Expr,
    lo: f64,
    hi: f64,
    bindings: &BTreeMap<Symbol, f64>,
    precision: Precision,
) -> Result<f64, VerifyError> {
    fn run<T: Scalar>(e: &Expr, lo: f64, hi: f64, b: &BTreeMap<Symbol, f64>) -> Result<f64, VerifyError> {
        let mut ctx = context::<T>(b, lo);
        let rule = GaussLegendre::<T>::new(20);
        let tol = T::epsilon() * T::from_f64(256.0);
        let mut f = |x: T| {
            ctx.set_x(x);
            eval_scalar(e, &ctx)
        };
        match adaptive(&rule, &mut f, T::from_f64(lo), T::from_f64(hi), tol, 40) {
            Ok(q) => Ok(q.value.to_f64()),
            Err(QuadError::Integrand(e)) => Err(e.into()),
            Err(QuadError::NotConverged { error, .. }) => Err(VerifyError::Quadrature { error: error.to_f64() }),
        }
    }
    match precision {
        Precision::Double => run::<f64>(integrand, lo, hi, bindings),
        Precision::DoubleDouble => run::<DoubleDouble>(integrand, lo, hi, bindings),
    }
}
