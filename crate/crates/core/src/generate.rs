//! Problem generation for the potential families, output rendering and the
//! JSON record format.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diffop::apply_chain;
use crate::eid::{chain, default_window, EidError, GeneratedProblem, NormalODE, SolutionForm};
use crate::expr::{normalize, parse_prefix, substitute, to_latex, Expr, ExprError, Symbol};
use crate::families::{
    base_eigenfunction, degenerate_level, degenerate_solution, factor_chain, is_resonant, potential, resonant_lambda,
    seed_solution, solution_operator, FamilyError, FamilyKind, FamilySpec, SeedForm,
};
use crate::record::{ProblemRecord, RecordParams, Rendered, TraceEntry, VerificationSummary, FORMAT_VERSION};
use crate::verify::{residual, wronskian_check, VerificationReport, VerifyError, VerifyOptions, WronskianReport};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GenerateError {
    #[error(transparent)]
    Family(#[from] FamilyError),
    #[error(transparent)]
    Eid(#[from] EidError),
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Verify(#[from] VerifyError),
    #[error("record: {0}")]
    Record(String),
}

impl From<crate::diffop::DiffOpError> for GenerateError {
    fn from(e: crate::diffop::DiffOpError) -> Self {
        GenerateError::Eid(e.into())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputForm {
    Chain,
    #[default]
    Expanded,
}

impl FromStr for OutputForm {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "chain" => Ok(OutputForm::Chain),
            "expanded" => Ok(OutputForm::Expanded),
            other => Err(format!("unknown output form {other}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenerateRequest {
    pub spec: FamilySpec,
    pub output_form: OutputForm,
}

impl GenerateRequest {
    pub fn new(spec: FamilySpec) -> Self {
        GenerateRequest { spec, output_form: OutputForm::Expanded }
    }
}

fn constant_symbols(spec: &FamilySpec) -> (Symbol, Symbol) {
    let name = |e: &Expr, d: &str| match e {
        Expr::Param(s) => s.clone(),
        _ => Symbol::new(d),
    };
    (name(&spec.c1, "c1"), name(&spec.c2, "c2"))
}

/// Eigenfunctions `ytilde0^(k+1)` at their eigenvalues, `k = 0..n`.
fn family_eigenpairs(spec: &FamilySpec, ytilde0: &Expr) -> Vec<(Expr, Expr)> {
    let m2 = spec.m.clone() * spec.m.clone();
    (0..spec.n as i64)
        .map(|k| {
            let k1 = Expr::int((k + 1) * (k + 1));
            let lambda = match spec.kind {
                FamilyKind::Rational => Expr::zero(),
                FamilyKind::Exponential | FamilyKind::Hyperbolic => m2.clone() * k1,
                FamilyKind::Trigonometric => -(m2.clone() * k1),
            };
            (normalize(&ytilde0.clone().powi(k + 1)), normalize(&lambda))
        })
        .collect()
}

pub fn generate(req: &GenerateRequest) -> Result<GeneratedProblem, GenerateError> {
    let spec = &req.spec;
    spec.validate()?;
    let ode = potential(spec)?;
    let base = base_eigenfunction(spec)?;
    let start = NormalODE::with_spectral(-Expr::param("l"), Symbol::new("l"));
    let trace = if spec.l.contains_symbol(&Symbol::new("l")) {
        chain(&start, &family_eigenpairs(spec, &base.ytilde0))?.steps
    } else {
        let generic = FamilySpec { l: Expr::param("l"), ..spec.clone() };
        let mut steps = chain(&start.clone(), &family_eigenpairs(&generic, &base.ytilde0))?.steps;
        let at = [(Symbol::new("l"), spec.l.clone())].into_iter().collect();
        for s in &mut steps {
            s.new_coeff = substitute(&s.new_coeff, &at);
            s.first_integral = substitute(&s.first_integral, &at);
            s.invertible = !s.first_integral.is_literal_zero();
        }
        steps
    };
    let constants = constant_symbols(spec);
    if is_resonant(spec) {
        let solution = degenerate_solution(spec)?;
        return Ok(GeneratedProblem { ode, solution, trace, resonant: true, constants, form: SolutionForm::Expanded });
    }
    if let Some(k) = degenerate_level(spec) {
        return Err(FamilyError::DegenerateChain { l: spec.l.to_string(), k }.into());
    }
    let seed = seed_solution(spec.seed_form, &spec.l, &spec.c1, &spec.c2)?;
    let solution = apply_chain(&factor_chain(&base.log_derivative, 1, spec.n), &seed)?;
    let form = match req.output_form {
        OutputForm::Expanded => SolutionForm::Expanded,
        OutputForm::Chain => SolutionForm::Chain { seed, operator: solution_operator(spec)?.iterated },
    };
    Ok(GeneratedProblem { ode, solution, trace, resonant: false, constants, form })
}

/// The same non-resonant solution by repeated `y := y' - i alpha0 y`.
pub fn loop_solution(spec: &FamilySpec) -> Result<Expr, GenerateError> {
    let base = base_eigenfunction(spec)?;
    let x = Symbol::new("x");
    let mut y = seed_solution(spec.seed_form, &spec.l, &spec.c1, &spec.c2)?;
    for i in 1..=spec.n as i64 {
        let dy = crate::expr::differentiate(&y, &x)?;
        y = normalize(&(dy - Expr::int(i) * base.log_derivative.clone() * y));
    }
    Ok(y)
}

/// The two basis solutions obtained by setting one constant to 1 and the
/// other to 0.
pub fn basis(problem: &GeneratedProblem) -> (Expr, Expr) {
    let (c1, c2) = &problem.constants;
    let pick = |a: i64, b: i64| {
        let mut m = BTreeMap::new();
        m.insert(c1.clone(), Expr::int(a));
        m.insert(c2.clone(), Expr::int(b));
        substitute(&problem.solution, &m)
    };
    (pick(1, 0), pick(0, 1))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Text,
    Latex,
    Json,
}

impl FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "text" => Ok(Format::Text),
            "latex" => Ok(Format::Latex),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format {other}")),
        }
    }
}

/// `-A` for `y'' + A y = 0`, i.e. the bracket of `y'' - (...) y = 0`, with
/// the spectral part written first.
pub fn bracket(ode: &NormalODE) -> Expr {
    let e = normalize(&-ode.coeff.clone());
    let sym = ode.spectral.clone().unwrap_or_else(|| Symbol::new("l"));
    if !e.contains_symbol(&sym) {
        return e;
    }
    let free = substitute(&e, &[(sym, Expr::zero())].into_iter().collect());
    let spectral = normalize(&(e.clone() - free.clone()));
    if free.is_literal_zero() || spectral.contains_symbol(&Symbol::new("x")) {
        return e;
    }
    let mut terms = vec![spectral];
    match free {
        Expr::Sum(xs) => terms.extend(xs.iter().cloned()),
        other => terms.push(other),
    }
    Expr::Sum(terms.into())
}

pub fn equation_latex(ode: &NormalODE) -> String {
    format!("y'' - \\left({}\\right) y = 0", to_latex(&bracket(ode)))
}

pub fn equation_text(ode: &NormalODE) -> String {
    format!("y'' - ({})*y = 0", bracket(ode))
}

fn solution_text(p: &GeneratedProblem) -> String {
    match &p.form {
        SolutionForm::Expanded => format!("y = {}", p.solution),
        SolutionForm::Chain { seed, operator } => format!(
            "y = ({})*((({}) D)^{}) D^-1 ({})\n  = {}",
            operator.prefactor, operator.weight, operator.count, seed, p.solution
        ),
    }
}

fn solution_latex(p: &GeneratedProblem) -> String {
    match &p.form {
        SolutionForm::Expanded => format!("y = {}", to_latex(&p.solution)),
        SolutionForm::Chain { seed, operator } => format!(
            "y = {} \\left({} D\\right)^{{{}}} D^{{-1}} \\left({}\\right) = {}",
            to_latex(&operator.prefactor),
            to_latex(&operator.weight),
            operator.count,
            to_latex(seed),
            to_latex(&p.solution)
        ),
    }
}

/// Renders a problem. `record` supplies the family metadata for JSON.
pub fn emit(problem: &GeneratedProblem, format: Format, record: &ProblemRecord) -> String {
    match format {
        Format::Json => record.to_json(),
        Format::Text => {
            let mut out = String::from("y0'' - l*y0 = 0\n");
            for (i, s) in problem.trace.iter().enumerate() {
                let _ = writeln!(
                    out,
                    "step {}: eigenfunction {} at {}; y{}'' - ({})*y{} = 0{}",
                    i + 1,
                    s.eigenfunction,
                    s.eigenvalue,
                    i + 1,
                    bracket(&NormalODE { coeff: s.new_coeff.clone(), spectral: problem.ode.spectral.clone() }),
                    i + 1,
                    if s.invertible { "" } else { " (not invertible)" }
                );
            }
            if !problem.trace.is_empty() {
                let _ = writeln!(out, "{}", equation_text(&problem.ode));
            }
            let _ = writeln!(out, "{}", solution_text(problem));
            out
        }
        Format::Latex => format!("{}\n{}\n", equation_latex(&problem.ode), solution_latex(problem)),
    }
}

fn param_string(e: &Expr) -> String {
    crate::expr::to_prefix(e)
}

/// The JSON record of a family problem.
pub fn to_record(spec: &FamilySpec, problem: &GeneratedProblem) -> ProblemRecord {
    let (c1, c2) = &problem.constants;
    ProblemRecord {
        version: FORMAT_VERSION.to_string(),
        family: spec.kind.name().to_string(),
        n: spec.n,
        params: RecordParams {
            a: param_string(&spec.a),
            b: param_string(&spec.b),
            m: param_string(&spec.m),
            l: param_string(&spec.l),
        },
        seed_form: spec.seed_form.name().to_string(),
        constants: (c1.as_str().to_string(), c2.as_str().to_string()),
        resonant: problem.resonant,
        equation: Rendered::with_latex(&problem.ode.coeff, equation_latex(&problem.ode)),
        solution: Rendered::of(&problem.solution),
        trace: problem
            .trace
            .iter()
            .map(|s| TraceEntry {
                eigenfunction: param_string(&s.eigenfunction),
                eigenvalue: param_string(&s.eigenvalue),
                log_derivative: param_string(&s.log_derivative),
                new_coeff: param_string(&s.new_coeff),
                invertible: s.invertible,
            })
            .collect(),
        verification: None,
    }
}

/// The family spec stored in a record.
pub fn spec_from_record(rec: &ProblemRecord) -> Result<FamilySpec, GenerateError> {
    let kind: FamilyKind = rec.family.parse()?;
    let seed: SeedForm = rec.seed_form.parse()?;
    let p = |s: &str| parse_prefix(s).map_err(GenerateError::from);
    Ok(FamilySpec {
        kind,
        n: rec.n,
        a: p(&rec.params.a)?,
        b: p(&rec.params.b)?,
        m: p(&rec.params.m)?,
        l: p(&rec.params.l)?,
        seed_form: seed,
        c1: Expr::param(&rec.constants.0),
        c2: Expr::param(&rec.constants.1),
    })
}

/// The equation and solution stored in a record.
pub fn problem_from_record(rec: &ProblemRecord) -> Result<(NormalODE, Expr), GenerateError> {
    if rec.version != FORMAT_VERSION {
        return Err(GenerateError::Record(format!("unsupported version {}", rec.version)));
    }
    let coeff = rec.equation.expr()?;
    let sol = rec.solution.expr()?;
    Ok((NormalODE::with_spectral(coeff, Symbol::new("l")), sol))
}

/// Values for `l` and the shape parameters that keep the seed real and
/// avoid the resonant and degenerate levels.
pub fn default_bindings(spec: &FamilySpec) -> BTreeMap<Symbol, f64> {
    let mut out = BTreeMap::new();
    let free = |e: &Expr| e.free_symbols().into_iter().filter(|s| s.as_str() != "x").collect::<Vec<_>>();
    for (i, e) in [&spec.a, &spec.b, &spec.m].into_iter().enumerate() {
        for s in free(e) {
            out.entry(s).or_insert(0.8 + 0.35 * i as f64);
        }
    }
    for s in free(&spec.l) {
        let v = if spec.seed_form == SeedForm::Trig { -2.3 } else { 2.3 };
        out.entry(s).or_insert(v);
    }
    out.entry(Symbol::new("c1")).or_insert(0.9);
    out.entry(Symbol::new("c2")).or_insert(-0.6);
    out
}

/// Options used to verify a family problem.
pub fn verify_options(spec: &FamilySpec) -> VerifyOptions {
    VerifyOptions { window: default_window(spec.kind), bindings: default_bindings(spec), ..VerifyOptions::default() }
}

pub fn verify_problem(problem: &GeneratedProblem, opts: &VerifyOptions) -> Result<VerificationReport, GenerateError> {
    Ok(residual(&problem.ode, &problem.solution, opts)?)
}

pub fn wronskian_of(problem: &GeneratedProblem, opts: &VerifyOptions) -> Result<WronskianReport, GenerateError> {
    let (y1, y2) = basis(problem);
    Ok(wronskian_check(&y1, &y2, opts)?)
}

pub fn summarize(report: &VerificationReport) -> VerificationSummary {
    VerificationSummary { max_residual: report.max_residual, points: report.per_point.len(), window: report.window }
}

/// Resonant `l` for the spec, if any.
pub fn resonant_l(spec: &FamilySpec) -> Option<Expr> {
    resonant_lambda(spec)
}
