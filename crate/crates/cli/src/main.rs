use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand};

use eidforge_core::eid::{chain, default_window, NormalODE};
use eidforge_core::expr::{parse_prefix, to_prefix, Expr, Symbol};
use eidforge_core::families::{
    base_eigenfunction, factor_chain, solution_operator, FamilyKind, FamilySpec, IterOrder, IteratedForm, SeedForm,
};
use eidforge_core::generate::{
    default_bindings, emit, equation_latex, equation_text, generate, problem_from_record, spec_from_record,
    summarize, to_record, Format, GenerateRequest, OutputForm,
};
use eidforge_core::record::{ProblemRecord, Rendered, TraceEntry};
use eidforge_core::verify::{
    operator_identity_check, residual, sample_points, select_window, OperatorForm, VerificationReport, VerifyOptions,
};
use eidforge_core::Precision;

/// Generate and verify exactly solvable second-order linear ODEs.
#[derive(Parser, Debug)]
#[command(name = "eidforge", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a family member and its general solution.
    Generate(GenerateArgs),
    /// Run a chain of eigenfunction transforms from a JSON list of steps.
    Chain(ChainArgs),
    /// Re-check a saved problem record.
    Verify(VerifyArgs),
    /// Check the operational identities of a family.
    Identities(IdentityArgs),
}

#[derive(Args, Debug, Clone)]
struct CheckArgs {
    /// Lower end of the verification window.
    #[arg(long)]
    window_lo: Option<f64>,
    /// Upper end of the verification window.
    #[arg(long)]
    window_hi: Option<f64>,
    #[arg(long, default_value_t = 1e-8)]
    tolerance: f64,
    /// Seed for point placement.
    #[arg(long, default_value_t = 0)]
    point_seed: u64,
    #[arg(long, default_value_t = 20)]
    points: usize,
}

#[derive(Args, Debug)]
struct GenerateArgs {
    /// rational|exponential|hyperbolic|trigonometric, or lin|expon|hyp|trig.
    #[arg(long, default_value = "rational")]
    family: String,
    #[arg(long, default_value_t = 1)]
    n: u32,
    #[arg(long, default_value = "1")]
    a: String,
    #[arg(long, default_value = "0")]
    b: String,
    #[arg(long, default_value = "1")]
    m: String,
    #[arg(long, default_value = "l")]
    l: String,
    /// expon|hyp|trig
    #[arg(long, default_value = "expon")]
    seed: String,
    #[arg(long, default_value = "c1")]
    c1: String,
    #[arg(long, default_value = "c2")]
    c2: String,
    /// text|latex|json
    #[arg(long, default_value = "text")]
    format: String,
    /// chain|expanded
    #[arg(long, default_value = "expanded")]
    form: String,
    #[arg(long)]
    output: Option<PathBuf>,
    /// Verify the solution and record the result.
    #[arg(long)]
    verify: bool,
    #[command(flatten)]
    check: CheckArgs,
}

#[derive(Args, Debug)]
struct ChainArgs {
    /// JSON list of [eigenfunction, eigenvalue] pairs in prefix notation.
    #[arg(long)]
    input: PathBuf,
    /// Coefficient A of the starting equation y'' + A y = 0.
    #[arg(long, default_value = "(* -1 l)")]
    coeff: String,
    /// Symbol bound to each step's eigenvalue.
    #[arg(long, default_value = "l")]
    spectral: String,
    /// Solution of the starting equation to carry through the chain.
    #[arg(long)]
    solution: Option<String>,
    #[arg(long, default_value = "text")]
    format: String,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long)]
    verify: bool,
    #[command(flatten)]
    check: CheckArgs,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long)]
    input: PathBuf,
    #[command(flatten)]
    check: CheckArgs,
}

#[derive(Args, Debug)]
struct IdentityArgs {
    #[arg(long, default_value = "rational")]
    family: String,
    #[arg(long, default_value_t = 0)]
    n_min: u32,
    #[arg(long, default_value_t = 4)]
    n_max: u32,
    #[arg(long, default_value = "1")]
    a: String,
    #[arg(long, default_value = "0")]
    b: String,
    #[arg(long, default_value = "1")]
    m: String,
    #[arg(long, default_value_t = 1e-9)]
    tolerance: f64,
    #[arg(long, default_value_t = 0)]
    point_seed: u64,
}

/// Usage problems exit with 2, failed checks with 1.
enum Outcome {
    Pass,
    Fail,
}

struct Usage(anyhow::Error);

fn usage<E: Into<anyhow::Error>>(e: E) -> Usage {
    Usage(e.into())
}

fn expr(s: &str, what: &str) -> Result<Expr, Usage> {
    parse_prefix(s).map_err(|e| usage(anyhow!("--{what}: {e}")))
}

fn precision() -> Result<Precision, Usage> {
    match std::env::var("EIDFORGE_PRECISION") {
        Err(_) => Ok(Precision::Double),
        Ok(v) => {
            let bits: u32 = v.trim().parse().map_err(|_| usage(anyhow!("EIDFORGE_PRECISION must be a bit count")))?;
            Precision::from_bits(bits).ok_or_else(|| usage(anyhow!("EIDFORGE_PRECISION={bits} is not supported")))
        }
    }
}

fn options(check: &CheckArgs, default: (f64, f64), bindings: BTreeMap<Symbol, f64>) -> Result<VerifyOptions, Usage> {
    let window = (check.window_lo.unwrap_or(default.0), check.window_hi.unwrap_or(default.1));
    let explicit = check.window_lo.is_some() || check.window_hi.is_some();
    Ok(VerifyOptions {
        window,
        points: check.points,
        seed: check.point_seed,
        tolerance: check.tolerance,
        precision: precision()?,
        bindings,
        adjust_window: !explicit,
    })
}

fn write_out(text: &str, path: Option<&PathBuf>) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn report_line(r: &VerificationReport) -> String {
    format!(
        "{}: max residual {:.3e} on [{:.6}, {:.6}] ({} points, tolerance {:.1e})\n",
        if r.passed { "PASS" } else { "FAIL" },
        r.max_residual,
        r.window.0,
        r.window.1,
        r.per_point.len(),
        r.tolerance
    )
}

fn spec_of(args: &GenerateArgs) -> Result<FamilySpec, Usage> {
    let kind: FamilyKind = args.family.parse().map_err(usage)?;
    let seed: SeedForm = args.seed.parse().map_err(usage)?;
    let spec = FamilySpec {
        kind,
        n: args.n,
        a: expr(&args.a, "a")?,
        b: expr(&args.b, "b")?,
        m: expr(&args.m, "m")?,
        l: expr(&args.l, "l")?,
        seed_form: seed,
        c1: expr(&args.c1, "c1")?,
        c2: expr(&args.c2, "c2")?,
    };
    spec.validate().map_err(usage)?;
    Ok(spec)
}

fn run_generate(args: GenerateArgs) -> Result<Outcome, Usage> {
    let spec = spec_of(&args)?;
    let format: Format = args.format.parse().map_err(|e: String| usage(anyhow!(e)))?;
    let form: OutputForm = args.form.parse().map_err(|e: String| usage(anyhow!(e)))?;
    let problem = generate(&GenerateRequest { spec: spec.clone(), output_form: form }).map_err(usage)?;
    let mut record = to_record(&spec, &problem);
    let mut outcome = Outcome::Pass;
    let mut suffix = String::new();
    if args.verify {
        let opts = options(&args.check, default_window(spec.kind), default_bindings(&spec))?;
        let report = residual(&problem.ode, &problem.solution, &opts).map_err(usage)?;
        if !report.passed {
            outcome = Outcome::Fail;
        }
        record.verification = Some(summarize(&report));
        suffix = report_line(&report);
    }
    let mut text = emit(&problem, format, &record);
    if format == Format::Json {
        text.push('\n');
    } else {
        text.push_str(&suffix);
    }
    write_out(&text, args.output.as_ref()).map_err(usage)?;
    Ok(outcome)
}

fn run_chain(args: ChainArgs) -> Result<Outcome, Usage> {
    let raw = fs::read_to_string(&args.input).with_context(|| format!("reading {}", args.input.display())).map_err(usage)?;
    let pairs: Vec<(String, String)> = serde_json::from_str(&raw).context("steps must be [[eigenfunction, eigenvalue], ...]").map_err(usage)?;
    let steps = pairs
        .iter()
        .map(|(y, l)| Ok((expr(y, "input")?, expr(l, "input")?)))
        .collect::<Result<Vec<_>, Usage>>()?;
    let format: Format = args.format.parse().map_err(|e: String| usage(anyhow!(e)))?;
    let start = NormalODE::with_spectral(expr(&args.coeff, "coeff")?, Symbol::new(&args.spectral));
    let result = chain(&start, &steps).map_err(usage)?;
    let solution = match &args.solution {
        Some(s) => Some(result.transform(&expr(s, "solution")?).map_err(usage)?),
        None => None,
    };
    let mut outcome = Outcome::Pass;
    let mut report = None;
    if args.verify {
        let Some(y) = &solution else { return Err(usage(anyhow!("--verify needs --solution"))) };
        let opts = options(&args.check, (0.1, 2.0), BTreeMap::new())?;
        let r = residual(&result.ode, y, &opts).map_err(usage)?;
        if !r.passed {
            outcome = Outcome::Fail;
        }
        report = Some(r);
    }
    let text = match format {
        Format::Json => {
            let trace: Vec<TraceEntry> = result
                .steps
                .iter()
                .map(|s| TraceEntry {
                    eigenfunction: to_prefix(&s.eigenfunction),
                    eigenvalue: to_prefix(&s.eigenvalue),
                    log_derivative: to_prefix(&s.log_derivative),
                    new_coeff: to_prefix(&s.new_coeff),
                    invertible: s.invertible,
                })
                .collect();
            let value = serde_json::json!({
                "equation": Rendered::with_latex(&result.ode.coeff, equation_latex(&result.ode)),
                "solution": solution.as_ref().map(Rendered::of),
                "trace": trace,
                "verification": report.as_ref().map(summarize),
            });
            serde_json::to_string_pretty(&value).map_err(usage)? + "\n"
        }
        Format::Text | Format::Latex => {
            let latex = format == Format::Latex;
            let mut out = String::new();
            for (i, s) in result.steps.iter().enumerate() {
                let ode = NormalODE { coeff: s.new_coeff.clone(), spectral: result.ode.spectral.clone() };
                let eq = if latex { equation_latex(&ode) } else { equation_text(&ode) };
                out.push_str(&format!("step {}: eigenfunction {} at {}: {}\n", i + 1, s.eigenfunction, s.eigenvalue, eq));
            }
            if let Some(y) = &solution {
                let y = if latex { eidforge_core::expr::to_latex(y) } else { y.to_string() };
                out.push_str(&format!("y = {y}\n"));
            }
            if let Some(r) = &report {
                out.push_str(&report_line(r));
            }
            out
        }
    };
    write_out(&text, args.output.as_ref()).map_err(usage)?;
    Ok(outcome)
}

fn run_verify(args: VerifyArgs) -> Result<Outcome, Usage> {
    let raw = fs::read_to_string(&args.input).with_context(|| format!("reading {}", args.input.display())).map_err(usage)?;
    let record = ProblemRecord::from_json(&raw).map_err(usage)?;
    let spec = spec_from_record(&record).map_err(usage)?;
    let (ode, solution) = problem_from_record(&record).map_err(usage)?;
    let opts = options(&args.check, default_window(spec.kind), default_bindings(&spec))?;
    let report = residual(&ode, &solution, &opts).map_err(usage)?;
    print!("{}", report_line(&report));
    Ok(if report.passed { Outcome::Pass } else { Outcome::Fail })
}

fn run_identities(args: IdentityArgs) -> Result<Outcome, Usage> {
    if args.n_min > args.n_max {
        return Err(usage(anyhow!("--n-min exceeds --n-max")));
    }
    let kind: FamilyKind = args.family.parse().map_err(usage)?;
    let tests = ["(sin x)", "(exp (* 1/2 x))", "(+ (^ x 2) 1)"].map(|s| parse_prefix(s).expect("fixed test function"));
    let mut all = true;
    for n in args.n_min..=args.n_max {
        let spec = FamilySpec::new(kind, n)
            .with_ab(expr(&args.a, "a")?, expr(&args.b, "b")?)
            .with_m(expr(&args.m, "m")?);
        spec.validate().map_err(usage)?;
        let base = base_eigenfunction(&spec).map_err(usage)?;
        let binds = default_bindings(&spec);
        let window = select_window(&[&base.ytilde0.clone().recip()], default_window(kind), &binds).map_err(usage)?;
        let points = sample_points(window.0, window.1, 20, args.point_seed);
        let op = solution_operator(&spec).map_err(usage)?;
        let lowered = IteratedForm {
            prefactor: base.ytilde0.clone().powi(n as i64),
            weight: base.ytilde0.clone().recip(),
            count: n,
            order: IterOrder::DThenWeight,
        };
        let checks = [
            ("chain", OperatorForm::Chain(op.chain.clone()), OperatorForm::Iterated(op.iterated.clone())),
            ("lowered", OperatorForm::Chain(factor_chain(&base.log_derivative, 1, n)), OperatorForm::Iterated(lowered)),
        ];
        for (name, lhs, rhs) in &checks {
            let mut worst = 0.0f64;
            for f in &tests {
                let r = operator_identity_check(lhs, rhs, f, &points, &binds, args.tolerance).map_err(usage)?;
                worst = worst.max(r.max_residual);
            }
            let ok = worst < args.tolerance;
            all &= ok;
            println!("{} n={n} {name}: {} max residual {worst:.3e}", kind, if ok { "PASS" } else { "FAIL" });
        }
    }
    Ok(if all { Outcome::Pass } else { Outcome::Fail })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let result = match cli.command {
        Command::Generate(a) => run_generate(a),
        Command::Chain(a) => run_chain(a),
        Command::Verify(a) => run_verify(a),
        Command::Identities(a) => run_identities(a),
    };
    match result {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::Fail) => ExitCode::from(1),
        Err(Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
