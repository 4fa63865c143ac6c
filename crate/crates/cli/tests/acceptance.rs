//! Acceptance suite: one line per criterion, non-zero exit on any failure.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::{Command, ExitCode};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use eidforge_core::diffop::FirstOrderOp;
use eidforge_core::eid::{
    commutation_residual, default_window, eid_step, first_integral, intertwining_residual, inverse_op, EidError,
    NormalODE, TransferMatrix,
};
use eidforge_core::expr::{
    differentiate, eval_scalar, normalize, normalized_eq, parse_prefix, substitute, EvalContext, Expr, Symbol,
};
use eidforge_core::families::{
    base_eigenfunction, factor_chain, reduction_integral, reduction_integrand, resonant_lambda, solution_operator,
    FamilyKind, FamilySpec, IterOrder, IteratedForm, ReductionKind, SeedForm,
};
use eidforge_core::generate::{generate, problem_from_record, verify_options, GenerateRequest};
use eidforge_core::record::ProblemRecord;
use eidforge_core::verify::{
    operator_identity_check, quadrature, residual, sample_points, select_window, OperatorForm, VerifyOptions,
};
use eidforge_core::{DoubleDouble, Precision, Scalar};

type Outcome = Result<String, String>;

fn p(s: &str) -> Expr {
    parse_prefix(s).unwrap_or_else(|e| panic!("{s}: {e}"))
}

fn sym(s: &str) -> Symbol {
    Symbol::new(s)
}

fn binds(pairs: &[(&str, f64)]) -> BTreeMap<Symbol, f64> {
    pairs.iter().map(|(k, v)| (sym(k), *v)).collect()
}

fn eval_dd(e: &Expr, x: f64, b: &BTreeMap<Symbol, f64>) -> Option<DoubleDouble> {
    let mut ctx = EvalContext::<DoubleDouble>::new(b.iter().map(|(k, v)| (k.clone(), DoubleDouble::from(*v))).collect());
    ctx.set_x(DoubleDouble::from(x));
    eval_scalar(e, &ctx).ok().filter(|v| v.is_finite())
}

fn eval_f(e: &Expr, x: f64, b: &BTreeMap<Symbol, f64>) -> Option<f64> {
    eval_dd(e, x, b).map(|v| v.to_f64())
}

/// A tenth in `[lo, hi]`.
fn tenth(rng: &mut ChaCha8Rng, lo: i64, hi: i64) -> i64 {
    rng.gen_range(lo..=hi)
}

fn draw_shape(rng: &mut ChaCha8Rng, kind: FamilyKind, n: u32) -> FamilySpec {
    loop {
        let a = tenth(rng, -20, 20);
        let b = tenth(rng, -20, 20);
        if a == 0 && b == 0 || kind == FamilyKind::Rational && a == 0 {
            continue;
        }
        let m = rng.gen_range(1..=2);
        return FamilySpec::new(kind, n).with_ab(Expr::frac(a, 10), Expr::frac(b, 10)).with_m(Expr::int(m));
    }
}

/// `l` in `[0.5, 9]`, away from every resonant or degenerate level.
fn draw_l(rng: &mut ChaCha8Rng, spec: &FamilySpec) -> i64 {
    let m = spec.m.as_integer().unwrap_or(1);
    loop {
        let l = tenth(rng, 5, 90);
        let bad = (1..=spec.n as i64 + 1).any(|k| l == 10 * m * m * k * k);
        if !bad {
            return l;
        }
    }
}

fn criterion_1() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xE1D1);
    let mut worst = 0.0f64;
    let mut count = 0;
    let mut failures = Vec::new();
    for kind in FamilyKind::ALL {
        for n in 0..=4 {
            for draw in 0..5 {
                let shape = draw_shape(&mut rng, kind, n);
                let l = draw_l(&mut rng, &shape);
                let seed = if draw % 2 == 0 { SeedForm::Expon } else { SeedForm::Hyp };
                let spec = shape.with_l(Expr::frac(l, 10)).with_seed(seed);
                let problem = generate(&GenerateRequest::new(spec.clone())).map_err(|e| format!("{kind} n={n}: {e}"))?;
                let opts = VerifyOptions { tolerance: 1e-8, points: 20, ..verify_options(&spec) };
                let r = residual(&problem.ode, &problem.solution, &opts).map_err(|e| format!("{kind} n={n}: {e}"))?;
                worst = worst.max(r.max_residual);
                count += 1;
                if !r.passed {
                    failures.push(format!("{kind} n={n} a={} b={} l={}: {:.2e}", spec.a, spec.b, spec.l, r.max_residual));
                }
            }
        }
    }
    if failures.is_empty() {
        Ok(format!("{count} problems, worst residual {worst:.2e} < 1e-8"))
    } else {
        Err(format!("{} of {count} failed: {}", failures.len(), failures.join("; ")))
    }
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xE1D2);
    let mut worst = 0.0f64;
    let mut count = 0;
    let mut failures = Vec::new();
    for kind in FamilyKind::ALL {
        for n in 0..=4 {
            for _ in 0..5 {
                let shape = draw_shape(&mut rng, kind, n);
                let l = resonant_lambda(&shape).expect("resonant value");
                let spec = shape.with_l(l);
                let problem = generate(&GenerateRequest::new(spec.clone())).map_err(|e| format!("{kind} n={n}: {e}"))?;
                if !problem.resonant {
                    return Err(format!("{kind} n={n}: resonance not detected"));
                }
                let opts = VerifyOptions { tolerance: 1e-9, points: 20, ..verify_options(&spec) };
                let r = residual(&problem.ode, &problem.solution, &opts).map_err(|e| format!("{kind} n={n}: {e}"))?;
                worst = worst.max(r.max_residual);
                count += 1;
                if !r.passed {
                    failures.push(format!("{kind} n={n} a={} b={}: {:.2e}", spec.a, spec.b, r.max_residual));
                }
            }
        }
    }
    if failures.is_empty() {
        Ok(format!("{count} resonant problems, worst residual {worst:.2e} < 1e-9"))
    } else {
        Err(format!("{} of {count} failed: {}", failures.len(), failures.join("; ")))
    }
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xE1D3);
    let tests = [p("(sin x)"), p("(exp (* 1/2 x))"), p("(+ (^ x 2) 1)")];
    let mut worst = 0.0f64;
    let mut weakest_control = f64::INFINITY;
    let mut checks = 0;
    for kind in FamilyKind::ALL {
        for n in 0..=4u32 {
            let spec = draw_shape(&mut rng, kind, n);
            let base = base_eigenfunction(&spec).map_err(|e| e.to_string())?;
            let b = BTreeMap::new();
            let window = select_window(&[&base.ytilde0.clone().recip()], default_window(kind), &b)
                .map_err(|e| format!("{kind} n={n}: {e}"))?;
            let points = sample_points(window.0, window.1, 20, n as u64);
            let op = solution_operator(&spec).map_err(|e| e.to_string())?;
            let lowered = |count: u32| IteratedForm {
                prefactor: base.ytilde0.clone().powi(n as i64),
                weight: base.ytilde0.clone().recip(),
                count,
                order: IterOrder::DThenWeight,
            };
            let pairs = [
                (
                    OperatorForm::Chain(factor_chain(&base.log_derivative, 1, n)),
                    OperatorForm::Iterated(lowered(n)),
                    OperatorForm::Iterated(lowered(n + 1)),
                ),
                (
                    OperatorForm::Chain(op.chain.clone()),
                    OperatorForm::Iterated(op.iterated.clone()),
                    OperatorForm::Iterated(IteratedForm { count: n, ..op.iterated.clone() }),
                ),
            ];
            for (lhs, rhs, wrong) in &pairs {
                for f in &tests {
                    let r = operator_identity_check(lhs, rhs, f, &points, &b, 1e-9).map_err(|e| e.to_string())?;
                    let c = operator_identity_check(lhs, wrong, f, &points, &b, 1e-9).map_err(|e| e.to_string())?;
                    worst = worst.max(r.max_residual);
                    weakest_control = weakest_control.min(c.max_residual);
                    checks += 1;
                    if !r.passed {
                        return Err(format!("{kind} n={n} f={f}: residual {:.2e}", r.max_residual));
                    }
                    if c.max_residual <= 1e-3 {
                        return Err(format!("{kind} n={n} f={f}: negative control only {:.2e}", c.max_residual));
                    }
                }
            }
        }
    }
    Ok(format!("{checks} identity checks, worst {worst:.2e} < 1e-9; negative controls >= {weakest_control:.2e}"))
}

fn criterion_4() -> Outcome {
    let start = NormalODE::with_spectral(p("(^ l 2)"), sym("l"));
    let (ode1, _) = eid_step(&start, &p("x"), &Expr::zero()).map_err(|e| e.to_string())?;
    if !normalized_eq(&ode1.coeff, &p("(+ (^ l 2) (* -2 (^ x -2)))")) {
        return Err(format!("first step gave {}", ode1.coeff));
    }
    let ytilde1 = p("(+ (cos x) (* -1 (sin x) (^ x -1)))");
    let (ode2, _) = eid_step(&ode1, &ytilde1, &Expr::one()).map_err(|e| e.to_string())?;
    let expected = p("(+ (^ l 2) (* -2 (+ (^ x 2) (* -1 (^ (sin x) 2))) (^ (+ (* x (cos x)) (* -1 (sin x))) -2)))");
    if !normalized_eq(&ode2.coeff, &expected) {
        return Err(format!("second step gave {}", ode2.coeff));
    }
    let y2 = p("(+ (* c1 (+ (* -1 (^ l 2) x (cos (* l x)) (cos x)) (* (+ (^ l 2) -1) (cos (* l x)) (sin x)) \
                 (* -1 l x (sin (* l x)) (sin x))) (^ (+ (* x (cos x)) (* -1 (sin x))) -1)) \
                 (* c2 (+ (* -1 (^ l 2) x (cos x) (sin (* l x))) (* (+ (^ l 2) -1) (sin (* l x)) (sin x)) \
                 (* l x (cos (* l x)) (sin x))) (^ (+ (* x (cos x)) (* -1 (sin x))) -1)))");
    let mut worst = 0.0f64;
    for lv in [1.0, 1.7] {
        let opts = VerifyOptions {
            window: (0.5, 2.5),
            bindings: binds(&[("l", lv), ("c1", 1.0), ("c2", 1.0)]),
            tolerance: 1e-8,
            ..VerifyOptions::default()
        };
        let r = residual(&ode2, &y2, &opts).map_err(|e| e.to_string())?;
        if !r.passed {
            return Err(format!("displayed y2 at l={lv}: residual {:.2e}", r.max_residual));
        }
        worst = worst.max(r.max_residual);
    }
    Ok(format!("coefficient matches structurally; displayed y2 residual {worst:.2e} < 1e-8"))
}

fn golden_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests").join("golden")
}

fn run_cli(args: &[&str]) -> Result<String, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_eidforge")).args(args).output().map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!("{args:?} exited with {}: {}", out.status, String::from_utf8_lossy(&out.stderr)));
    }
    String::from_utf8(out.stdout).map_err(|e| e.to_string())
}

/// Max stdev of the coefficients expressing each of `targets` in the basis
/// `(y1, y2)`, from Wronskian ratios at the points.
fn span_spread(
    y1: &Expr,
    y2: &Expr,
    targets: &[Expr],
    points: &[f64],
    b: &BTreeMap<Symbol, f64>,
) -> Result<f64, String> {
    let x = sym("x");
    let d = |e: &Expr| differentiate(e, &x).map_err(|e| e.to_string());
    let (dy1, dy2) = (d(y1)?, d(y2)?);
    let mut worst = 0.0f64;
    for t in targets {
        let dt = d(t)?;
        let mut cs: Vec<(f64, f64)> = Vec::new();
        for &pt in points {
            let v = |e: &Expr| eval_dd(e, pt, b).ok_or_else(|| format!("evaluation failed at {pt}"));
            let (a1, a2, ad1, ad2, tv, tdv) = (v(y1)?, v(y2)?, v(&dy1)?, v(&dy2)?, v(t)?, v(&dt)?);
            let w = a1 * ad2 - a2 * ad1;
            let c1 = (tv * ad2 - a2 * tdv) / w;
            let c2 = (a1 * tdv - tv * ad1) / w;
            cs.push((c1.to_f64(), c2.to_f64()));
        }
        let stdev = |f: &dyn Fn(&(f64, f64)) -> f64| {
            let mean = cs.iter().map(f).sum::<f64>() / cs.len() as f64;
            (cs.iter().map(|c| (f(c) - mean).powi(2)).sum::<f64>() / cs.len() as f64).sqrt()
        };
        worst = worst.max(stdev(&|c| c.0)).max(stdev(&|c| c.1));
    }
    Ok(worst)
}

fn criterion_5() -> Outcome {
    let cases: [(&str, &[&str], Vec<Expr>); 3] = [
        (
            "example1",
            &["generate", "--family", "hyperbolic", "--n", "1", "--a", "1", "--b", "0", "--m", "1", "--seed", "expon", "--format", "json"],
            vec![
                p("(* (exp (* 2 (sqrt l) x)) (+ (* (sqrt l) (cosh x)) (* -1 (sinh x))) (^ (* (exp (* (sqrt l) x)) (cosh x)) -1))"),
                p("(* -1 (+ (* (sqrt l) (cosh x)) (sinh x)) (^ (* (exp (* (sqrt l) x)) (cosh x)) -1))"),
            ],
        ),
        (
            "example3",
            &["generate", "--family", "rational", "--n", "2", "--a", "a", "--b", "b", "--format", "json"],
            {
                let u = p("(+ (* a x) b)");
                let form = IteratedForm {
                    prefactor: u.clone().powi(3),
                    weight: u.recip(),
                    count: 3,
                    order: IterOrder::WeightThenD,
                };
                vec![
                    form.apply(&p("(exp (* (sqrt l) x))")).map_err(|e| e.to_string())?,
                    form.apply(&p("(exp (* -1 (sqrt l) x))")).map_err(|e| e.to_string())?,
                ]
            },
        ),
        (
            "example4",
            &["generate", "--family", "trigonometric", "--n", "2", "--a", "0", "--b", "1", "--m", "1", "--seed", "expon", "--format", "json"],
            vec![
                p("(* (exp (* 2 (sqrt l) x)) (+ (* 3 (^ (cos x) 2)) (* -3 (sqrt l) (cos x) (sin x)) (* l (^ (sin x) 2)) (^ (sin x) 2)) \
                   (^ (* (exp (* (sqrt l) x)) (^ (sin x) 2)) -1))"),
                p("(* (+ (* 3 (^ (cos x) 2)) (* 3 (sqrt l) (cos x) (sin x)) (* l (^ (sin x) 2)) (^ (sin x) 2)) \
                   (^ (* (exp (* (sqrt l) x)) (^ (sin x) 2)) -1))"),
            ],
        ),
    ];
    let b = binds(&[("l", 2.3), ("a", 1.3), ("b", 0.4)]);
    let mut worst = 0.0f64;
    for (name, args, reference) in &cases {
        let out = run_cli(args)?;
        let golden = std::fs::read_to_string(golden_dir().join(format!("{name}.json"))).map_err(|e| e.to_string())?;
        if out != golden {
            return Err(format!("{name}: output differs from golden file"));
        }
        let record = ProblemRecord::from_json(&out).map_err(|e| e.to_string())?;
        let (ode, solution) = problem_from_record(&record).map_err(|e| e.to_string())?;
        let pick = |c1: i64, c2: i64| {
            let m = [(sym("c1"), Expr::int(c1)), (sym("c2"), Expr::int(c2))].into_iter().collect();
            substitute(&solution, &m)
        };
        let (y1, y2) = (pick(1, 0), pick(0, 1));
        let kind: FamilyKind = record.family.parse().map_err(|e: eidforge_core::families::FamilyError| e.to_string())?;
        let window = select_window(&[&ode.coeff, &y1, &y2], default_window(kind), &b).map_err(|e| e.to_string())?;
        let points = sample_points(window.0, window.1, 10, 5);
        let spread = span_spread(&y1, &y2, reference, &points, &b)?;
        if !(spread < 1e-9) {
            return Err(format!("{name}: coefficient stdev {spread:.2e}"));
        }
        worst = worst.max(spread);
    }
    Ok(format!("3 golden files reproduced; coefficient stdev {worst:.2e} < 1e-9 (example 3 with prefactor exponent n+1)"))
}

/// `(alpha, a0, lambda)` triples taken from transform steps of the families.
fn transform_triples(rng: &mut ChaCha8Rng, count: usize) -> Result<Vec<(Expr, Expr, Expr, FamilySpec)>, String> {
    let mut out = Vec::new();
    while out.len() < count {
        let kind = FamilyKind::ALL[rng.gen_range(0..4)];
        let k = rng.gen_range(0..=2u32);
        let spec = draw_shape(rng, kind, k);
        let before = eidforge_core::families::potential(&spec).map_err(|e| e.to_string())?;
        let base = base_eigenfunction(&spec).map_err(|e| e.to_string())?;
        let m2 = spec.m.clone() * spec.m.clone();
        let kk = Expr::int((k as i64 + 1) * (k as i64 + 1));
        let lambda = normalize(&match kind {
            FamilyKind::Rational => Expr::zero(),
            FamilyKind::Exponential | FamilyKind::Hyperbolic => m2 * kk,
            FamilyKind::Trigonometric => -(m2 * kk),
        });
        let ytilde = normalize(&base.ytilde0.clone().powi(k as i64 + 1));
        let (_, step) = eid_step(&before, &ytilde, &lambda).map_err(|e| e.to_string())?;
        out.push((step.log_derivative, before.coeff, lambda, spec));
    }
    Ok(out)
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xE1D6);
    let triples = transform_triples(&mut rng, 20)?;
    let one = Expr::one();
    let x = sym("x");
    let tests = [p("(sin x)"), p("(exp (* 1/3 x))")];
    let mut worst_comm = 0.0f64;
    let mut worst_round = 0.0f64;
    for (alpha, a0, lambda, spec) in &triples {
        let b0 = normalize(&(a0.clone() + Expr::int(2) * differentiate(alpha, &x).map_err(|e| e.to_string())?));
        let t = TransferMatrix::new(alpha, &one, a0).map_err(|e| e.to_string())?;
        if !intertwining_residual(&t, a0, &b0).map_err(|e| e.to_string())?.is_zero() {
            return Err(format!("intertwining residual nonzero for alpha = {alpha}"));
        }
        let k = first_integral(alpha, &one, a0).map_err(|e| e.to_string())?;
        if t.det() != k {
            return Err(format!("det T = {} but first integral = {k}", t.det()));
        }
        let bb = binds(&[("l", 2.7)]);
        let base = base_eigenfunction(spec).map_err(|e| e.to_string())?;
        let window = select_window(&[&base.ytilde0.clone().recip()], default_window(spec.kind), &bb)
            .map_err(|e| e.to_string())?;
        let points = sample_points(window.0, window.1, 10, 3);
        for f in &tests {
            let (r1, r2) = commutation_residual(alpha, &one, a0, &k, f).map_err(|e| e.to_string())?;
            for r in [&r1, &r2] {
                for &pt in &points {
                    let v = eval_f(r, pt, &bb).ok_or("commutation residual did not evaluate")?;
                    worst_comm = worst_comm.max(v.abs());
                }
            }
        }
        // round trip on a solution of the source equation
        let source = FamilySpec { l: Expr::param("l"), ..spec.clone() };
        let y = generate(&GenerateRequest::new(source)).map_err(|e| e.to_string())?.solution;
        let inv = inverse_op(alpha, &one, &k).map_err(|e| e.to_string())?;
        let back = inv.apply(&FirstOrderOp::shift(alpha).apply(&y).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        let yb = binds(&[("l", 2.7), ("c1", 0.8), ("c2", -1.1)]);
        for &pt in &points {
            let (u, v) = (eval_f(&y, pt, &yb).ok_or("y")?, eval_f(&back, pt, &yb).ok_or("round trip")?);
            worst_round = worst_round.max((u - v).abs() / 1f64.max(u.abs()));
        }
        let at = [(sym("l"), lambda.clone())].into_iter().collect();
        let k0 = substitute(&k, &at);
        match inverse_op(alpha, &one, &k0) {
            Err(EidError::Degenerate) => {}
            other => return Err(format!("K = {k0} at l = {lambda}: expected degenerate error, got {other:?}")),
        }
    }
    if worst_comm >= 1e-9 || worst_round >= 1e-9 {
        return Err(format!("commutation {worst_comm:.2e}, round trip {worst_round:.2e}"));
    }
    Ok(format!(
        "20 triples: intertwining zero, det T = K, commutation {worst_comm:.2e}, round trip {worst_round:.2e}, K = 0 rejected"
    ))
}

fn criterion_7() -> Outcome {
    let x = sym("x");
    let mut worst = 0.0f64;
    for kind in ReductionKind::ALL {
        let (lo, hi) = match kind {
            ReductionKind::Sech | ReductionKind::Csch => (0.5, 1.5),
            ReductionKind::Sec => (0.1, 1.2),
            ReductionKind::Csc => (0.4, 1.5),
        };
        for n in 0..=5 {
            let f = reduction_integral(kind, n);
            let g = reduction_integrand(kind, n);
            let d = differentiate(&f, &x).map_err(|e| e.to_string())?;
            if d != g {
                return Err(format!("{kind:?} n={n}: derivative {d} is not {g}"));
            }
            let b = BTreeMap::new();
            let q = quadrature(&g, lo, hi, &b, Precision::DoubleDouble).map_err(|e| e.to_string())?;
            let ends = eval_f(&f, hi, &b).ok_or("endpoint")? - eval_f(&f, lo, &b).ok_or("endpoint")?;
            let err = (q - ends).abs() / 1f64.max(q.abs());
            worst = worst.max(err);
            if err >= 1e-10 {
                return Err(format!("{kind:?} n={n}: quadrature {q} vs {ends}"));
            }
        }
    }
    Ok(format!("4 kernels x n<=5 exact derivatives; quadrature agreement {worst:.2e} < 1e-10"))
}

fn random_expr(rng: &mut ChaCha8Rng, depth: u32) -> Expr {
    let leaf = |rng: &mut ChaCha8Rng| match rng.gen_range(0..6) {
        0 | 1 => Expr::x(),
        2 => Expr::param("p"),
        3 => Expr::param("q"),
        4 => Expr::int(rng.gen_range(-3..=4)),
        _ => Expr::frac(rng.gen_range(-5..=5), rng.gen_range(1..=4)),
    };
    if depth == 0 {
        return leaf(rng);
    }
    match rng.gen_range(0..9) {
        0 => leaf(rng),
        1 | 2 => Expr::sum((0..rng.gen_range(2..=3)).map(|_| random_expr(rng, depth - 1))),
        3 | 4 => Expr::product((0..rng.gen_range(2..=3)).map(|_| random_expr(rng, depth - 1))),
        5 => random_expr(rng, depth - 1).powi(rng.gen_range(-2..=3)),
        6 => {
            let arg = Expr::int(rng.gen_range(1..=2)) * Expr::x() + leaf(rng);
            let kernel = [Expr::sin, Expr::cos, Expr::sinh, Expr::cosh, Expr::exp][rng.gen_range(0..5)];
            kernel(arg)
        }
        7 => {
            let kernel = [Expr::sin, Expr::cos, Expr::sinh, Expr::cosh, Expr::exp][rng.gen_range(0..5)];
            kernel(random_expr(rng, depth - 1))
        }
        _ => random_expr(rng, depth - 1) - random_expr(rng, depth - 1),
    }
}

fn criterion_8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xE1D8);
    let x = sym("x");
    let b = binds(&[("p", 0.37), ("q", -1.21)]);
    let sub = [(sym("p"), p("(+ x 1/2)")), (sym("q"), Expr::frac(3, 2))].into_iter().collect();
    let (mut worst_val, mut worst_fd) = (0.0f64, 0.0f64);
    let mut compared = 0;
    let (mut structural, mut numeric) = (0, 0);
    for i in 0..1000 {
        let e = random_expr(&mut rng, 3);
        let n = normalize(&e);
        if normalize(&n) != n {
            return Err(format!("#{i}: normalize not idempotent on {e:?}"));
        }
        let lhs = normalize(&substitute(&n, &sub));
        let rhs = normalize(&substitute(&e, &sub));
        if lhs == rhs {
            structural += 1;
        } else {
            for pt in [0.41, 0.93, 1.37] {
                let (Some(u), Some(v)) = (eval_dd(&lhs, pt, &b), eval_dd(&rhs, pt, &b)) else { continue };
                let drift = (u - v).to_f64().abs() / 1f64.max(u.to_f64().abs());
                if drift >= 1e-12 {
                    return Err(format!("#{i}: substitution does not commute with normalize on {e:?} ({drift:.2e})"));
                }
            }
            numeric += 1;
        }
        let d = differentiate(&e, &x).map_err(|err| format!("#{i}: {err}"))?;
        for pt in [0.31, 0.77, 1.13] {
            let (Some(v0), Some(v1)) = (eval_dd(&e, pt, &b), eval_dd(&n, pt, &b)) else { continue };
            let scale = 1f64.max(v0.to_f64().abs());
            worst_val = worst_val.max((v0 - v1).to_f64().abs() / scale);
            let h = 1e-5;
            let at = |k: f64| eval_dd(&e, pt + k * h, &b);
            let (Some(u1), Some(d1), Some(u2), Some(d2), Some(dv)) = (at(1.0), at(-1.0), at(2.0), at(-2.0), eval_dd(&d, pt, &b))
            else {
                continue;
            };
            // five-point central stencil
            let fd = ((DoubleDouble::from(8.0) * (u1 - d1) - (u2 - d2)) / DoubleDouble::from(12.0 * h)).to_f64();
            let dv = dv.to_f64();
            worst_fd = worst_fd.max((fd - dv).abs() / 1f64.max(dv.abs()));
            compared += 1;
        }
    }
    if worst_val >= 1e-12 || worst_fd >= 1e-7 {
        return Err(format!("value drift {worst_val:.2e}, derivative mismatch {worst_fd:.2e}"));
    }
    Ok(format!(
        "1000 expressions idempotent; substitution commutes ({structural} structurally, {numeric} numerically); value drift {worst_val:.2e}, derivative mismatch {worst_fd:.2e} ({compared} points)"
    ))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("family sweep", criterion_1),
        ("resonance sweep", criterion_2),
        ("operational identities", criterion_3),
        ("two-step chain fixture", criterion_4),
        ("golden examples", criterion_5),
        ("transfer matrix suite", criterion_6),
        ("reduction integrals", criterion_7),
        ("kernel soundness", criterion_8),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(msg) => println!("criterion {} ({name}): PASS - {msg} [{secs:.1}s]", i + 1),
            Err(msg) => {
                failed += 1;
                println!("criterion {} ({name}): FAIL - {msg} [{secs:.1}s]", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
