use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn eidforge(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_eidforge")).args(args).env_remove("EIDFORGE_PRECISION").output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn write_record(dir: &Path, args: &[&str]) -> std::path::PathBuf {
    let path = dir.join("record.json");
    let mut all = vec!["generate", "--format", "json", "--output", path.to_str().unwrap()];
    all.extend_from_slice(args);
    assert_eq!(code(&eidforge(&all)), 0);
    path
}

#[test]
fn generate_text_succeeds() {
    let out = eidforge(&["generate", "--family", "hyperbolic", "--n", "1"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.starts_with("y0'' - l*y0 = 0\n"), "{text}");
    assert!(text.contains("\ny = "));
}

#[test]
fn output_is_deterministic() {
    let args = ["generate", "--family", "trig", "--n", "2", "--a", "0", "--b", "1", "--format", "json", "--verify"];
    assert_eq!(stdout(&eidforge(&args)), stdout(&eidforge(&args)));
}

#[test]
fn verify_passes_on_an_unmodified_record() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_record(dir.path(), &["--family", "exponential", "--n", "2", "--a", "1/2", "--b", "1"]);
    let out = eidforge(&["verify", "--input", path.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    assert!(stdout(&out).contains("PASS"));
}

#[test]
fn verify_fails_on_a_tampered_record() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_record(dir.path(), &["--family", "hyperbolic", "--n", "1"]);
    let mut record: serde_json::Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    record["solution"]["prefix"] = serde_json::Value::from("(exp (* x (^ l 1/2)))");
    fs::write(&path, record.to_string()).unwrap();
    let out = eidforge(&["verify", "--input", path.to_str().unwrap()]);
    assert_eq!(code(&out), 1, "{}", stdout(&out));
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(code(&eidforge(&["generate", "--family", "elliptic"])), 2);
    assert_eq!(code(&eidforge(&["generate", "--format", "yaml"])), 2);
    assert_eq!(code(&eidforge(&["generate", "--bogus"])), 2);
    assert_eq!(code(&eidforge(&["verify", "--input", "/nonexistent/record.json"])), 2);
    assert_eq!(code(&eidforge(&["identities", "--n-min", "3", "--n-max", "1"])), 2);
}

#[test]
fn precision_comes_from_the_environment() {
    let run = |v: &str| {
        Command::new(env!("CARGO_BIN_EXE_eidforge"))
            .args(["generate", "--family", "rational", "--n", "1", "--verify"])
            .env("EIDFORGE_PRECISION", v)
            .output()
            .unwrap()
    };
    assert_eq!(code(&run("106")), 0);
    assert_eq!(code(&run("53")), 0);
    assert_eq!(code(&run("4096")), 2);
    assert_eq!(code(&run("many")), 2);
}

#[test]
fn identities_pass_for_small_orders() {
    let out = eidforge(&["identities", "--family", "hyperbolic", "--n-max", "3"]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    assert_eq!(stdout(&out).lines().filter(|l| l.contains("PASS")).count(), 8);
}

#[test]
fn chain_from_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("steps.json");
    fs::write(&input, r#"[["(cosh x)", "1"]]"#).unwrap();
    let out = eidforge(&[
        "chain",
        "--input",
        input.to_str().unwrap(),
        "--solution",
        "(exp (* x (^ l 1/2)))",
        "--verify",
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert!(text.starts_with("step 1: eigenfunction cosh(x) at 1:"), "{text}");
    assert!(text.contains("cosh"));
}

#[test]
fn latex_matches_the_golden_file() {
    let out = eidforge(&["generate", "--family", "hyperbolic", "--n", "1", "--a", "1", "--b", "0", "--m", "1", "--seed", "expon", "--format", "latex"]);
    let golden = fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/example1.tex")).unwrap();
    assert_eq!(stdout(&out), golden);
}
