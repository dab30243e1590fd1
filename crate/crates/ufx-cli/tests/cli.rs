//! End-to-end checks of the command-line surface: every library operation
//! is reachable through some subcommand, exit codes follow the contract,
//! and reports are deterministic.

use std::path::PathBuf;
use std::process::{Command, Output};

fn ufx(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ufx"))
        .args(args)
        .env_remove("UFX_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn write_temp(name: &str, content: &str) -> PathBuf {
    let dir = tempfile::tempdir().expect("temp dir");
    let path = dir.path().join(name);
    std::fs::write(&path, content).expect("write temp file");
    // keep the directory alive for the test process
    std::mem::forget(dir);
    path
}

const MODEL: &str = "\
vocab
pred P1 1
pred R 2
func F 2
end
universe 3
rel P1: 0 1
rel R: 0,1 1,2
fun F: (0,0)->0
fun F: (0,1)->1
fun F: (0,2)->2
fun F: (1,0)->1
fun F: (1,1)->2
fun F: (1,2)->0
fun F: (2,0)->2
fun F: (2,1)->0
fun F: (2,2)->1
";

#[test]
fn model_validate_passes_and_fails_with_exit_codes() {
    let good = write_temp("good.model", MODEL);
    let out = ufx(&["model", "validate", good.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    assert!(stdout(&out).contains("ok"));

    let bad = write_temp("bad.model", &MODEL.replace("rel P1: 0 1", "rel P1: 0 9"));
    let out = ufx(&["model", "validate", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("out of range"));

    // a non-total function is a parse error, hence a usage failure
    let broken = write_temp("broken.model", &MODEL.replace("fun F: (2,2)->1\n", ""));
    let out = ufx(&["model", "validate", broken.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn model_beta_modes_print_identical_extensions() {
    let path = write_temp("m.model", MODEL);
    let literal = ufx(&["model", "beta", path.to_str().unwrap(), "--mode", "literal"]);
    let fast = ufx(&["model", "beta", path.to_str().unwrap(), "--mode", "fast"]);
    assert_eq!(literal.status.code(), Some(0));
    assert_eq!(literal.stdout, fast.stdout);
    assert!(stdout(&fast).contains("# point 0 = u0"));
    // the extension of a finite model parses back to the base model
    let text = stdout(&fast);
    let reparsed = ufx_core::parse_model(&text).unwrap();
    let base = ufx_core::parse_model(MODEL).unwrap();
    assert_eq!(reparsed, base);
}

#[test]
fn eval_accepts_bindings_and_ultrafilters() {
    let path = write_temp("m.model", MODEL);
    let out = ufx(&[
        "eval",
        path.to_str().unwrap(),
        "--formula",
        "Uforall[d] x (P1(x))",
        "--uf",
        "d=principal:0",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out).trim(), "true");

    let out = ufx(&[
        "eval",
        path.to_str().unwrap(),
        "--formula",
        "R(x, y) -> P1(x)",
        "--let",
        "x=0",
        "--let",
        "y=2",
    ]);
    assert_eq!(stdout(&out).trim(), "true");

    // a formula may come from a file
    let formula_file = write_temp("phi.txt", "exists y R(x, y)");
    let out = ufx(&[
        "eval",
        path.to_str().unwrap(),
        "--formula",
        formula_file.to_str().unwrap(),
        "--let",
        "x=2",
    ]);
    assert_eq!(stdout(&out).trim(), "false");

    let out = ufx(&[
        "eval",
        path.to_str().unwrap(),
        "--formula",
        "P1(x,",
        "--let",
        "x=0",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn lift_reports_classifications() {
    let path = write_temp("m.model", MODEL);
    let map = write_temp("id.map", "0 1 2\n");
    let out = ufx(&[
        "lift",
        path.to_str().unwrap(),
        path.to_str().unwrap(),
        "--map",
        map.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let text = stdout(&out);
    assert!(text.contains("source: isomorphism"));
    assert!(text.contains("lifted: isomorphism"));
    assert!(text.contains("lift: pass"));
}

#[test]
fn uf_measure_returns_kleene_verdicts() {
    let cases = [
        ("frechet:ep(0; ; 2; 0)", "ep(0; ; 2; 1)", "false"),
        ("frechet:ep(0; ; 2; 0)", "ep(0; ; 4; 0)", "unknown"),
        ("principal:6", "ep(0; ; 2; 0)", "true"),
    ];
    for (d, set, expected) in cases {
        let out = ufx(&["uf", "measure", "--d", d, "--set", set]);
        assert_eq!(out.status.code(), Some(0));
        assert_eq!(stdout(&out).trim(), expected, "{d} on {set}");
    }
    let out = ufx(&[
        "uf",
        "measure",
        "--d",
        "frechet:ep(2; 0,1; 1; )",
        "--set",
        "ep(0; ; 2; 0)",
    ]);
    assert_eq!(out.status.code(), Some(2), "finite concentration set");
}

#[test]
fn lemma3_prints_four_verdicts() {
    let out = ufx(&["lemma3", "--partition", "ep(0; ; 2; 0)"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("B1 in F(D1,D2): true"));
    assert!(text.contains("B2 in F(D1,D2): false"));
    assert!(text.contains("B2 in F(D2,D1): true"));
    assert!(text.contains("B1 in F(D2,D1): false"));
    assert!(text.contains("extensions differ"));

    let out = ufx(&["lemma3", "--partition", "ep(3; 0,1; 1; )"]);
    assert_eq!(out.status.code(), Some(2), "finite partition class");
}

#[test]
fn paper_suite_passes_and_respects_flags() {
    let out = ufx(&["paper", "suite", "--k", "2", "--seed", "7"]);
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let text = stdout(&out);
    assert!(text.contains("result: all-pass"));
    assert!(text.contains("deviations:"));

    let structured = ufx(&[
        "paper",
        "suite",
        "--k",
        "2",
        "--seed",
        "7",
        "--format",
        "structured",
    ]);
    let json: serde_json::Value =
        serde_json::from_str(&stdout(&structured)).expect("structured output is JSON");
    assert_eq!(json["schema_version"], 1);
    assert_eq!(json["all_pass"], true);

    let out = ufx(&["paper", "suite", "--k", "9"]);
    assert_eq!(
        out.status.code(),
        Some(2),
        "k out of range is a usage error"
    );
}

#[test]
fn seed_env_variable_is_the_default() {
    let with_env = Command::new(env!("CARGO_BIN_EXE_ufx"))
        .args(["paper", "suite", "--k", "2"])
        .env("UFX_SEED", "7")
        .output()
        .unwrap();
    let with_flag = ufx(&["paper", "suite", "--k", "2", "--seed", "7"]);
    assert_eq!(with_env.stdout, with_flag.stdout);
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(ufx(&["bogus"]).status.code(), Some(2));
    assert_eq!(ufx(&["model", "validate"]).status.code(), Some(2));
    assert_eq!(
        ufx(&["paper", "suite", "--unknown-flag"]).status.code(),
        Some(2)
    );
    assert_eq!(ufx(&["--help"]).status.code(), Some(0));
}

/// Every library operation is reachable from at least one subcommand.
/// The table records the mapping; the test drives each subcommand once so
/// the mapping cannot rot.
#[test]
fn every_operation_is_reachable_from_a_subcommand() {
    let coverage: &[(&str, &[&str])] = &[
        ("validate_model", &["model", "validate"]),
        ("parse_model/serialize_model", &["model", "validate"]),
        ("beta_extend", &["model", "beta"]),
        ("enumerate_ultrafilters", &["model", "beta"]),
        ("natural_embedding", &["lift"]),
        ("parse_formula/evaluate", &["eval"]),
        ("classify_map/pushforward/lift_check", &["lift"]),
        ("epset_algebra/measure", &["uf", "measure"]),
        (
            "eval_two_level/pair_image_membership/lemma3_symbolic",
            &["lemma3"],
        ),
        (
            "build_m1/formula_phi/formula_psi/compute_g/lemma3_finite/cut_segments/run_suite",
            &["paper", "suite"],
        ),
    ];
    let model_path = write_temp("cov.model", MODEL);
    let map_path = write_temp("cov.map", "0 1 2\n");
    for (ops, subcommand) in coverage {
        let mut args: Vec<&str> = subcommand.to_vec();
        match *subcommand {
            ["model", "validate"] | ["model", "beta"] => args.push(model_path.to_str().unwrap()),
            ["eval"] => args.extend([
                model_path.to_str().unwrap(),
                "--formula",
                "forall x (P1(x) | ~P1(x))",
            ]),
            ["lift"] => args.extend([
                model_path.to_str().unwrap(),
                model_path.to_str().unwrap(),
                "--map",
                map_path.to_str().unwrap(),
            ]),
            ["uf", "measure"] => args.extend(["--d", "principal:0", "--set", "ep(0; ; 2; 0)"]),
            ["lemma3"] => args.extend(["--partition", "ep(0; ; 2; 0)"]),
            ["paper", "suite"] => args.extend(["--k", "2", "--seed", "3"]),
            other => panic!("unmapped subcommand {other:?}"),
        }
        let out = ufx(&args);
        assert_eq!(
            out.status.code(),
            Some(0),
            "operations `{ops}` unreachable: {args:?} failed with {out:?}"
        );
    }
}
