use jain_core::oeis;
use jain_core::CoeffTriangle;
use std::process::Command;

fn jain(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("jain").chain(args.iter().copied());
    let code = jain_cli::run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

#[test]
fn moment_three_text() {
    let (code, out, _) = jain(&["moment", "--m", "3", "--format", "text"]);
    assert_eq!(code, 0);
    assert_eq!(out, "y p³/n³ · (y² + 3yp + (1+2β)p²)\n");
}

#[test]
fn small_forms() {
    assert_eq!(jain(&["moment", "--m", "1"]).1, "yp/n\n");
    assert_eq!(jain(&["moment", "--m", "0"]).1, "1\n");
    assert_eq!(jain(&["series", "--r", "1"]).1, "p\n");
    assert_eq!(jain(&["series", "--r", "3"]).1, "p³ · (α² + 3β²αp + β³(1+2β)p²)\n");
    assert_eq!(jain(&["series", "--r", "2", "--shifted"]).1, "p² · (y + β(2-β)p)\n");
    let (_, latex, _) = jain(&["moment", "--m", "2", "--format", "latex"]);
    assert!(latex.starts_with("\\frac{y p^{2}}{n^{2}}"), "{latex}");
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        &["series", "--r", "99999"][..],
        &["moment", "--m", "65"],
        &["table", "theta", "--max", "65"],
        &["verify", "closed-forms", "--max", "100"],
        &["oeis", "check", "--max-r", "65"],
        &["series", "--r", "0"],
        &["bogus"],
        &["series"],
        &["moment", "--m", "2", "--format", "pdf"],
        &["table", "omega", "--max", "3"],
        &["verify", "numeric", "--grid", "beta=1"],
        &["verify", "numeric", "--tol", "-1"],
        &["--threads", "0", "moment", "--m", "2"],
    ] {
        let (code, out, err) = jain(args);
        assert_eq!(code, 2, "{args:?}: {out}{err}");
        assert!(!err.is_empty(), "{args:?}");
    }
}

#[test]
fn cap_can_be_raised() {
    assert_eq!(jain(&["--cap", "2", "moment", "--m", "3"]).0, 2);
    assert_eq!(jain(&["--cap", "70", "series", "--r", "3"]).0, 0);
}

#[test]
fn help_exits_0() {
    let (code, out, _) = jain(&["--help"]);
    assert_eq!(code, 0);
    assert!(out.contains("verify"));
}

#[test]
fn failed_check_exits_1() {
    // No float sum is exact to 1e-30.
    let (code, out, _) = jain(&["verify", "numeric", "--tol", "1e-30"]);
    assert_eq!(code, 1);
    assert!(out.contains("FAIL"));
}

#[test]
fn passing_checks_exit_0() {
    for args in [
        &["verify", "paper"][..],
        &["verify", "numeric"],
        &["oeis", "check"],
        &["verify", "closed-forms", "--max", "12"],
    ] {
        let (code, out, err) = jain(args);
        assert_eq!(code, 0, "{args:?}: {out}{err}");
    }
}

#[test]
fn verify_paper_lists_expected_mismatches() {
    let (code, out, _) = jain(&["verify", "paper"]);
    assert_eq!(code, 0);
    assert!(out.contains("checked 143, matched 137, mismatched 6 (6 expected)"), "{out}");
    for id in ["theta 8 7", "phi 7 5", "phi 7 6", "phi 10 3", "phi 10 4", "phi 10 9"] {
        assert!(out.contains(&format!("{id} [expected]")), "{id}");
    }
}

#[test]
fn table_json_round_trips() {
    for family in ["theta", "phi", "sigma"] {
        let (code, out, _) = jain(&["table", family, "--max", "9", "--format", "json"]);
        assert_eq!(code, 0);
        let t: CoeffTriangle = serde_json::from_str(&out).unwrap();
        assert_eq!(format!("{}\n", serde_json::to_string_pretty(&t).unwrap()), out, "{family}");
        // exact coefficients travel as strings
        let doc: serde_json::Value = serde_json::from_str(&out).unwrap();
        for e in doc["entries"].as_array().unwrap() {
            assert!(e["coeffs"].as_array().unwrap().iter().all(|c| c.is_string()));
        }
    }
}

#[test]
fn output_independent_of_threads() {
    for args in [
        &["table", "sigma", "--max", "14"][..],
        &["table", "phi", "--max", "14", "--format", "json"],
        &["verify", "paper", "--format", "json"],
        &["verify", "numeric"],
        &["oeis", "check"],
    ] {
        let with = |n: &str| {
            let mut a = vec!["--threads", n];
            a.extend_from_slice(args);
            jain(&a)
        };
        let one = with("1");
        assert_eq!(one.0, 0);
        assert_eq!(one, with("4"), "{args:?}");
        assert_eq!(one, jain(args), "{args:?}");
    }
}

#[test]
fn report_file_is_json() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    let p = path.to_str().unwrap();
    let (code, out, _) = jain(&["verify", "paper", "--report", p]);
    assert_eq!(code, 0);
    assert!(out.starts_with("== "));
    let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(doc["report"]["matched"], 137);
    assert_eq!(doc["failures"].as_array().unwrap().len(), 0);

    // also written for a failing run
    let (code, _, _) = jain(&["verify", "numeric", "--tol", "1e-30", "--report", p]);
    assert_eq!(code, 1);
    let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert!(doc["summaries"][0]["failed"].as_u64().unwrap() > 0);
}

#[test]
fn report_written_on_runtime_error() {
    let cache = tempfile::tempdir().unwrap();
    std::fs::write(cache.path().join("A000217.txt"), "0 0\n1 one\n").unwrap();
    let path = cache.path().join("r.json");
    let (code, _, err) = jain(&[
        "oeis",
        "check",
        "--cache",
        cache.path().to_str().unwrap(),
        "--report",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code, 1);
    assert!(err.contains("malformed"), "{err}");
    let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(doc["ok"], false);
}

fn write_bfile(dir: &std::path::Path, id: &str) {
    let seq = oeis::builtin_terms(id, 40).unwrap();
    std::fs::write(dir.join(format!("{id}.txt")), oeis::render_bfile(&seq)).unwrap();
}

fn sources(json: &str) -> Vec<String> {
    let doc: serde_json::Value = serde_json::from_str(json).unwrap();
    doc["identifications"]
        .as_array()
        .unwrap()
        .iter()
        .map(|i| i["source"].as_str().unwrap().to_string())
        .collect()
}

#[test]
fn cache_flag_overrides_env() {
    let env_dir = tempfile::tempdir().unwrap();
    let flag_dir = tempfile::tempdir().unwrap();
    write_bfile(env_dir.path(), "A000217");
    let bin = env!("CARGO_BIN_EXE_jain");

    let run = |extra: &[&str]| {
        let out = Command::new(bin)
            .args(["oeis", "check", "--format", "json"])
            .args(extra)
            .env(oeis::CACHE_ENV, env_dir.path())
            .output()
            .unwrap();
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        sources(&String::from_utf8(out.stdout).unwrap())
    };
    let from_env = run(&[]);
    assert_eq!(from_env[0], "bfile");
    assert!(from_env[1..].iter().all(|s| s == "builtin"));
    let from_flag = run(&["--cache", flag_dir.path().to_str().unwrap()]);
    assert!(from_flag.iter().all(|s| s == "builtin"));
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_jain");
    let code = |args: &[&str]| Command::new(bin).args(args).output().unwrap().status.code();
    assert_eq!(code(&["moment", "--m", "3"]), Some(0));
    assert_eq!(code(&["series", "--r", "99999"]), Some(2));
    assert_eq!(code(&["verify", "numeric", "--tol", "1e-30"]), Some(1));
}
