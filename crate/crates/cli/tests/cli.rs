use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(session: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_blameworthy"))
        .args(args)
        .env("BLAMEWORTHY_SESSION", session)
        .output()
        .expect("binary runs")
}

fn ok(session: &Path, args: &[&str]) -> String {
    let out = run(session, args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// compile → generate → fit → learn-utility, returning the model directory.
fn lung_cancer_model(root: &Path) -> std::path::PathBuf {
    let session = root.join("session");
    let model = root.join("model");
    let data = root.join("data.csv");
    ok(&session, &["compile", "lung-cancer", "--out", s(&model)]);
    ok(&session, &["generate", "lung-cancer", "--rows", "4000", "--seed", "11", "--out", s(&data)]);
    ok(&session, &["fit", s(&model), s(&data)]);
    ok(&session, &["learn-utility", s(&model)]);
    model
}

#[test]
fn compile_prints_model_count() {
    let dir = tempfile::tempdir().unwrap();
    let session = dir.path().join("session");
    let out = ok(&session, &["compile", "lung-cancer", "--out", s(&dir.path().join("m"))]);
    assert!(out.starts_with("model count: 52\n"));

    let scn = dir.path().join("taut.scn");
    fs::write(&scn, "outcome a b c\nconstraint |(a,!(a))\n").unwrap();
    let out = ok(&session, &["compile", s(&scn), "--out", s(&dir.path().join("t"))]);
    assert!(out.starts_with("model count: 8\n"));
}

#[test]
fn compile_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let session = dir.path().join("session");
    for out in ["a", "b"] {
        ok(&session, &["compile", "trolley", "--vtree", "right-linear", "--out", s(&dir.path().join(out))]);
    }
    for f in ["scenario.txt", "vtree.txt", "circuit.sdd"] {
        assert_eq!(fs::read(dir.path().join("a").join(f)).unwrap(), fs::read(dir.path().join("b").join(f)).unwrap());
    }
}

#[test]
fn pipeline_reproduces_zero_blame_and_saves_session() {
    let dir = tempfile::tempdir().unwrap();
    let session = dir.path().join("session");
    let model = lung_cancer_model(dir.path());
    let q = dir.path().join("q.txt");
    fs::write(&q, "action = !M\nalternatives = M\nevent = !(S_DP)\nN = 1\n").unwrap();
    let out = ok(&session, &["blame", s(&model), s(&q)]);
    assert!(out.starts_with("Agent is blameworthy to degree 0.000 for ¬S_DP, relative to alternative M.\n"), "{out}");

    let json = ok(&session, &["blame", s(&model), s(&q), "--json"]);
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(v["overall_db"].as_f64(), Some(0.0));

    let history = fs::read_to_string(session.join("history.txt")).unwrap();
    assert!(history.contains("$ blameworthy compile lung-cancer"));
    assert_eq!(fs::read_to_string(session.join("reports.jsonl")).unwrap().lines().count(), 2);
}

#[test]
fn n_below_the_floor_exits_with_its_own_code() {
    let dir = tempfile::tempdir().unwrap();
    let session = dir.path().join("session");
    let model = lung_cancer_model(dir.path());
    let q = dir.path().join("q.txt");
    fs::write(&q, "action = M\nevent = !(S_DP)\n").unwrap();
    let out = run(&session, &["blame", s(&model), s(&q), "--N", "0.0001"]);
    assert_eq!(out.status.code(), Some(6));
    assert!(String::from_utf8_lossy(&out.stderr).contains("minimum admissible N"));
}

#[test]
fn exit_codes_are_distinct() {
    let dir = tempfile::tempdir().unwrap();
    let session = dir.path().join("session");
    assert_eq!(run(&session, &["compile", "no-such-file", "--out", "x"]).status.code(), Some(1));
    assert_eq!(run(&session, &["frobnicate"]).status.code(), Some(2));

    let bad = dir.path().join("bad.scn");
    fs::write(&bad, "outcome a\nconstraint &(a,\n").unwrap();
    assert_eq!(run(&session, &["compile", s(&bad), "--out", s(&dir.path().join("m"))]).status.code(), Some(3));

    let model = lung_cancer_model(dir.path());
    let q = dir.path().join("q.txt");
    fs::write(&q, "action = M\nevent = M\n").unwrap();
    assert_eq!(run(&session, &["blame", s(&model), s(&q)]).status.code(), Some(5));

    let data = dir.path().join("bad.csv");
    fs::write(&data, "MM,CT_pos\n1,1\n").unwrap();
    assert_eq!(run(&session, &["fit", s(&model), s(&data)]).status.code(), Some(3));
    assert_eq!(run(&session, &["fit", s(&model), s(&dir.path().join("data.csv")), "--smoothing=-1"]).status.code(), Some(4));
}

#[test]
fn verify_reports_agreement() {
    let dir = tempfile::tempdir().unwrap();
    let session = dir.path().join("session");
    let model = dir.path().join("model");
    let data = dir.path().join("data.csv");
    ok(&session, &["compile", "trolley", "--out", s(&model)]);
    ok(&session, &["generate", "trolley", "--rows", "600", "--seed", "2", "--out", s(&data)]);
    ok(&session, &["fit", s(&model), s(&data)]);
    ok(&session, &["learn-utility", s(&model), "--context-relative"]);
    let out = ok(&session, &["verify", s(&model)]);
    assert!(out.ends_with("max deviation ≤ 1e-9\n"), "{out}");
}

#[test]
fn saved_models_answer_queries_identically() {
    let dir = tempfile::tempdir().unwrap();
    let session = dir.path().join("session");
    let model = lung_cancer_model(dir.path());
    let copy = dir.path().join("copy");
    fs::create_dir(&copy).unwrap();
    for f in ["scenario.txt", "vtree.txt", "circuit.sdd", "psdd.txt", "utility.txt"] {
        fs::copy(model.join(f), copy.join(f)).unwrap();
    }
    let q = dir.path().join("q.txt");
    fs::write(&q, "action = CT\nevent = !(T)\nN = 1\ncontexts = given !MM M_na\n").unwrap();
    assert_eq!(ok(&session, &["blame", s(&model), s(&q), "--json"]), ok(&session, &["blame", s(&copy), s(&q), "--json"]));
    assert_eq!(ok(&session, &["query", s(&model), "mpe"]), ok(&session, &["query", s(&copy), "mpe"]));
}

#[test]
fn interactive_mode_reads_prompts() {
    use std::io::Write;
    use std::process::Stdio;
    let dir = tempfile::tempdir().unwrap();
    let session = dir.path().join("session");
    let model = lung_cancer_model(dir.path());
    let mut child = Command::new(env!("CARGO_BIN_EXE_blameworthy"))
        .args(["blame", s(&model), "--interactive"])
        .env("BLAMEWORTHY_SESSION", &session)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(b"!M\nM\n!(S_DP)\n1\n\n").unwrap();
    let out = child.wait_with_output().unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("Agent is blameworthy to degree 0.000 for ¬S_DP"));
}
