use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn ctxlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ctxlab")).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn gen_to(dir: &Path, name: &str, file: &str) -> PathBuf {
    let o = ctxlab(&["gen", name]);
    assert_eq!(code(&o), 0, "gen {name}");
    let path = dir.join(file);
    std::fs::write(&path, &o.stdout).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn pr_box_is_fully_contextual() {
    let dir = tempfile::tempdir().unwrap();
    let pr = gen_to(dir.path(), "pr", "pr.json");
    let o = ctxlab(&["cf", s(&pr)]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o), "NCF = 0\nCF = 1\n");
    let o = ctxlab(&["validate", s(&pr)]);
    assert_eq!((code(&o), stdout(&o).as_str()), (0, "valid\n"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&ctxlab(&["frobnicate"])), 2);
    assert_eq!(code(&ctxlab(&["gen", "nope"])), 2);
    assert_eq!(code(&ctxlab(&["term", "check", "v (x) v"])), 2);
    let broken = dir.path().join("broken.json");
    std::fs::write(&broken, "{ not json").unwrap();
    assert_eq!(code(&ctxlab(&["validate", s(&broken)])), 2);
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"measurements":[{"id":"a","outcomes":["0"]}],"facets":[["b"]]}"#).unwrap();
    assert_eq!(code(&ctxlab(&["validate", s(&bad)])), 1);
}

#[test]
fn guard_exceeded_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let pr = gen_to(dir.path(), "pr", "pr.json");
    let o = Command::new(env!("CARGO_BIN_EXE_ctxlab"))
        .args(["mp", "expand", s(&pr), "--depth", "3"])
        .env("CTXLAB_GUARD", "10")
        .output()
        .unwrap();
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("CTXLAB_GUARD"));
}

#[test]
fn find_and_refute() {
    let dir = tempfile::tempdir().unwrap();
    let pr = gen_to(dir.path(), "pr", "pr.json");
    let corr = gen_to(dir.path(), "correlated", "corr.json");

    let o = ctxlab(&["sim", "refute", s(&corr), s(&pr)]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).starts_with("refuted"));
    assert_eq!(code(&ctxlab(&["sim", "refute", s(&pr), s(&corr)])), 1);

    assert_eq!(code(&ctxlab(&["sim", "find", s(&corr), s(&pr)])), 1);
    let o = ctxlab(&["sim", "find", s(&pr), s(&pr)]);
    assert_eq!(code(&o), 0);
    let sim = dir.path().join("sim.json");
    std::fs::write(&sim, &o.stdout).unwrap();
    let o = ctxlab(&["sim", "check", s(&sim)]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert_eq!(code(&ctxlab(&["sim", "extract-term", s(&sim)])), 0);
}

#[test]
fn term_commands() {
    let dir = tempfile::tempdir().unwrap();
    let pr = gen_to(dir.path(), "pr", "pr.json");
    let bind = format!("v={}", s(&pr));
    let o = ctxlab(&["term", "check", "v (x) u", "--bind", &bind]);
    assert_eq!(code(&o), 0);
    let o = ctxlab(&["--json", "term", "normalize", "v +_1/2 v", "--bind", &bind]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("normal_form"));
}

#[test]
fn output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let demo = gen_to(dir.path(), "mix-demo", "demo.json");
    for args in [
        vec!["--json", "props", "prop1-monotonicity", "--seed", "7", "--cases", "3"],
        vec!["props", "eq-soundness", "--seed", "3", "--cases", "1"],
        vec!["cf", s(&demo), "--decompose", "--certificate"],
        vec!["mp", "expand", s(&demo), "--depth", "2"],
    ] {
        let (a, b) = (ctxlab(&args), ctxlab(&args));
        assert_eq!(code(&a), 0, "{args:?}: {}", String::from_utf8_lossy(&a.stderr));
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}
