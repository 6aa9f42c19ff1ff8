use std::path::{Path, PathBuf};
use std::process::Command;

use randdcl::cli::{self, file, Format};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_randdcl"))
}

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

fn run(args: &[&str]) -> (String, String, i32) {
    let out = bin().args(args).output().expect("binary runs");
    (
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
        out.status.code().expect("exit code"),
    )
}

fn write_temp(dir: &tempfile::TempDir, name: &str, text: &str) -> String {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_owned()
}

#[test]
fn dcl_on_r0() {
    let r0 = data("r0.json");
    let (out, _, code) = run(&["dcl", r0.to_str().unwrap(), "a", "b"]);
    assert_eq!(out, "4 elements: a, b, max(a,b)=(1,1), min(a,b)=(0,0)\n");
    assert_eq!(code, 0);
}

#[test]
fn eval_on_r0() {
    let r0 = data("r0.json");
    let (out, _, code) = run(&["eval", r0.to_str().unwrap(), "a < b"]);
    assert_eq!(out, "{w1}, mu = 1/2\n");
    assert_eq!(code, 0);
}

#[test]
fn output_matches_library_rendering() {
    let r0 = data("r0_full.json");
    let path = r0.to_str().unwrap();
    let r = file::load(&r0).unwrap();
    let s = |xs: &[&str]| xs.iter().map(|x| x.to_string()).collect::<Vec<_>>();
    let cases: Vec<(Vec<&str>, cli::Report)> = vec![
        (vec!["eval", path, "exists u. a < u & u < b"], cli::eval(&r, "exists u. a < u & u < b").unwrap()),
        (vec!["dclb", path, "a", "b"], cli::dclb(&r, &s(&["a", "b"])).unwrap()),
        (vec!["dcl", path, "a", "c"], cli::dcl(&r, &s(&["a", "c"])).unwrap()),
        (vec!["lcl", path, "a", "b"], cli::lcl(&r, &s(&["a", "b"])).unwrap()),
        (vec!["isdef", path, "c", "a", "b"], cli::isdef(&r, "c", &s(&["a", "b"])).unwrap()),
        (vec!["isdef", path, "b", "a", "c"], cli::isdef(&r, "b", &s(&["a", "c"])).unwrap()),
        (vec!["pointwise", path, "e", "a", "b"], cli::pointwise(&r, "e", &s(&["a", "b"])).unwrap()),
        (vec!["dist", path, "a", "c"], cli::dist(&r, "a", "c").unwrap()),
        (vec!["dist", path, "{w1}", "b < a"], cli::dist(&r, "{w1}", "b < a").unwrap()),
        (vec!["glue", path, "a", "b", "{w2}"], cli::glue_cmd(&r, "a", "b", "{w2}").unwrap()),
        (vec!["witness", path, "a < u & u < b", "u"], cli::witness(&r, "a < u & u < b", "u").unwrap()),
    ];
    for (args, report) in cases {
        for format in [Format::Text, Format::Structured] {
            let mut full = vec![];
            if format == Format::Structured {
                full.extend(["--format", "structured"]);
            }
            full.extend(args.iter().copied());
            let (out, _, code) = run(&full);
            assert_eq!(out, format!("{}\n", report.render(format)), "{full:?}");
            assert_eq!(code, report.exit_code(), "{full:?}");
        }
    }
}

#[test]
fn verdict_exit_codes() {
    let r0 = data("r0_full.json");
    let p = r0.to_str().unwrap();
    assert_eq!(run(&["isdef", p, "c", "a", "b"]).2, 0);
    assert_eq!(run(&["isdef", p, "b", "a", "c"]).2, 1);
    assert_eq!(run(&["pointwise", p, "e", "a", "b"]).2, 1);
    let f0 = data("f0.json");
    let (out, _, code) = run(&["pointwise", f0.to_str().unwrap(), "b"]);
    assert!(out.starts_with("pointwise definable: true"), "{out}");
    assert_eq!(code, 0);
    assert_eq!(run(&["isdef", f0.to_str().unwrap(), "b"]).2, 1);
}

#[test]
fn input_error_codes() {
    let dir = tempfile::tempdir().unwrap();
    let atoms = r#""atoms": [{"name": "w1", "weight": "1/2"}, {"name": "w2", "weight": "1/3"}]"#;
    let sum = write_temp(&dir, "sum.json", &format!(r#"{{"theory": {{"kind": "dlo"}}, {atoms}}}"#));
    let (_, err, code) = run(&["dcl", &sum]);
    assert_eq!(code, 4);
    assert!(err.contains("weights sum to 5/6"), "{err}");

    let halves = r#""atoms": [{"name": "w1", "weight": "1/2"}, {"name": "w2", "weight": "1/2"}]"#;
    let len = write_temp(
        &dir,
        "len.json",
        &format!(r#"{{"theory": {{"kind": "dlo"}}, {halves}, "elements": {{"a": ["0"]}}}}"#),
    );
    assert_eq!(run(&["dcl", &len]).2, 5);

    let dom = write_temp(
        &dir,
        "dom.json",
        &format!(r#"{{"theory": {{"kind": "finite_enum", "n": 2}}, {halves}, "elements": {{"b": [0, 3]}}}}"#),
    );
    let (_, err, code) = run(&["dcl", &dom]);
    assert_eq!(code, 6);
    assert!(err.contains("value out of domain"), "{err}");

    let bad = write_temp(&dir, "bad.json", "{\"theory\": }");
    let (_, err, code) = run(&["dcl", &bad]);
    assert_eq!(code, 2);
    assert!(err.contains("line 1"), "{err}");

    let r0 = data("r0.json");
    let p = r0.to_str().unwrap();
    assert_eq!(run(&["dcl", p, "zz"]).2, 2);
    assert_eq!(run(&["eval", p, "a < "]).2, 2);
    assert_eq!(run(&["lcl", data("f0.json").to_str().unwrap()]).2, 2);
    assert_eq!(run(&["dcl", "/nonexistent/file.json"]).2, 2);
}

#[test]
fn fuzz_is_deterministic() {
    let a = run(&["fuzz", "--count", "100", "--seed", "7"]);
    assert_eq!(a.0, "100/100 instances passed all cross-checks\n");
    assert_eq!(a.2, 0);
    let b = run(&["--format", "structured", "fuzz", "--count", "20", "--seed", "3"]);
    let c = run(&["--format", "structured", "fuzz", "--count", "20", "--seed", "3"]);
    assert_eq!(b, c);
}

#[test]
fn check_passes_on_data_files() {
    for name in ["r0.json", "r0_full.json", "f0.json"] {
        let (out, _, code) = run(&["check", data(name).to_str().unwrap()]);
        assert_eq!(code, 0, "{name}: {out}");
        assert!(!out.contains("FAIL"), "{out}");
    }
}
