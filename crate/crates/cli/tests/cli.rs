use std::path::PathBuf;
use std::process::{Command, Output};

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name).to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dilationlab")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn normalize_flip_word() {
    let o = run(&["normalize", "--theta", &data("flip.json"), "--word", "f2 e1"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "e2 f1");
}

#[test]
fn normalize_star_obstruction() {
    let o = run(&["normalize", "--theta", &data("flip.json"), "--word", "f2* e2 e1* f1", "--star"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("(e1)(e1)* + (e2)(e2)*"));
}

#[test]
fn classify_two_by_two() {
    let o = run(&["classify", "--m", "2", "--n", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert_eq!(out.lines().count(), 9);
    let members: usize = out
        .lines()
        .map(|l| l.rsplit('[').next().unwrap().split_whitespace().next().unwrap().parse::<usize>().unwrap())
        .sum();
    assert_eq!(members, 24);
}

#[test]
fn paperlab_passes() {
    let o = run(&["paperlab", "--fock-depth", "4", "--grid", "72"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let o = run(&["paperlab", "--only", "classification", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v.to_string().contains("\"pass\":true"));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(run(&["paperlab", "--only", "nosuch"]).status.code(), Some(2));
    assert_eq!(run(&["validate-rep", "--rep", "/nonexistent/rep.json"]).status.code(), Some(2));
    assert_eq!(run(&["dilate", "--rep", &data("flip_one_dim.json"), "--mode", "sideways"]).status.code(), Some(2));
    assert_eq!(run(&["normalize", "--theta", &data("flip_one_dim.json"), "--word", "e1"]).status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"tau_rel": -1}"#).unwrap();
    let o = run(&["--config", cfg.to_str().unwrap(), "classify", "--m", "1", "--n", "1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn invalid_inputs_exit_one() {
    assert_eq!(run(&["validate-rep", "--rep", &data("not_commuting.json")]).status.code(), Some(1));
    let o = run(&["validate-rep", "--rep", &data("not_contractive.json")]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("\"row_contractive\": false"));
    let o = run(&["dilate", "--rep", &data("not_contractive.json"), "--mode", "fbp", "--family", "e"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn norm_csv() {
    let o = run(&["norm", "--theta", &data("flip.json"), "--poly", &data("flip_poly.json"), "--max-cutoff", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("cutoff,lower_bound"));
    for l in lines {
        let b: f64 = l.split(',').nth(1).unwrap().parse().unwrap();
        assert!(b <= 2f64.sqrt() + 1e-9);
    }
}

#[test]
fn dilation_json_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    for mode in ["fbp", "solel", "star"] {
        let out = dir.path().join(format!("{mode}.json"));
        let o = run(&["dilate", "--rep", &data("flip_one_dim.json"), "--mode", mode, "--depth", "2", "--out", out.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{mode}: {}", String::from_utf8_lossy(&o.stderr));
        let text = std::fs::read_to_string(&out).unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["mode"], mode);
        if mode != "star" {
            let r: dilationlab::io::DilationJson = dilationlab::io::from_str(&text).unwrap();
            let back = r.to_result().unwrap();
            assert_eq!(dilationlab::io::to_string(&dilationlab::io::DilationJson::new(mode, &back)), text.trim_end());
        }
    }
}

#[test]
fn atomic_dot_and_dilation() {
    let o = run(&["atomic", "--graph", &data("flip_loop_graph.json")]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("digraph"));
    let o = run(&["atomic", "--graph", &data("flip_loop_graph.json"), "--dilate", "2", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("dilated.json");
    std::fs::write(&g, stdout(&o)).unwrap();
    let again = run(&["atomic", "--graph", g.to_str().unwrap(), "--json"]);
    assert_eq!(again.status.code(), Some(0));
    assert_eq!(stdout(&again), stdout(&o));
    let o = run(&["--seed", "3", "atomic", "--random", "4", "--theta", &data("flip.json")]);
    assert_eq!(o.status.code(), Some(0));
}
