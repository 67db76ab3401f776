use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use twdecomp::generators;
use twdecomp::io::{write_graph, Format};
use twdecomp::report::{Outcome, RunReport};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_twdecomp"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn write_edgelist(dir: &Path, name: &str, g: &twdecomp::Graph) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, write_graph(g, Format::Edgelist { zero_indexed: false }).unwrap()).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn decompose_grid_writes_verifiable_report() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_edgelist(dir.path(), "grid12.txt", &generators::grid(12, 12));
    let out = dir.path().join("rep.json");
    let csv = dir.path().join("phi.csv");
    let o = run(&["decompose", s(&input), "--h", "2", "--r", "2", "--theorem", "1", "--out", s(&out), "--csv", s(&csv)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));

    let report = RunReport::from_json(&std::fs::read_to_string(&out).unwrap()).unwrap();
    match &report.outcome {
        Outcome::Decomposition { result } => assert!(result.subgraphs.len() >= 2),
        other => panic!("unexpected outcome {other:?}"),
    }
    assert!(report.config.get("seed").is_some());
    assert!(report.timings.contains_key("total_seconds"));
    assert!(std::fs::read_to_string(&csv).unwrap().starts_with("iteration,phi\n"));

    let v = run(&["verify", s(&out)]);
    assert_eq!(v.status.code(), Some(0), "{}", String::from_utf8_lossy(&v.stdout));
}

#[test]
fn tampered_report_fails_verify() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_edgelist(dir.path(), "grid12.txt", &generators::grid(12, 12));
    let out = dir.path().join("rep.json");
    assert!(run(&["decompose", s(&input), "--h", "2", "--r", "2", "--out", s(&out)]).status.success());

    let mut report = RunReport::from_json(&std::fs::read_to_string(&out).unwrap()).unwrap();
    report.seed += 1;
    std::fs::write(&out, report.to_json()).unwrap();
    let v = run(&["verify", s(&out)]);
    assert_eq!(v.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&v.stdout).contains("FAIL digest"));
}

#[test]
fn same_seed_same_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_edgelist(dir.path(), "grid.txt", &generators::grid(10, 10));
    let mut bytes = Vec::new();
    for i in 0..2 {
        let out = dir.path().join(format!("r{i}.json"));
        assert!(run(&["decompose", s(&input), "--h", "2", "--r", "2", "--seed", "5", "--out", s(&out)]).status.success());
        let r = RunReport::from_json(&std::fs::read_to_string(&out).unwrap()).unwrap();
        bytes.push(r.canonical_bytes());
    }
    assert_eq!(bytes[0], bytes[1]);
}

#[test]
fn partial_config_file_is_merged() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_edgelist(dir.path(), "grid.txt", &generators::grid(12, 12));
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"partition_retries": 7}"#).unwrap();
    let out = dir.path().join("r.json");
    let o = run(&["decompose", s(&input), "--h", "2", "--r", "2", "--config", s(&cfg), "--out", s(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = RunReport::from_json(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(r.config["partition_retries"], 7);
    assert_eq!(r.config["embed_attempts"], 6);
}

#[test]
fn usage_and_input_errors() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_edgelist(dir.path(), "k4.txt", &generators::complete(4));
    assert_eq!(run(&["decompose", s(&input), "--h", "0", "--r", "2"]).status.code(), Some(64));
    assert_eq!(run(&["decompose", s(&input), "--h", "1", "--r", "2", "--seed", "soon"]).status.code(), Some(64));
    assert_eq!(run(&["bogus"]).status.code(), Some(64));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    assert_eq!(run(&["decompose", "/nonexistent/graph.txt", "--h", "1", "--r", "1"]).status.code(), Some(66));

    let bad = dir.path().join("bad.dimacs");
    std::fs::write(&bad, "p edge 3 1\ne 1 9\n").unwrap();
    assert_eq!(run(&["analyze", s(&bad)]).status.code(), Some(66));
}

#[test]
fn infeasible_parameters_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_edgelist(dir.path(), "grid.txt", &generators::grid(12, 12));
    let o = run(&["decompose", s(&input), "--h", "40", "--r", "10"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("infeasible"));
}

#[test]
fn analyze_clique() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("k6.dimacs");
    std::fs::write(&input, write_graph(&generators::complete(6), Format::Dimacs).unwrap()).unwrap();
    let out = dir.path().join("a.json");
    assert!(run(&["analyze", s(&input), "--out", s(&out)]).status.success());
    let r = RunReport::from_json(&std::fs::read_to_string(&out).unwrap()).unwrap();
    match &r.outcome {
        Outcome::Analysis { analysis } => assert_eq!((analysis.treewidth.lower, analysis.treewidth.upper), (5, 5)),
        other => panic!("unexpected outcome {other:?}"),
    }
    assert!(run(&["verify", s(&out)]).status.success());
}

#[test]
fn ep_on_triangle_packs_it() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("tri.txt");
    std::fs::write(&input, "1 2\n2 3\n3 1\n").unwrap();
    let o = run(&["ep", s(&input), "--k", "1"]);
    assert!(o.status.success());
    let r = RunReport::from_json(&String::from_utf8(o.stdout).unwrap()).unwrap();
    let json = serde_json::to_value(&r.outcome).unwrap();
    assert_eq!(json["kind"], "erdos_posa");
    assert!(json["outcome"]["branch"].get("Packing").is_some(), "{json}");

    let o = run(&["ep", s(&input), "--k", "2", "--mod", "4"]);
    assert!(o.status.success());
    let r = RunReport::from_json(&String::from_utf8(o.stdout).unwrap()).unwrap();
    let json = serde_json::to_value(&r.outcome).unwrap();
    assert_eq!(json["outcome"]["branch"]["Cover"], serde_json::json!([]));
}

#[test]
fn expander_report_replays() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("e.json");
    assert!(run(&["expander", "--n", "16", "--seed", "3", "--out", s(&out)]).status.success());
    assert!(run(&["verify", s(&out)]).status.success());
}
