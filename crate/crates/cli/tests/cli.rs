use std::path::Path;
use std::process::{Command, Output};

fn pushpull(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pushpull"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn gen(dir: &Path, name: &str, args: &[&str]) -> String {
    let path = dir.join(name);
    let p = path.to_str().unwrap().to_string();
    let mut all = vec!["gen", "--out", &p];
    all.extend_from_slice(args);
    let o = pushpull(&all);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    p
}

const THREE_OBJECTS: &str = r#"{
  "schema_version": 1,
  "catalog": ["o0", "o1", "o2"],
  "partition": [["o0"], ["o1"], ["o2"]],
  "types": ["t"],
  "prior": [1.0],
  "agent_u": {"t": [3.0, 1.0, 2.0]},
  "advocate_v": {"t": [0.0, 4.0, 0.0]},
  "discount": {"kind": "custom", "params": {"weights": [1.0, 0.5, 0.0]}}
}"#;

#[test]
fn aligned_frontier_has_unit_pull_and_push() {
    let dir = tempfile::tempdir().unwrap();
    let p = gen(
        dir.path(),
        "aligned.json",
        &["--kind", "aligned", "--objects", "7", "--blocks", "4", "--seed", "9"],
    );
    let o = pushpull(&["frontier", &p, "--grid", "0:1:21"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "lambda,U_lambda,V_lambda,P_lambda,pull,push,degenerate_pull,degenerate_push"
    );
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 21);
    for r in rows {
        assert_eq!(r[4], "1");
        assert_eq!(r[5], "1");
    }
}

#[test]
fn three_object_solve_and_metrics() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("e1.json");
    std::fs::write(&p, THREE_OBJECTS).unwrap();
    let p = p.to_str().unwrap();
    let o = pushpull(&["solve", p, "--lambda", "0.5", "--strategy", "brute_force"]);
    assert!(o.status.success());
    let s = stdout(&o);
    assert!(s.contains(r#""ranking":["o1","o0","o2"]"#), "{s}");
    assert!(s.contains(r#""objective":3.25"#), "{s}");
    assert!(s.contains(r#""kind":"solve""#));

    let o = pushpull(&["metrics", p, "--lambda", "0.5"]);
    let s = stdout(&o);
    assert!(s.contains(r#""pull":0.625"#), "{s}");
    assert!(s.contains(r#""push":1"#), "{s}");
}

#[test]
fn refine_compare_strict_gain() {
    let doc = r#"{
      "schema_version": 1,
      "catalog": ["o0", "o1"],
      "partition": [["o0", "o1"]],
      "types": ["t"],
      "prior": [1.0],
      "agent_u": {"t": [0.0, 0.1]},
      "advocate_v": {"t": [0.0, 0.0]},
      "discount": {"kind": "dcg"}
    }"#;
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("pair.json");
    std::fs::write(&p, doc).unwrap();
    let o = pushpull(&["refine-compare", p.to_str().unwrap(), "--grid", "0:1:3"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let rows: Vec<Vec<f64>> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    // At λ = 1 the coarse list earns 0.1·δ_1 and the split list 0.1.
    let last = rows.last().unwrap();
    assert_eq!(last[0], 1.0);
    assert!(last[3] > 0.0);
    assert!(rows.iter().all(|r| r[3] >= 0.0));
    assert_eq!(rows[0][3], 0.0);
}

#[test]
fn corpus_validation_passes() {
    let o = pushpull(&["validate", "--corpus", "200", "--seed", "7", "--format", "csv"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.lines().skip(1).all(|l| l.ends_with(",true")));
    assert!(text.lines().count() > 200);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"catalog": ["a", "a"], "prior": [0.5]}"#).unwrap();
    let o = pushpull(&["validate", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(o.stdout.is_empty());
    assert!(!o.stderr.is_empty());

    let p = gen(
        dir.path(),
        "blocks.json",
        &["--objects", "6", "--blocks", "3", "--seed", "1"],
    );
    let o = pushpull(&["solve", &p, "--lambda", "0.5", "--strategy", "sort"]);
    assert_eq!(o.status.code(), Some(3));

    let o = pushpull(&["solve", &p, "--lambda", "1.5"]);
    assert_eq!(o.status.code(), Some(2));

    let o = pushpull(&["frontier", &p, "--grid", "0:1"]);
    assert_eq!(o.status.code(), Some(2));

    let o = pushpull(&["noise-sweep", &p]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn outputs_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let p = gen(dir.path(), "feed.json", &["--preset", "social", "--seed", "4"]);
    let q = gen(dir.path(), "feed2.json", &["--preset", "social", "--seed", "4"]);
    assert_eq!(std::fs::read(&p).unwrap(), std::fs::read(&q).unwrap());
    for args in [
        vec!["frontier", p.as_str(), "--format", "json"],
        vec!["noise-sweep", p.as_str()],
        vec!["refine-compare", p.as_str(), "--grid", "0:1:11"],
    ] {
        let a = pushpull(&args);
        let b = pushpull(&args);
        assert!(a.status.success(), "{args:?}");
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn ingest_and_aggregate() {
    let log = "user_id,group_label,object_id,block_id,agent_score,advocate_score\n\
               u1,A,o0,o0,3,0\n\
               u1,A,o1,o1,1,4\n\
               u1,A,o2,o2,2,0\n\
               u2,B,x,x,1,1\n\
               u2,B,y,y,2,0\n\
               u2,B,z,z,0,1\n";
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("log.csv");
    std::fs::write(&p, log).unwrap();
    let p = p.to_str().unwrap();
    let o = pushpull(&["ingest", p, "--discount", "custom:1,0.5,0", "--lambda", "0.5"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let u1 = text.lines().find(|l| l.starts_with("u1,")).unwrap();
    assert_eq!(u1.split(',').nth(8), Some("0.625"));

    let out = dir.path().join("summary.json");
    let o = pushpull(&["aggregate", p, "--discount", "cutoff:1", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(o.stdout.is_empty());
    let s = std::fs::read_to_string(out).unwrap();
    assert!(s.starts_with(r#"{"body":{"gaps":"#), "{s}");
    assert!(s.contains(r#""kind":"summary""#));
}
