use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_modal-barrier"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    fs::write(&path, text).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "failed: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// Rows below the header, split on commas.
fn rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect()
}

fn num(x: &str) -> f64 {
    x.parse().unwrap()
}

/// Two triangles joined by a light bridge.
const BARBELL: &str = "0 1 1\n1 2 1\n0 2 1\n3 4 1\n4 5 1\n3 5 1\n2 3 0.01\n";

#[test]
fn spectrum_of_k2() {
    let dir = TempDir::new().unwrap();
    let g = write(&dir, "k2.txt", "0 1\n");
    let out = stdout(&run(&["spectrum", s(&g)]));
    assert!(out.starts_with("index,eigenvalue\n"));
    let r = rows(&out);
    assert_eq!(r.len(), 2);
    assert_eq!(r[0][0], "0");
    assert!(num(&r[0][1]).abs() < 1e-12);
    assert_eq!(r[1][0], "1");
    assert!((num(&r[1][1]) - 2.0).abs() < 1e-12);
}

#[test]
fn exact_resistance_of_k2() {
    let dir = TempDir::new().unwrap();
    let g = write(&dir, "k2.txt", "0 1\n");
    let out = stdout(&run(&["resistance", s(&g), "--method", "exact", "--q", "2"]));
    assert!(out.starts_with("edge_tail,edge_head,resistance\n"));
    let r = rows(&out);
    assert_eq!(r.len(), 1);
    assert_eq!((r[0][0].as_str(), r[0][1].as_str()), ("0", "1"));
    assert!((num(&r[0][2]) - 2.0).abs() < 1e-12);
}

#[test]
fn shuffled_weights_are_reproducible() {
    let dir = TempDir::new().unwrap();
    let g = write(&dir, "g.txt", BARBELL);
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for out in [&a, &b] {
        let o = run(&["weights", s(&g), "--mode", "shuffled", "--seed", "7", "--q", "2", "-o", s(out)]);
        stdout(&o);
    }
    let (x, y) = (fs::read(&a).unwrap(), fs::read(&b).unwrap());
    assert!(!x.is_empty());
    assert_eq!(x, y);
    // The sidecar echoes the resolved configuration.
    let sidecar: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("a.csv.json")).unwrap()).unwrap();
    assert_eq!(sidecar["command"], "weights");
    assert_eq!(sidecar["config"]["seed"], 7);
}

#[test]
fn barrier_weights_throttle_the_bridge() {
    let dir = TempDir::new().unwrap();
    let g = write(&dir, "g.txt", BARBELL);
    let out = stdout(&run(&["weights", s(&g), "--mode", "barrier", "--q", "2"]));
    let r = rows(&out);
    let bridge = r.iter().find(|row| row[0] == "2" && row[1] == "3").unwrap();
    let lightest = r.iter().map(|row| num(&row[2])).fold(f64::INFINITY, f64::min);
    assert_eq!(num(&bridge[2]), lightest);
}

#[test]
fn resistance_file_round_trips_through_weights() {
    let dir = TempDir::new().unwrap();
    let g = write(&dir, "g.txt", BARBELL);
    let r = dir.path().join("r.csv");
    stdout(&run(&["resistance", s(&g), "--method", "approx-ii", "-o", s(&r)]));
    let from_file = stdout(&run(&["weights", s(&g), "--resistance-file", s(&r)]));
    let computed = stdout(&run(&["weights", s(&g), "--method", "approx-ii"]));
    assert_eq!(from_file, computed);
}

#[test]
fn distributed_matches_approx_ii_and_reports_stats() {
    let dir = TempDir::new().unwrap();
    let g = write(&dir, "g.txt", BARBELL);
    let out = dir.path().join("d.csv");
    stdout(&run(&["resistance", s(&g), "--method", "distributed", "--p", "4", "-o", s(&out)]));
    let central = stdout(&run(&["resistance", s(&g), "--method", "approx-ii", "--p", "4"]));
    assert_eq!(fs::read_to_string(&out).unwrap(), central);
    let sidecar: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("d.csv.json")).unwrap()).unwrap();
    assert_eq!(sidecar["stats"]["rounds"], 4);
    assert_eq!(sidecar["stats"]["non_neighbor_reads"], 0);
}

#[test]
fn detect_q_on_generated_clusters() {
    let dir = TempDir::new().unwrap();
    let g = dir.path().join("g.txt");
    let p = dir.path().join("p.txt");
    stdout(&run(&["generate", "--family", "planted", "--seed", "3", "-o", s(&g), "--partition-output", s(&p)]));
    let out = stdout(&run(&["detect-q", s(&g)]));
    let chosen: Vec<_> = rows(&out).into_iter().filter(|r| r[3] == "true").collect();
    assert_eq!(chosen.len(), 1);
    assert_eq!(chosen[0][0], "5");

    let verify = stdout(&run(&["verify", s(&g), "--partition-file", s(&p)]));
    assert!(verify.starts_with("bound,lhs,rhs,slack,status\n"));
    assert!(rows(&verify).iter().all(|r| r[4] != "violated"));
}

#[test]
fn diffusion_conserves_mass() {
    let dir = TempDir::new().unwrap();
    let g = write(&dir, "g.txt", BARBELL);
    let out = dir.path().join("x.csv");
    let mut args = vec!["diffuse", s(&g), "--start", "0", "--target", "5", "--steps", "50", "-o", s(&out)];
    for v in ["0", "1", "2", "3", "4"] {
        args.extend(["--track", v]);
    }
    stdout(&run(&args));
    let csv = fs::read_to_string(&out).unwrap();
    assert!(csv.starts_with("step,x_5,x_0,x_1,x_2,x_3,x_4\n"));
    let r = rows(&csv);
    assert_eq!(r.len(), 51);
    assert_eq!(r[0][1..], ["0.0", "1.0", "0.0", "0.0", "0.0", "0.0"]);
    for row in &r {
        let mass: f64 = row[1..].iter().map(|x| num(x)).sum();
        assert!((mass - 1.0).abs() < 1e-12);
    }
    let sidecar: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("x.csv.json")).unwrap()).unwrap();
    assert!(sidecar["stats"]["max_mass_drift"].as_f64().unwrap() < 1e-12);
}

#[test]
fn compare_commands_write_three_columns() {
    let dir = TempDir::new().unwrap();
    let g = write(&dir, "g.txt", BARBELL);
    let d = stdout(&run(&[
        "compare", "diffusion", s(&g), "--q", "2", "--start", "0", "--target", "5", "--steps", "20",
    ]));
    assert!(d.starts_with("step,unit,barrier,shuffled\n"));
    let e = stdout(&run(&[
        "compare", "epidemic", s(&g), "--q", "2", "--runs", "20", "--days", "10", "--seed", "1",
    ]));
    assert!(e.starts_with("day,unit,barrier,shuffled\n"));
    assert_eq!(rows(&e).len(), 11);
    let again = stdout(&run(&[
        "compare", "epidemic", s(&g), "--q", "2", "--runs", "20", "--days", "10", "--seed", "1",
    ]));
    assert_eq!(e, again);
}

#[test]
fn epidemic_from_a_named_vertex() {
    let dir = TempDir::new().unwrap();
    let g = write(&dir, "g.txt", BARBELL);
    let out = stdout(&run(&["epidemic", s(&g), "--runs", "10", "--days", "5", "--patient-zero", "3"]));
    let r = rows(&out);
    assert_eq!(r[0], vec!["0", "1.0"]);
}

fn error_of(o: &Output) -> serde_json::Value {
    let stderr = String::from_utf8_lossy(&o.stderr);
    let line = stderr.lines().last().unwrap();
    serde_json::from_str(line).unwrap()
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    let g = write(&dir, "g.txt", BARBELL);

    let o = run(&["no-such-command"]);
    assert_eq!(o.status.code(), Some(1));

    let o = run(&["spectrum", s(&dir.path().join("missing.txt"))]);
    assert_eq!(o.status.code(), Some(2));
    let err = error_of(&o);
    assert_eq!(err["error"]["kind"], "io");
    assert_eq!(err["error"]["exit_code"], 2);

    let o = run(&["resistance", s(&g), "--epsilon=-1", "--method", "approx-i"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(error_of(&o)["error"]["module"], "resistance");

    // Validation happens before the file is read.
    let o = run(&["epidemic", s(&dir.path().join("missing.txt")), "--pa", "2"]);
    assert_eq!(o.status.code(), Some(1));

    let bad = write(&dir, "bad.txt", "0 0 1\n");
    let o = run(&["spectrum", s(&bad)]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(error_of(&o)["error"]["module"], "graph");

    let o = run(&["diffuse", s(&g), "--start", "nowhere"]);
    assert_eq!(o.status.code(), Some(1));

    let o = run(&["diffuse", s(&g), "--start", "0", "--kappa", "10"]);
    assert_eq!(o.status.code(), Some(1));

    assert_eq!(run(&["--help"]).status.code(), Some(0));
    assert_eq!(run(&["--version"]).status.code(), Some(0));
}
