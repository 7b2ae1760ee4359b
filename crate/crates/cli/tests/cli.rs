use std::path::PathBuf;
use std::process::{Command, Output};

fn config(name: &str) -> String {
    let mut p = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    p.pop();
    p.pop();
    p.push("configs");
    p.push(name);
    p.to_string_lossy().into_owned()
}

fn cplifs(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cplifs")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn dim_markov_on_cantor() {
    let o = cplifs(&["dim", &config("cantor.json"), "--method", "markov"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: f64 = stdout(&o).trim().parse().unwrap();
    assert!((v - 2f64.ln() / 3f64.ln()).abs() < 1e-6);
}

#[test]
fn every_dim_method_runs() {
    for method in ["direct", "markov", "boxcount", "moran"] {
        let o = cplifs(&["dim", &config("full_interval.json"), "--method", method, "--format", "csv"]);
        assert_eq!(o.status.code(), Some(0), "{method}: {}", stderr(&o));
        let out = stdout(&o);
        assert!(out.starts_with("method,value,bracket_lo,bracket_hi,depth\n"), "{out}");
        let v: f64 = out.lines().nth(1).unwrap().split(',').nth(1).unwrap().parse().unwrap();
        assert!((v - 1.0).abs() < 0.05, "{method}: {v}");
    }
}

#[test]
fn invalid_slope_exits_2() {
    let o = cplifs(&["validate", &config("bad_slope.json")]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("SlopeOutOfRange") && err.contains("map 1, branch 1"), "{err}");
    let o = cplifs(&["validate", &config("example51.json")]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("[-0.5,0.5]"));
}

#[test]
fn missing_file_and_bad_grid_exit_2() {
    assert_eq!(cplifs(&["validate", "/nonexistent.json"]).status.code(), Some(2));
    assert_eq!(cplifs(&["pressure", "@cantor", "--s-grid", "1:0"]).status.code(), Some(2));
}

#[test]
fn example51_report() {
    let o = cplifs(&["example51", "--eps", "0.001", "--nmax", "12"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("GAP-PERSISTS"), "{out}");
    let line = out.lines().find(|l| l.starts_with("moran root")).unwrap();
    let v: f64 = line.rsplit(' ').next().unwrap().parse().unwrap();
    assert!((v - 0.5185).abs() < 1e-3);
}

#[test]
fn diagram_csv_round_trips_through_verify() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("edges.csv");
    let path = path.to_str().unwrap();
    let o = cplifs(&["diagram", &config("kinked.json"), "--export", "csv", "--output", path]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let o = cplifs(&["diagram", &config("kinked.json"), "--verify", path]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("violations: 0"));

    let dot = cplifs(&["diagram", &config("example51.json"), "--export", "dot"]);
    assert!(stdout(&dot).starts_with("digraph"));
}

#[test]
fn capped_diagram_is_partial_with_exit_3() {
    let o = cplifs(&["diagram", &config("lebesgue_positive.json"), "--max-level", "2"]);
    assert_eq!(o.status.code(), Some(3));
    let out = stdout(&o);
    assert!(out.ends_with("#truncated\n"));
    assert!(out.lines().count() > 2);
}

#[test]
fn budget_cap_truncates_pressure() {
    let o = cplifs(&["pressure", "@cantor", "--s-grid", "0:1:3", "-n", "30", "--max-terms", "100000"]);
    assert_eq!(o.status.code(), Some(3));
    let out = stdout(&o);
    assert!(out.starts_with("s,phi_n,n\n") && out.ends_with("#truncated\n"), "{out}");
    assert_eq!(out.lines().count(), 5);
}

#[test]
fn overlap_and_esc() {
    let o = cplifs(&["overlap", &config("three_map_overlap.json"), "--depth", "2", "--exact-rational"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("2,1 2,3 1,") && out.contains(",0,exact"), "{out}");
    let o = cplifs(&["overlap", "@cantor", "--depth", "6", "--format", "text"]);
    assert!(stdout(&o).contains("no overlap up to depth 6"));
    let o = cplifs(&["esc", "@cantor", "--depth", "3"]);
    assert!(stdout(&o).starts_with("depth,pair_count,esc_min_distance,c_estimate\n"));
}

#[test]
fn orbit_text_flags_periodic_image() {
    let o = cplifs(&["orbit", &config("example51.json"), "--depth", "6", "--format", "text"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("periodic breakpoint image 0 (map 1, breakpoint 1), period 1"), "{}", stdout(&o));
}

#[test]
fn sweep_is_deterministic() {
    let args = ["sweep", "@cantor", "--deltas", "1e-3,1e-5", "--trials", "3", "--seed", "11"];
    let a = cplifs(&args);
    let b = cplifs(&[&args[..], &["--threads", "1"]].concat());
    assert_eq!(a.status.code(), Some(0), "{}", stderr(&a));
    assert_eq!(a.stdout, b.stdout);
    let out = stdout(&a);
    assert!(out.starts_with("delta,trial,s_base,s_hat,gap,overlap_flag,periodic_flag,method_base,method_hat\n"));
    assert_eq!(out.lines().count(), 7);
}

#[test]
fn lebesgue_rows() {
    let o = cplifs(&["lebesgue", &config("lebesgue_positive.json"), "--depth", "8"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert_eq!(out.lines().count(), 4);
    assert!(out.lines().skip(1).all(|l| l.ends_with(",1,plateau")), "{out}");
}

#[test]
fn version_names_formats() {
    let o = cplifs(&["--version"]);
    assert!(stdout(&o).contains("format"));
}
