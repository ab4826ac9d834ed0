mod common;

use std::fs;
use std::process::{Command, Output};

use common::model;
use ppnfifo::model::load_ppn;
use ppnfifo::report::{DeltaRow, Report};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ppnfifo")).args(args).output().unwrap()
}

fn m(name: &str) -> String {
    model(name).to_string_lossy().into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn json_report(o: &Output) -> Report {
    assert_eq!(o.status.code(), Some(0), "{}", stderr(o));
    Report::from_json(&stdout(o)).unwrap()
}

const JACOBI_PARAMS: &[&str] = &["--params", "T=8,N=8"];

#[test]
fn analyze_untiled_jacobi() {
    let mut args = vec!["analyze".to_string(), m("jacobi1d.ppn.json")];
    args.extend(JACOBI_PARAMS.iter().map(|s| s.to_string()));
    args.extend(["--format".into(), "json".into()]);
    let o = run(&args.iter().map(String::as_str).collect::<Vec<_>>());
    assert!(stderr(&o).is_empty());
    let r = json_report(&o);
    assert_eq!(r.before.label, "untiled");
    assert!(r.after.is_none());
    assert!(r.before.channels.iter().all(|c| c.class.is_fifo()));
    assert_eq!(r.oracle_agreement, Some(true));
}

#[test]
fn analyze_tiled_jacobi_text() {
    let o = run(&[
        "analyze",
        &m("jacobi1d.ppn.json"),
        "--tiling",
        &m("jacobi1d.tile2x2.json"),
        "--params",
        "T=8,N=8",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("channels (tiled)"));
    let tiled = text.split("channels (tiled)").nth(1).unwrap();
    for id in ["c4", "c5", "c6"] {
        let line = tiled.lines().find(|l| l.split_whitespace().next() == Some(id)).unwrap();
        assert!(line.contains("out-of-order"), "{}", line);
    }
}

#[test]
fn missing_parameter_exits_2_naming_it() {
    let o = run(&["analyze", &m("jacobi1d.ppn.json"), "--params", "T=8"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).is_empty());
    assert!(stderr(&o).contains("`N`"), "{}", stderr(&o));
}

#[test]
fn overlapping_channels_exit_2_naming_the_invariant() {
    let o = run(&["analyze", &m("overlap.ppn.json")]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("channels-disjoint"), "{}", stderr(&o));
}

#[test]
fn unknown_process_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.ppn.json");
    let text = fs::read_to_string(model("jacobi1d.ppn.json")).unwrap();
    fs::write(&path, text.replacen(r#""consumer": "compute""#, r#""consumer": "cmptue""#, 1)).unwrap();
    let o = run(&["analyze", path.to_str().unwrap(), "--params", "T=4,N=4"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("cmptue"));
}

#[test]
fn exhausted_budget_exits_3() {
    let o = run(&["analyze", &m("jacobi1d.ppn.json"), "--params", "T=8,N=8", "--budget", "10"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn fifoize_writes_a_loadable_network() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("split.ppn.json");
    let o = run(&[
        "fifoize",
        &m("jacobi1d.ppn.json"),
        "--tiling",
        &m("jacobi1d.tile2x2.json"),
        "--params",
        "T=8,N=8",
        "--format",
        "json",
        "--out",
        out.to_str().unwrap(),
    ]);
    let r = json_report(&o);
    let after = r.after.as_ref().unwrap();
    assert_eq!(after.summary.n_fifo, after.summary.n_channels);
    assert_eq!(after.summary.pct_fifo_split, Some(100));
    let split = load_ppn(&out).unwrap();
    assert_eq!(split.channels().len(), after.summary.n_channels);
    assert!(split.channel("c5.intra").is_some());
}

#[test]
fn no_oracle_omits_the_agreement_field() {
    let o = run(&[
        "fifoize",
        &m("gemm.ppn.json"),
        "--tiling",
        &m("gemm.tile.json"),
        "--no-oracle",
        "--format",
        "json",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(!stdout(&o).contains("oracle_agreement"));
    assert!(json_report(&o).oracle_agreement.is_none());
}

#[test]
fn dump_trace_writes_one_file_per_channel_and_stage() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&[
        "analyze",
        &m("seidel.ppn.json"),
        "--tiling",
        &m("seidel.tile.json"),
        "--dump-trace",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let files = fs::read_dir(dir.path()).unwrap().count();
    assert_eq!(files, 2 * 8);
    let trace: ppnfifo_core::oracle::Trace =
        serde_json::from_str(&fs::read_to_string(dir.path().join("tiled.north.trace.json")).unwrap()).unwrap();
    assert_eq!(trace.channel, "north");
    assert!(!trace.in_order());
}

#[test]
fn report_delta_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let common = ["--tiling", &m("jacobi1d.tile2x2.json"), "--params", "T=8,N=8", "--format", "json"];
    let analyzed = run(&[&["analyze", &m("jacobi1d.ppn.json")][..], &common[..]].concat());
    let split = run(&[&["fifoize", &m("jacobi1d.ppn.json")][..], &common[..]].concat());
    let (a, s) = (dir.path().join("a.json"), dir.path().join("s.json"));
    fs::write(&a, &analyzed.stdout).unwrap();
    fs::write(&s, &split.stdout).unwrap();

    let o = run(&["report-delta", a.to_str().unwrap(), s.to_str().unwrap(), "--format", "json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let row: DeltaRow = serde_json::from_str(&stdout(&o)).unwrap();
    // c4, c5, c6: 16 + 8 + 8 before, (8 + 4) + (8 + 2 + 1) + (8 + 2) after;
    // rounding each part up makes the split slightly larger here
    assert_eq!((row.size_fifo_fail, row.size_fifo_split), (32, 33));
    assert_eq!(row.delta_text(), "3%");

    // a fifoize report also holds the tiled network
    let o = run(&["report-delta", s.to_str().unwrap(), s.to_str().unwrap()]);
    assert!(stdout(&o).lines().nth(1).unwrap().ends_with("3%"));

    let g = dir.path().join("g.json");
    let gemm = run(&["fifoize", &m("gemm.ppn.json"), "--tiling", &m("gemm.tile.json"), "--format", "json"]);
    fs::write(&g, &gemm.stdout).unwrap();
    let o = run(&["report-delta", a.to_str().unwrap(), g.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("do not match"));
}
