use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_assouadlab"))
}

fn spec(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../specs").join(name)
}

fn run(args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = bin();
    cmd.args(args);
    if let Some(t) = threads {
        cmd.env("ASSOUADLAB_THREADS", t);
    }
    cmd.output().expect("binary runs")
}

fn ok(args: &[&str], threads: Option<&str>) -> Vec<u8> {
    let out = run(args, threads);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out.stdout
}

fn max_threads() -> String {
    std::thread::available_parallelism().map_or(4, |n| n.get()).max(4).to_string()
}

/// Each invocation writes its output file into a fresh directory; returns
/// the bytes of every listed file.
fn files_of(args: &[&str], files: &[&str], threads: Option<&str>) -> Vec<Vec<u8>> {
    let dir = tempfile::tempdir().unwrap();
    let args: Vec<String> = args
        .iter()
        .map(|a| a.strip_prefix('@').map_or(a.to_string(), |f| dir.path().join(f).display().to_string()))
        .collect();
    let refs: Vec<&str> = args.iter().map(String::as_str).collect();
    let mut all = vec![ok(&refs, threads)];
    for f in files {
        all.push(std::fs::read(dir.path().join(f)).unwrap());
    }
    all
}

fn assert_deterministic(args: &[&str], files: &[&str]) {
    let first = files_of(args, files, None);
    assert_eq!(first, files_of(args, files, None), "rerun differs: {args:?}");
    assert_eq!(first, files_of(args, files, Some("1")), "one thread differs: {args:?}");
    assert_eq!(first, files_of(args, files, Some(&max_threads())), "many threads differ: {args:?}");
}

#[test]
fn every_subcommand_is_deterministic() {
    let lp = spec("line_pair.json");
    let lp = lp.to_str().unwrap();
    let sp = spec("spliced_carpet.json");
    let sp = sp.to_str().unwrap();
    let ov = spec("overlap.json");
    let ov = ov.to_str().unwrap();
    let pc = spec("percolation.json");
    let pc = pc.to_str().unwrap();
    let win = spec("blowup_window.json");
    let win = win.to_str().unwrap();

    assert_deterministic(&["dims", lp], &[]);
    assert_deterministic(&["dims", ov, "-o", "@d.json"], &["d.json"]);
    assert_deterministic(&["sample", lp, "--seed", "1"], &[]);
    assert_deterministic(&["sample", ov, "--seed", "5", "--cells"], &[]);
    assert_deterministic(&["sample", pc, "--seed", "2"], &[]);
    assert_deterministic(&["render", win, "--seed", "3", "--size", "256", "-o", "@r.pgm"], &["r.pgm"]);
    assert_deterministic(&["render", pc, "--seed", "1", "--size", "128", "-o", "@p.pgm"], &["p.pgm"]);
    assert_deterministic(&["estimate", ov, "--seed", "5"], &[]);
    assert_deterministic(&["estimate", pc, "--seed", "3", "-o", "@e.csv"], &["e.csv"]);
    assert_deterministic(
        &[
            "percolate", "--n", "2", "--d", "2", "--p", "0.7", "--depth", "8", "--seed", "1", "--condition",
            "--witness-m", "3", "-o", "@s.json", "--levels", "@l.csv", "--pgm", "@l.pgm",
        ],
        &["s.json", "l.csv", "l.pgm"],
    );
    assert_deterministic(&["tangent", sp, "--seed", "9", "--target", "product"], &[]);
    assert_deterministic(&["tangent", lp, "--seed", "2", "--target", "shift"], &[]);
    assert_deterministic(&["report", ov], &[]);
}

#[test]
fn percolate_reference_run_is_stable() {
    let args = ["percolate", "--n", "2", "--d", "2", "--p", "0.7", "--depth", "8", "--seed", "1"];
    let a = ok(&args, None);
    assert_eq!(a, ok(&args, None));
    let v: serde_json::Value = serde_json::from_slice(&a).unwrap();
    assert_eq!(v["p"], "7/10");
    assert_eq!(v["level_counts"].as_array().unwrap().len(), 9);
    assert_eq!(v["assouad"], 2.0);
}

#[test]
fn dims_reproduce_closed_forms() {
    let v: serde_json::Value = serde_json::from_slice(&ok(&["dims", spec("line_pair.json").to_str().unwrap()], None)).unwrap();
    let entry = |name: &str| v["theoretical"].as_array().unwrap().iter().find(|e| e["name"] == name).unwrap()["value"].clone();
    assert_eq!(entry("mackay"), serde_json::json!([1.0, 1.0]));
    assert_eq!(entry("as_assouad"), 2.0);
    assert_eq!(entry("gui_li"), 1.0);

    let v: serde_json::Value = serde_json::from_slice(&ok(&["dims", spec("overlap.json").to_str().unwrap()], None)).unwrap();
    let sims = v["theoretical"].as_array().unwrap().iter().find(|e| e["name"] == "sim_dims").unwrap()["value"].clone();
    assert!((sims[0].as_f64().unwrap() - 0.81137).abs() < 1e-4);
    assert!((sims[1].as_f64().unwrap() - 0.511918).abs() < 1e-5);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"kind\": \"carpet\",\n \"depth\": 3}").unwrap();
    let out = run(&["dims", bad.to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line"));

    let typo = dir.path().join("typo.json");
    let text = std::fs::read_to_string(spec("line_pair.json")).unwrap().replace("\"m\": 2, \"n\": 3, \"digits\": [[0, 2]", "\"m\": 2, \"n\": 3, \"digits\": [[0, 9]");
    std::fs::write(&typo, text).unwrap();
    let out = run(&["dims", typo.to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 5") && err.contains("model.ifss[0]"), "{err}");

    let empty = dir.path().join("empty.json");
    std::fs::write(
        &empty,
        r#"{"kind": "carpet", "model": {"ifss": [{"m": 2, "n": 3, "digits": [[0, 2], [1, 2]]}], "probs": ["1"]},
            "realization": {"mode": "constant", "letter": 1}, "depth": 6,
            "window": {"lo": ["0", "0"], "hi": ["1/2", "1/3"]}}"#,
    )
    .unwrap();
    let png = dir.path().join("x.pgm");
    let out = run(&["render", empty.to_str().unwrap(), "--seed", "0", "-o", png.to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(3));
    assert!(!png.exists());

    let args = ["percolate", "--n", "2", "--d", "2", "--p", "0.26", "--depth", "10", "--seed", "1", "--condition", "--max-retries", "3"];
    assert_eq!(run(&args, None).status.code(), Some(4));

    let args = ["percolate", "--n", "2", "--d", "2", "--p", "1/10", "--depth", "4", "--seed", "1", "--condition"];
    assert_eq!(run(&args, None).status.code(), Some(2));
}

#[test]
fn failed_runs_leave_no_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let summary = dir.path().join("s.json");
    let levels = dir.path().join("l.csv");
    let blocked = dir.path().join("missing").join("l.pgm");
    let out = run(
        &[
            "percolate", "--n", "2", "--d", "2", "--p", "0.7", "--depth", "6", "--seed", "1", "-o",
            summary.to_str().unwrap(), "--levels", levels.to_str().unwrap(), "--pgm", blocked.to_str().unwrap(),
        ],
        None,
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(!summary.exists() && !levels.exists());
}

#[test]
fn tangent_targets_stay_within_bounds() {
    let csv = String::from_utf8(ok(&["tangent", spec("spliced_carpet.json").to_str().unwrap(), "--seed", "9", "--target", "product"], None)).unwrap();
    assert!(csv.starts_with("stage,label,window,distance,bound,within\n"));
    assert!(csv.ends_with("# dominated,true\n"), "{csv}");
    let csv = String::from_utf8(ok(&["tangent", spec("line_pair.json").to_str().unwrap(), "--seed", "1", "--target", "shift"], None)).unwrap();
    for row in csv.lines().skip(1).filter(|l| !l.starts_with('#')) {
        assert!(row.contains(",0,0,true"), "{row}");
    }
}
